//! Root systems, the reflection group they generate, the weight w_κ, the
//! measure μ_κ, the pseudo-metric d and the Macdonald–Mehta constant.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{self, qmc, Level, QuadSpec};
use crate::region::{AxisBox, Region};
use crate::specfun;

/// Largest group the closure iteration will build.
pub const MAX_GROUP_ORDER: usize = 1024;
const DEDUP_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    Trivial,
    Z2,
    Z2Product,
}

/// Serializable description of a root system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RootSystemConfig {
    pub dimension: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<Preset>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub roots: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub multiplicity: Vec<f64>,
}

impl RootSystemConfig {
    pub fn trivial(dimension: usize) -> Self {
        RootSystemConfig { dimension, preset: Some(Preset::Trivial), roots: None, multiplicity: vec![] }
    }

    pub fn build(&self) -> Result<RootSystemSpec> {
        let n = self.dimension;
        match (self.preset, &self.roots) {
            (Some(_), Some(_)) => Err(Error::RootSystem("give either a preset or explicit roots, not both".into())),
            (Some(Preset::Trivial), None) => RootSystemSpec::trivial(n),
            (Some(Preset::Z2), None) => {
                if n != 1 {
                    return Err(Error::RootSystem("preset z2 requires dimension 1".into()));
                }
                match self.multiplicity.as_slice() {
                    [k] => RootSystemSpec::z2(*k),
                    _ => Err(Error::RootSystem("preset z2 takes exactly one multiplicity".into())),
                }
            }
            (Some(Preset::Z2Product), None) => {
                if self.multiplicity.len() != n {
                    return Err(Error::RootSystem(format!(
                        "preset z2_product needs {n} multiplicities, got {}",
                        self.multiplicity.len()
                    )));
                }
                RootSystemSpec::z2_product(&self.multiplicity)
            }
            (None, Some(roots)) => RootSystemSpec::from_roots(n, roots.clone(), self.multiplicity.clone()),
            (None, None) => Err(Error::RootSystem("missing preset or roots".into())),
        }
    }
}

/// Positive roots (|α|² = 2), multiplicities and the generated reflection
/// group, stored as row-major n×n matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct RootSystemSpec {
    dim: usize,
    roots: Vec<Vec<f64>>,
    kappa: Vec<f64>,
    group: Vec<Vec<f64>>,
}

fn identity(n: usize) -> Vec<f64> {
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        m[i * n + i] = 1.0;
    }
    m
}

fn matmul(a: &[f64], b: &[f64], n: usize) -> Vec<f64> {
    let mut c = vec![0.0; n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            if aik == 0.0 {
                continue;
            }
            for j in 0..n {
                c[i * n + j] += aik * b[k * n + j];
            }
        }
    }
    c
}

fn close(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= DEDUP_TOL)
}

impl RootSystemSpec {
    pub fn trivial(n: usize) -> Result<Self> {
        Self::from_roots(n, vec![], vec![])
    }

    pub fn z2(kappa: f64) -> Result<Self> {
        Self::from_roots(1, vec![vec![1.0]], vec![kappa])
    }

    /// ℤ₂ⁿ generated by the coordinate reflections, one multiplicity per
    /// coordinate. Coordinates with κ = 0 keep their reflection in the group.
    pub fn z2_product(kappas: &[f64]) -> Result<Self> {
        let n = kappas.len();
        let roots = (0..n)
            .map(|i| {
                let mut e = vec![0.0; n];
                e[i] = 1.0;
                e
            })
            .collect();
        Self::from_roots(n, roots, kappas.to_vec())
    }

    /// Normalizes the roots to length √2, builds the group closure and
    /// validates root and multiplicity invariance.
    pub fn from_roots(n: usize, roots: Vec<Vec<f64>>, kappa: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::RootSystem("dimension must be positive".into()));
        }
        if roots.len() != kappa.len() {
            return Err(Error::RootSystem(format!(
                "{} roots but {} multiplicities",
                roots.len(),
                kappa.len()
            )));
        }
        if kappa.iter().any(|k| !(k.is_finite() && *k >= 0.0)) {
            return Err(Error::RootSystem("multiplicities must be finite and nonnegative".into()));
        }
        let mut normed = Vec::with_capacity(roots.len());
        for r in &roots {
            if r.len() != n {
                return Err(Error::RootSystem(format!("root {r:?} is not a {n}-vector")));
            }
            let len = r.iter().map(|v| v * v).sum::<f64>().sqrt();
            if !(len > 0.0) || !len.is_finite() {
                return Err(Error::RootSystem("roots must be finite and nonzero".into()));
            }
            normed.push(r.iter().map(|v| v * std::f64::consts::SQRT_2 / len).collect::<Vec<f64>>());
        }
        for i in 0..normed.len() {
            for j in 0..i {
                if close(&normed[i], &normed[j]) || close(&normed[i], &normed[j].iter().map(|v| -v).collect::<Vec<_>>())
                {
                    return Err(Error::RootSystem("positive roots must be pairwise non-parallel".into()));
                }
            }
        }
        let gens: Vec<Vec<f64>> = normed
            .iter()
            .map(|a| {
                let mut m = identity(n);
                for i in 0..n {
                    for j in 0..n {
                        m[i * n + j] -= a[i] * a[j];
                        let v = m[i * n + j];
                        if (v - v.round()).abs() < 1e-13 {
                            m[i * n + j] = v.round();
                        }
                    }
                }
                m
            })
            .collect();
        let mut group = vec![identity(n)];
        let mut frontier = group.clone();
        while !frontier.is_empty() {
            let mut next = Vec::new();
            for g in &frontier {
                for r in &gens {
                    let mut h = matmul(r, g, n);
                    for v in h.iter_mut() {
                        if (*v - v.round()).abs() < 1e-13 {
                            *v = v.round();
                        }
                    }
                    if !group.iter().any(|e| close(e, &h)) {
                        group.push(h.clone());
                        next.push(h);
                        if group.len() > MAX_GROUP_ORDER {
                            return Err(Error::RootSystem(format!(
                                "reflection group exceeds {MAX_GROUP_ORDER} elements"
                            )));
                        }
                    }
                }
            }
            frontier = next;
        }
        let spec = RootSystemSpec { dim: n, roots: normed, kappa, group };
        spec.validate()?;
        Ok(spec)
    }

    fn validate(&self) -> Result<()> {
        for g in &self.group {
            for (a, ka) in self.roots.iter().zip(&self.kappa) {
                let ga = self.apply(g, a);
                let hit = self.roots.iter().position(|b| {
                    close(b, &ga) || close(b, &ga.iter().map(|v| -v).collect::<Vec<_>>())
                });
                match hit {
                    None => {
                        return Err(Error::RootSystem(format!(
                            "root {a:?} maps to {ga:?}, which is not a root"
                        )))
                    }
                    Some(j) if (self.kappa[j] - ka).abs() > 1e-12 => {
                        return Err(Error::RootSystem("multiplicity is not invariant under the group".into()))
                    }
                    _ => {}
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn roots(&self) -> &[Vec<f64>] {
        &self.roots
    }

    pub fn multiplicities(&self) -> &[f64] {
        &self.kappa
    }

    pub fn group(&self) -> &[Vec<f64>] {
        &self.group
    }

    pub fn chi(&self) -> f64 {
        self.kappa.iter().sum()
    }

    pub fn apply(&self, g: &[f64], x: &[f64]) -> Vec<f64> {
        let n = self.dim;
        (0..n).map(|i| (0..n).map(|j| g[i * n + j] * x[j]).sum()).collect()
    }

    /// Diagonal entries of g when g is a diagonal sign matrix.
    pub fn as_signs(&self, g: &[f64]) -> Option<Vec<f64>> {
        let n = self.dim;
        let mut s = Vec::with_capacity(n);
        for i in 0..n {
            for j in 0..n {
                if i != j && g[i * n + j].abs() > DEDUP_TOL {
                    return None;
                }
            }
            s.push(g[i * n + i].signum());
        }
        Some(s)
    }

    /// Per-coordinate multiplicities when every root is a coordinate axis
    /// (the ℤ₂ⁿ product case, including the trivial system).
    pub fn product_kappas(&self) -> Option<Vec<f64>> {
        let mut k = vec![0.0; self.dim];
        let mut seen = vec![false; self.dim];
        for (a, ka) in self.roots.iter().zip(&self.kappa) {
            let nz: Vec<usize> = (0..self.dim).filter(|&i| a[i].abs() > DEDUP_TOL).collect();
            if nz.len() != 1 || seen[nz[0]] {
                return None;
            }
            seen[nz[0]] = true;
            k[nz[0]] = *ka;
        }
        Some(k)
    }

    /// d(x, y) = min_g |x − g y|.
    pub fn pseudo_dist(&self, x: &[f64], y: &[f64]) -> f64 {
        self.group
            .iter()
            .map(|g| {
                let gy = self.apply(g, y);
                x.iter().zip(&gy).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Orbit {g x}, duplicates removed.
    pub fn orbit(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let mut out: Vec<Vec<f64>> = Vec::new();
        for g in &self.group {
            let gx = self.apply(g, x);
            if !out.iter().any(|o| close(o, &gx)) {
                out.push(gx);
            }
        }
        out
    }

    /// Pseudo-ball B_d(x, r) = ∪_g B(gx, r) as a tagged region.
    pub fn pseudo_ball(&self, x: &[f64], r: f64) -> Result<Region> {
        let balls = self
            .orbit(x)
            .into_iter()
            .map(|c| crate::region::Shape::Ball { center: c, radius: r })
            .collect();
        Region::tagged(self.dim, crate::region::Shape::Union(balls))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasureMethod {
    Exact,
    Cubature,
    QuasiMonteCarlo,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasureEstimate {
    pub value: f64,
    /// Quadrature error estimate, or the standard error for QMC.
    pub error: f64,
    pub method: MeasureMethod,
}

/// Macdonald–Mehta constant by quadrature together with the product formula
/// evaluated per rank-one component and as literally stated for the whole
/// system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MmReport {
    pub quadrature: f64,
    pub error: f64,
    pub per_component: Option<f64>,
    pub literal_product: f64,
    /// Quadrature and the per-component formula agree to 1e-6 relative.
    pub agrees: bool,
    pub literal_agrees: bool,
}

/// μ_κ = w_κ·Lebesgue for a fixed root system.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedMeasure {
    spec: RootSystemSpec,
    chi: f64,
    product: Option<Vec<f64>>,
}

impl WeightedMeasure {
    pub fn new(spec: RootSystemSpec) -> Self {
        let chi = spec.chi();
        let product = spec.product_kappas();
        WeightedMeasure { spec, chi, product }
    }

    pub fn trivial(n: usize) -> Self {
        Self::new(RootSystemSpec::trivial(n).expect("trivial root system"))
    }

    pub fn spec(&self) -> &RootSystemSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.spec.dim
    }

    pub fn chi(&self) -> f64 {
        self.chi
    }

    /// Per-coordinate multiplicities in the ℤ₂ⁿ case.
    pub fn product_kappas(&self) -> Option<&[f64]> {
        self.product.as_deref()
    }

    pub fn weight(&self, x: &[f64]) -> f64 {
        let mut w = 1.0;
        for (a, k) in self.spec.roots.iter().zip(&self.spec.kappa) {
            if *k == 0.0 {
                continue;
            }
            let ip: f64 = a.iter().zip(x).map(|(p, q)| p * q).sum();
            w *= ip.abs().powf(2.0 * k);
        }
        w
    }

    /// ∫_a^b (√2|x|)^{2κ} dx for one coordinate of the product weight.
    pub fn weighted_length(kappa: f64, a: f64, b: f64) -> f64 {
        if !(b > a) {
            return 0.0;
        }
        if kappa == 0.0 {
            return b - a;
        }
        let e = 2.0 * kappa + 1.0;
        let prim = |x: f64| {
            if x.is_infinite() {
                x.signum() * f64::INFINITY
            } else {
                x.signum() * x.abs().powf(e) / e
            }
        };
        2f64.powf(kappa) * (prim(b) - prim(a))
    }

    /// Kink locations of the weight along the line through `prefix` in the
    /// direction of the last coordinate.
    fn hyperplane_breaks(&self, prefix: &[f64]) -> Vec<f64> {
        let k = prefix.len();
        let mut out = vec![0.0];
        for (a, ka) in self.spec.roots.iter().zip(&self.spec.kappa) {
            if *ka == 0.0 || a[k].abs() < DEDUP_TOL {
                continue;
            }
            let s: f64 = a[..k].iter().zip(prefix).map(|(p, q)| p * q).sum();
            out.push(-s / a[k]);
        }
        out
    }

    pub fn measure_of(&self, region: &Region, quad: &QuadSpec) -> Result<MeasureEstimate> {
        if region.dim() != self.dim() {
            return Err(Error::Precondition("region and measure dimensions differ".into()));
        }
        let n = self.dim();
        let Some(bb) = region.bbox().cloned() else {
            return Err(Error::Unsupported("measure of a region without a bounding box".into()));
        };
        if bb.is_empty() {
            return Ok(MeasureEstimate { value: 0.0, error: 0.0, method: MeasureMethod::Exact });
        }
        if let Some(kap) = &self.product {
            if let Some(cells) = region.cells() {
                let v = cells
                    .boxes
                    .iter()
                    .map(|b| (0..n).map(|i| Self::weighted_length(kap[i], b.lo[i], b.hi[i])).product::<f64>())
                    .sum();
                return Ok(MeasureEstimate { value: v, error: 0.0, method: MeasureMethod::Exact });
            }
            if n == 1 {
                if let Some(iv) = region.line_intervals(&[0.0], &[1.0]) {
                    let v = iv.iter().map(|&(a, b)| Self::weighted_length(kap[0], a, b)).sum();
                    return Ok(MeasureEstimate { value: v, error: 0.0, method: MeasureMethod::Exact });
                }
            }
        }
        let mut probe_dir = vec![0.0; n];
        probe_dir[n - 1] = 1.0;
        let tagged = region.line_intervals(&bb.lo, &probe_dir).is_some();
        if tagged {
            let est = self.nested_integral(&|x| self.weight(x), region, &bb, quad);
            if !est.converged {
                return Err(Error::Accuracy(format!(
                    "cubature of the measure did not converge (estimate {}, error {})",
                    est.value, est.error
                )));
            }
            return Ok(MeasureEstimate { value: est.value, error: est.error, method: MeasureMethod::Cubature });
        }
        if n == 1 {
            let est = quad::adaptive(
                |x| if region.contains(&[x]) { self.weight(&[x]) } else { 0.0 },
                bb.lo[0],
                bb.hi[0],
                &[0.0],
                quad.rel_tol,
                0.0,
                quad.max_evals,
            );
            return Ok(MeasureEstimate { value: est.value, error: est.error, method: MeasureMethod::Cubature });
        }
        let vol: f64 = (0..n).map(|k| bb.hi[k] - bb.lo[k]).product();
        let mut x = vec![0.0; n];
        let est = qmc::rqmc_mean(
            |u| {
                for k in 0..n {
                    x[k] = bb.lo[k] + u[k] * (bb.hi[k] - bb.lo[k]);
                }
                if region.contains(&x) {
                    self.weight(&x)
                } else {
                    0.0
                }
            },
            n,
            quad.mc_samples,
            16,
            quad.seed,
        );
        Ok(MeasureEstimate { value: vol * est.value, error: vol * est.std_error, method: MeasureMethod::QuasiMonteCarlo })
    }

    /// ∫_region f dx by nested cubature over the bounding box; the last
    /// coordinate uses exact line intersections of the tag.
    pub fn nested_integral<F: Fn(&[f64]) -> f64>(
        &self,
        f: &F,
        region: &Region,
        bb: &AxisBox,
        quad: &QuadSpec,
    ) -> quad::Estimate {
        let n = self.dim();
        quad::nested(
            f,
            n,
            &|k, prefix: &[f64]| {
                if k + 1 < n {
                    let (a, b) = bb.side(k);
                    return Level { intervals: vec![(a, b)], breaks: vec![0.0] };
                }
                let mut origin = prefix.to_vec();
                origin.push(0.0);
                let mut dir = vec![0.0; n];
                dir[n - 1] = 1.0;
                let iv = region.line_intervals(&origin, &dir).unwrap_or_default();
                let (a, b) = bb.side(n - 1);
                let iv = crate::region::intersect_intervals(&iv, &[(a, b)]);
                Level { intervals: iv, breaks: self.hyperplane_breaks(prefix) }
            },
            quad.rel_tol,
            0.0,
            quad.max_evals,
        )
    }

    /// V_κ(x, r) = μ_κ(B(x, r)).
    pub fn ball_volume(&self, x: &[f64], r: f64, quad: &QuadSpec) -> Result<f64> {
        if !(r > 0.0) {
            return Err(Error::Domain(format!("ball radius must be positive, got {r}")));
        }
        Ok(self.measure_of(&Region::ball(x, r), quad)?.value)
    }

    /// r^n ∏(|⟨α,x⟩| + r)^{2κ(α)}, the comparison profile for V_κ(x, r).
    pub fn volume_profile(&self, x: &[f64], r: f64) -> f64 {
        let mut v = r.powi(self.dim() as i32);
        for (a, k) in self.spec.roots.iter().zip(&self.spec.kappa) {
            let ip: f64 = a.iter().zip(x).map(|(p, q)| p * q).sum();
            v *= (ip.abs() + r).powf(2.0 * k);
        }
        v
    }

    pub fn mm_constant(&self, quad: &QuadSpec) -> Result<MmReport> {
        let n = self.dim();
        let radius = 12.0;
        let bb = AxisBox { lo: vec![-radius; n], hi: vec![radius; n] };
        let whole = Region::axis_box(&bb.lo, &bb.hi);
        let est = self.nested_integral(
            &|x: &[f64]| (-0.5 * x.iter().map(|v| v * v).sum::<f64>()).exp() * self.weight(x),
            &whole,
            &bb,
            &quad.clone().with_rel_tol(quad.rel_tol.min(1e-10)),
        );
        if !est.converged {
            return Err(Error::Accuracy(format!("Macdonald–Mehta quadrature did not converge: {est:?}")));
        }
        let chi = self.chi;
        let mut literal = (2.0 * std::f64::consts::PI).powf(n as f64 / 2.0);
        for k in &self.spec.kappa {
            literal *= specfun::gamma(k + chi + 1.0)? / specfun::gamma(chi + 1.0)?;
        }
        let per_component = match &self.product {
            Some(kap) => {
                let mut v = 1.0;
                for k in kap {
                    v *= rank_one_mm(*k)?;
                }
                Some(v)
            }
            None => None,
        };
        let rel = |a: f64| (a - est.value).abs() / est.value;
        Ok(MmReport {
            quadrature: est.value,
            error: est.error,
            per_component,
            literal_product: literal,
            agrees: per_component.map_or(false, |v| rel(v) < 1e-6),
            literal_agrees: rel(literal) < 1e-6,
        })
    }

    /// Density of ν_κ = 𝔠_κ⁻¹ e^{−|x|²/2} μ_κ; needs the product case.
    pub fn gaussian_density(&self, x: &[f64]) -> Result<f64> {
        let kap = self
            .product
            .as_ref()
            .ok_or_else(|| Error::Unsupported("Gaussian measure needs a ℤ₂ⁿ product root system".into()))?;
        let mut c = 1.0;
        for k in kap {
            c *= rank_one_mm(*k)?;
        }
        Ok((-0.5 * x.iter().map(|v| v * v).sum::<f64>()).exp() * self.weight(x) / c)
    }
}

/// ∫ (√2|x|)^{2κ} e^{−x²/2} dx = 2^{2κ+1/2} Γ(κ+1/2).
pub fn rank_one_mm(kappa: f64) -> Result<f64> {
    Ok(2f64.powf(2.0 * kappa + 0.5) * specfun::gamma(kappa + 0.5)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn quad() -> QuadSpec {
        QuadSpec::default().with_rel_tol(1e-10)
    }

    #[test]
    fn weight_examples() {
        let m = WeightedMeasure::new(RootSystemSpec::z2(0.5).unwrap());
        assert_relative_eq!(m.weight(&[1.0]), 2f64.sqrt(), max_relative = 1e-15);
        assert_eq!(m.weight(&[0.0]), 0.0);
        assert_eq!(WeightedMeasure::trivial(3).weight(&[0.3, -2.0, 5.0]), 1.0);
    }

    #[test]
    fn measure_examples() {
        let q = quad();
        let t1 = WeightedMeasure::trivial(1);
        assert_relative_eq!(t1.measure_of(&Region::interval(0.0, 1.0), &q).unwrap().value, 1.0);
        let z = WeightedMeasure::new(RootSystemSpec::z2(0.5).unwrap());
        assert_relative_eq!(
            z.measure_of(&Region::interval(0.0, 1.0), &q).unwrap().value,
            2f64.sqrt() / 2.0,
            max_relative = 1e-14
        );
        let t2 = WeightedMeasure::trivial(2);
        let disk = t2.measure_of(&Region::ball(&[0.0, 0.0], 1.0), &q).unwrap();
        assert_eq!(disk.method, MeasureMethod::Cubature);
        assert_relative_eq!(disk.value, std::f64::consts::PI, max_relative = 1e-8);
        assert!(matches!(
            t1.measure_of(&Region::half_space(&[1.0], 0.0), &q),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn predicate_measure_uses_qmc_in_2d() {
        let t2 = WeightedMeasure::trivial(2);
        let r = Region::from_predicate(
            2,
            AxisBox { lo: vec![-1.0, -1.0], hi: vec![1.0, 1.0] },
            |x: &[f64]| x[0] * x[0] + x[1] * x[1] < 1.0,
        );
        let est = t2.measure_of(&r, &QuadSpec::default()).unwrap();
        assert_eq!(est.method, MeasureMethod::QuasiMonteCarlo);
        assert!((est.value - std::f64::consts::PI).abs() < 5.0 * est.error + 1e-3);
    }

    #[test]
    fn ball_volume_examples() {
        let q = quad();
        assert_relative_eq!(WeightedMeasure::trivial(1).ball_volume(&[0.4], 0.7, &q).unwrap(), 1.4, max_relative = 1e-14);
        let z = WeightedMeasure::new(RootSystemSpec::z2(0.5).unwrap());
        assert_relative_eq!(z.ball_volume(&[0.0], 1.0, &q).unwrap(), 2f64.sqrt(), max_relative = 1e-14);
        assert_relative_eq!(
            WeightedMeasure::trivial(2).ball_volume(&[0.3, 0.1], 2.0, &q).unwrap(),
            4.0 * std::f64::consts::PI,
            max_relative = 1e-8
        );
    }

    #[test]
    fn pseudo_dist_examples() {
        let z = RootSystemSpec::z2(0.5).unwrap();
        assert_eq!(z.pseudo_dist(&[1.0], &[-1.0]), 0.0);
        let t = RootSystemSpec::trivial(2).unwrap();
        assert_relative_eq!(t.pseudo_dist(&[0.0, 0.0], &[3.0, 4.0]), 5.0);
    }

    #[test]
    fn mm_constants() {
        let q = quad();
        let t = WeightedMeasure::trivial(2).mm_constant(&q).unwrap();
        assert_relative_eq!(t.quadrature, 2.0 * std::f64::consts::PI, max_relative = 1e-9);
        assert!(t.agrees && t.literal_agrees);
        let z = WeightedMeasure::new(RootSystemSpec::z2(0.5).unwrap()).mm_constant(&q).unwrap();
        assert_relative_eq!(z.quadrature, 2.0 * 2f64.sqrt(), max_relative = 1e-9);
        assert!(z.agrees && z.literal_agrees);
        let zz = WeightedMeasure::new(RootSystemSpec::z2_product(&[0.5, 0.5]).unwrap()).mm_constant(&q).unwrap();
        assert_relative_eq!(zz.quadrature, 8.0, max_relative = 1e-8);
        assert!(zz.agrees);
        // the whole-system product formula does not factor for χ = 1
        assert_relative_eq!(zz.literal_product, 9.0 * std::f64::consts::PI.powi(2) / 8.0, max_relative = 1e-12);
        assert!(!zz.literal_agrees);
    }

    #[test]
    fn group_closure() {
        assert_eq!(RootSystemSpec::z2_product(&[0.5, 0.0, 1.0]).unwrap().group().len(), 8);
        // A2 in the plane: six elements
        let s3 = 3f64.sqrt();
        let a2 = RootSystemSpec::from_roots(2, vec![vec![1.0, 0.0], vec![0.5, s3 / 2.0], vec![-0.5, s3 / 2.0]], vec![1.0; 3])
            .unwrap();
        assert_eq!(a2.group().len(), 6);
        assert!(a2.product_kappas().is_none());
        // non-invariant multiplicity
        assert!(RootSystemSpec::from_roots(2, vec![vec![1.0, 0.0], vec![0.5, s3 / 2.0], vec![-0.5, s3 / 2.0]], vec![1.0, 2.0, 1.0])
            .is_err());
        // a lone non-crystallographic pair generates an infinite group
        assert!(matches!(
            RootSystemSpec::from_roots(2, vec![vec![1.0, 0.0], vec![1.0, 0.3]], vec![0.0, 0.0]),
            Err(Error::RootSystem(_))
        ));
        assert!(RootSystemConfig { dimension: 2, preset: Some(Preset::Z2), roots: None, multiplicity: vec![0.5] }
            .build()
            .is_err());
    }

    #[test]
    fn general_root_system_measure_matches_polar_integral() {
        // A1 embedded diagonally: w = |x - y|^{2κ}·... with α = (1,-1)
        let spec = RootSystemSpec::from_roots(2, vec![vec![1.0, -1.0]], vec![0.5]).unwrap();
        let m = WeightedMeasure::new(spec);
        let est = m.measure_of(&Region::axis_box(&[0.0, 0.0], &[1.0, 1.0]), &quad()).unwrap();
        // ∫∫_{[0,1]²} |x − y| dx dy = 1/3
        assert_relative_eq!(est.value, 1.0 / 3.0, max_relative = 1e-8);
    }

    proptest! {
        #[test]
        fn weight_is_invariant_and_homogeneous(x in prop::collection::vec(-3.0f64..3.0, 2),
            k0 in 0.0f64..1.5, k1 in 0.0f64..1.5, lam in 0.1f64..4.0) {
            let m = WeightedMeasure::new(RootSystemSpec::z2_product(&[k0, k1]).unwrap());
            let w = m.weight(&x);
            for g in m.spec().group() {
                let gx = m.spec().apply(g, &x);
                prop_assert!((m.weight(&gx) - w).abs() <= 1e-12 * w.max(1e-300));
            }
            let lx: Vec<f64> = x.iter().map(|v| lam * v).collect();
            prop_assert!((m.weight(&lx) - lam.powf(2.0 * m.chi()) * w).abs() <= 1e-12 * (w * lam.powf(2.0 * m.chi())).max(1e-300));
        }

        #[test]
        fn pseudo_dist_triangle(x in prop::collection::vec(-3.0f64..3.0, 2), y in prop::collection::vec(-3.0f64..3.0, 2),
            z in prop::collection::vec(-3.0f64..3.0, 2)) {
            let s = RootSystemSpec::z2_product(&[0.5, 1.0]).unwrap();
            let dxy = s.pseudo_dist(&x, &y);
            prop_assert!(dxy <= s.pseudo_dist(&x, &z) + s.pseudo_dist(&z, &y) + 1e-12);
            let e: f64 = x.iter().zip(&y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            prop_assert!(dxy <= e + 1e-12);
            for g in s.group() {
                prop_assert!((s.pseudo_dist(&s.apply(g, &x), &y) - dxy).abs() < 1e-12);
            }
        }

        #[test]
        fn measure_is_group_invariant(lo in prop::collection::vec(-2.0f64..1.0, 2), w in prop::collection::vec(0.1f64..1.5, 2)) {
            let m = WeightedMeasure::new(RootSystemSpec::z2_product(&[0.5, 0.25]).unwrap());
            let hi: Vec<f64> = lo.iter().zip(&w).map(|(a, b)| a + b).collect();
            let a = Region::axis_box(&lo, &hi);
            let q = QuadSpec::default();
            let base = m.measure_of(&a, &q).unwrap().value;
            for g in m.spec().group() {
                let ga = a.reflected(&m.spec().as_signs(g).unwrap());
                let v = m.measure_of(&ga, &q).unwrap().value;
                prop_assert!((v - base).abs() <= 2.0 * q.rel_tol * base);
            }
        }
    }
}
