//! Heat kernels of the classical Laplacian and of the ℤ₂ⁿ-product Dunkl
//! Laplacian, the semigroup P_t, and numeric checks of kernel estimates.

mod pairs;
mod rank1;

pub use pairs::{gaussian_pair, window_radius, WINDOW_C, WINDOW_TOL};
pub use rank1::{Rank1, JACOBI_MAX_Z};

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dunkl::WeightedMeasure;
use crate::error::{Error, Result};
use crate::extrap::polyfit;
use crate::field::{ScalarField, Support};
use crate::quad::{self, Level, QuadSpec};
use crate::region::{intersect_intervals, normalize, BoxSet, Interval, Region};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelKind {
    ClassicalGaussian,
    DunklZ2Product,
}

/// p_t^κ for a root system whose kernel factors over coordinates.
#[derive(Debug, Clone)]
pub struct HeatKernel {
    measure: WeightedMeasure,
    kind: KernelKind,
    coords: Vec<Rank1>,
}

impl HeatKernel {
    pub fn new(measure: WeightedMeasure) -> Result<Self> {
        let kap = measure.product_kappas().ok_or_else(|| {
            Error::Unsupported("explicit heat kernels exist only for ℤ₂ⁿ product root systems".into())
        })?;
        let coords = kap.iter().map(|&k| Rank1::new(k)).collect::<Result<Vec<_>>>()?;
        let kind = if measure.chi() == 0.0 { KernelKind::ClassicalGaussian } else { KernelKind::DunklZ2Product };
        Ok(HeatKernel { measure, kind, coords })
    }

    pub fn classical(n: usize) -> Self {
        Self::new(WeightedMeasure::trivial(n)).unwrap()
    }

    pub fn measure(&self) -> &WeightedMeasure {
        &self.measure
    }

    pub fn kind(&self) -> KernelKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coord(&self, i: usize) -> &Rank1 {
        &self.coords[i]
    }

    pub fn eval(&self, t: f64, x: &[f64], y: &[f64]) -> Result<f64> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::Domain(format!("heat kernel needs t > 0, got {t}")));
        }
        if x.len() != self.dim() || y.len() != self.dim() {
            return Err(Error::Precondition("point dimension mismatch".into()));
        }
        Ok(self.eval_unchecked(t, x, y))
    }

    pub fn eval_unchecked(&self, t: f64, x: &[f64], y: &[f64]) -> f64 {
        self.coords.iter().enumerate().map(|(i, c)| c.eval(t, x[i], y[i])).product()
    }

    /// P_t 1_B(x) for a box set B.
    pub fn box_mass(&self, t: f64, x: &[f64], b: &BoxSet) -> f64 {
        b.boxes
            .iter()
            .map(|bx| (0..self.dim()).map(|i| self.coords[i].mass_in(t, x[i], bx.lo[i], bx.hi[i])).product::<f64>())
            .sum()
    }

    /// ∫_A P_t 1_B dμ_κ for box sets, as a sum of products of 1-D pair
    /// integrals.
    pub fn box_pair(&self, t: f64, a: &BoxSet, b: &BoxSet, rel_tol: f64) -> Result<f64> {
        let mut memo: HashMap<(usize, [u64; 4]), f64> = HashMap::new();
        let mut total = 0.0;
        for ba in &a.boxes {
            for bb in &b.boxes {
                let mut prod = 1.0;
                for i in 0..self.dim() {
                    let key = (i, [ba.lo[i].to_bits(), ba.hi[i].to_bits(), bb.lo[i].to_bits(), bb.hi[i].to_bits()]);
                    let v = match memo.get(&key) {
                        Some(v) => *v,
                        None => {
                            let v = self.coords[i].pair(t, ba.side(i), bb.side(i), rel_tol)?;
                            memo.insert(key, v);
                            v
                        }
                    };
                    prod *= v;
                    if prod == 0.0 {
                        break;
                    }
                }
                total += prod;
            }
        }
        Ok(total)
    }

    /// Truncation window of coordinate i around x_i (and its mirror image
    /// for weighted coordinates).
    pub fn window(&self, t: f64, i: usize, xi: f64) -> Vec<Interval> {
        self.coords[i].window(t, xi)
    }

    /// P_t f(x) = ∫ f(y) p_t(x,y) dμ_κ(y).
    pub fn semigroup_apply(&self, f: &ScalarField, t: f64, x: &[f64], quad: &QuadSpec) -> Result<f64> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::Domain(format!("semigroup needs t > 0, got {t}")));
        }
        let n = self.dim();
        if f.dim() != n || x.len() != n {
            return Err(Error::Precondition("field, point and kernel dimensions differ".into()));
        }
        if let Some(c) = f.as_constant() {
            if c == 0.0 {
                return Ok(0.0);
            }
            let whole = BoxSet::whole(n);
            return Ok(c * self.box_mass(t, x, &whole));
        }
        if let Some(r) = f.indicator_region() {
            if let Some(cells) = r.box_cells() {
                return Ok(self.box_mass(t, x, &cells));
            }
            return self.region_mass(t, x, r, quad);
        }
        let support = match f.support() {
            Support::Empty => return Ok(0.0),
            Support::Unbounded => {
                return Err(Error::Unsupported("semigroup of a field with unbounded support and no decay".into()))
            }
            Support::Bounded(b) | Support::Decaying(b) => b,
        };
        let est = quad::nested(
            &|y: &[f64]| {
                let v = f.eval(y);
                if v == 0.0 {
                    0.0
                } else {
                    v * self.eval_unchecked(t, x, y) * self.measure.weight(y)
                }
            },
            n,
            &|k, _prefix: &[f64]| {
                let iv = intersect_intervals(&self.window(t, k, x[k]), &[support.side(k)]);
                let mut br = f.kinks(k);
                br.extend([0.0, x[k], -x[k]]);
                Level { intervals: iv, breaks: br }
            },
            quad.rel_tol,
            1e-300,
            quad.max_evals,
        );
        Ok(est.value)
    }

    /// P_t 1_R(x) for a tagged region through nested cubature with exact
    /// line intersections.
    pub fn region_mass(&self, t: f64, x: &[f64], region: &Region, quad: &QuadSpec) -> Result<f64> {
        let n = self.dim();
        if let Some(cells) = region.box_cells() {
            return Ok(self.box_mass(t, x, &cells));
        }
        let mut dir = vec![0.0; n];
        dir[n - 1] = 1.0;
        if region.line_intervals(x, &dir).is_none() {
            return Err(Error::Unsupported("heat mass of a region without line intersections".into()));
        }
        let est = quad::nested(
            &|y: &[f64]| self.eval_unchecked(t, x, y) * self.measure.weight(y),
            n,
            &|k, prefix: &[f64]| {
                let win = self.window(t, k, x[k]);
                let iv = if k + 1 == n {
                    let mut o = prefix.to_vec();
                    o.push(0.0);
                    let line = region.line_intervals(&o, &dir).unwrap_or_default();
                    intersect_intervals(&win, &line)
                } else {
                    match region.bbox() {
                        Some(bb) => intersect_intervals(&win, &[bb.side(k)]),
                        None => win,
                    }
                };
                Level { intervals: iv, breaks: vec![0.0, x[k], -x[k]] }
            },
            quad.rel_tol,
            1e-300,
            quad.max_evals,
        );
        Ok(est.value)
    }

    /// Maximal deviation of ∫ p_t(x, ·) dμ_κ from 1, computed by quadrature
    /// in every coordinate.
    pub fn completeness_check(&self, t_grid: &[f64], xs: &[Vec<f64>]) -> Result<CompletenessReport> {
        let mut report = CompletenessReport { max_deviation: 0.0, worst_t: f64::NAN, worst_x: vec![] };
        for &t in t_grid {
            if !(t > 0.0) {
                return Err(Error::Domain(format!("t must be positive, got {t}")));
            }
            for x in xs {
                let mass: f64 = (0..self.dim())
                    .map(|i| {
                        self.coords[i].mass_in_numeric(t, x[i], f64::NEG_INFINITY, f64::INFINITY, 1e-13).value
                    })
                    .product();
                let dev = (mass - 1.0).abs();
                if !(dev <= report.max_deviation) {
                    report = CompletenessReport { max_deviation: dev, worst_t: t, worst_x: x.clone() };
                }
            }
        }
        Ok(report)
    }

    /// Relative defect |∫ p_s(x,u) p_t(u,y) dμ(u) − p_{s+t}(x,y)| / p_{s+t}(x,y).
    pub fn semigroup_defect(&self, s: f64, t: f64, x: &[f64], y: &[f64]) -> Result<f64> {
        if !(s > 0.0 && t > 0.0) {
            return Err(Error::Domain("semigroup times must be positive".into()));
        }
        let n = self.dim();
        let est = quad::nested(
            &|u: &[f64]| self.eval_unchecked(s, x, u) * self.eval_unchecked(t, u, y) * self.measure.weight(u),
            n,
            &|k, _p: &[f64]| {
                let iv = intersect_intervals(&self.window(s, k, x[k]), &self.window(t, k, y[k]));
                Level { intervals: iv, breaks: vec![0.0, x[k], -x[k], y[k], -y[k]] }
            },
            1e-11,
            1e-300,
            400_000,
        );
        let exact = self.eval_unchecked(s + t, x, y);
        Ok((est.value - exact).abs() / exact)
    }

    /// Slope of log(|P_t f_t(0)| / ‖f_t‖_p) against log t with
    /// f_t(y) = f(y/√t); the √t-dilation makes the slope −(χ + n/2)/p.
    pub fn ultracontractivity_exponent(
        &self,
        f: &ScalarField,
        p: f64,
        t_grid: &[f64],
        quad: &QuadSpec,
    ) -> Result<UltraFit> {
        if !(p >= 1.0) || !p.is_finite() {
            return Err(Error::Domain(format!("p must lie in [1, ∞), got {p}")));
        }
        if t_grid.len() < 2 {
            return Err(Error::Precondition("need at least two times".into()));
        }
        let origin = vec![0.0; self.dim()];
        let mut lx = Vec::new();
        let mut ly = Vec::new();
        for &t in t_grid {
            let ft = f.dilated(t.sqrt())?;
            let v = self.semigroup_apply(&ft, t, &origin, quad)?;
            if !(v.abs() >= 1e-300) {
                return Err(Error::Underflow(format!("|P_t f(0)| = {v:e} at t = {t}")));
            }
            let norm = ft.lp_norm_pow(p, &self.measure, quad)?.powf(1.0 / p);
            lx.push(t.ln());
            ly.push((v.abs() / norm).ln());
        }
        let (coef, residual) = polyfit(&lx, &ly, 1)?;
        Ok(UltraFit {
            slope: coef[1],
            expected: -(self.measure.chi() + self.dim() as f64 / 2.0) / p,
            residual,
        })
    }

    /// V_κ(x, r) in closed form for n = 1, by cubature otherwise.
    pub fn volume(&self, x: &[f64], r: f64) -> Result<f64> {
        if self.dim() == 1 {
            let k = self.coords[0].kappa();
            return Ok(WeightedMeasure::weighted_length(k, x[0] - r, x[0] + r));
        }
        self.measure.ball_volume(x, r, &QuadSpec::default().with_rel_tol(1e-7))
    }

    /// p_t(x,y)·max(V(x,√t), V(y,√t))·e^{c₂ d(x,y)²/t}; the Gaussian-type
    /// upper bound asserts this is at most c₁.
    pub fn gaussian_bound_ratio(&self, t: f64, x: &[f64], y: &[f64], c2: f64) -> Result<f64> {
        let v = self.volume(x, t.sqrt())?.max(self.volume(y, t.sqrt())?);
        let d = self.measure.spec().pseudo_dist(x, y);
        Ok(self.eval(t, x, y)? * v * (c2 * d * d / t).exp())
    }

    /// Right side of the kernel regularity estimate with constants `c`.
    pub fn regularity_rhs(&self, c: &RegularityConstants, t: f64, x: &[f64], y: &[f64], z: &[f64]) -> Result<f64> {
        let n = self.dim() as f64;
        let dxy: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        let dxz = self.measure.spec().pseudo_dist(x, z);
        let v = self.volume(x, (2.0 * t).sqrt())?;
        Ok(c.c1 * dxy * (1.0 + dxy / (2.0 * t).sqrt()).powf(n + 2.0 * self.measure.chi())
            * (dxy * dxy / (c.c2 * t)).exp()
            / (t.sqrt() * v)
            * (-c.c3 * dxz * dxz / t).exp())
    }

    /// |p_t(x,z) − p_t(y,z)| divided by the regularity bound.
    pub fn kernel_regularity_probe(
        &self,
        c: &RegularityConstants,
        t: f64,
        x: &[f64],
        y: &[f64],
        z: &[f64],
    ) -> Result<f64> {
        let lhs = (self.eval(t, x, z)? - self.eval(t, y, z)?).abs();
        if lhs == 0.0 {
            return Ok(0.0);
        }
        Ok(lhs / self.regularity_rhs(c, t, x, y, z)?)
    }

    /// Fits c₁ of the regularity estimate over a random sweep with c₂, c₃
    /// fixed; a safety factor covers points not seen in the sweep.
    pub fn calibrate_regularity(&self, samples: usize, seed: u64) -> Result<RegularityConstants> {
        let base = RegularityConstants { c1: 1.0, c2: 1.0, c3: 0.125 };
        let mut worst: f64 = 0.0;
        for (t, x, y, z) in random_triples(self.dim(), samples, seed) {
            let r = self.kernel_regularity_probe(&base, t, &x, &y, &z)?;
            worst = worst.max(r);
        }
        Ok(RegularityConstants { c1: REGULARITY_SAFETY * worst, ..base })
    }

    /// Fits c₁ of the Gaussian-type bound with c₂ = 1/8.
    pub fn calibrate_gaussian_bound(&self, samples: usize, seed: u64) -> Result<(f64, f64)> {
        let c2 = 0.125;
        let mut worst: f64 = 0.0;
        for (t, x, y, _) in random_triples(self.dim(), samples, seed) {
            worst = worst.max(self.gaussian_bound_ratio(t, &x, &y, c2)?);
        }
        Ok((REGULARITY_SAFETY * worst, c2))
    }
}

/// Margin applied to empirically fitted constants.
pub const REGULARITY_SAFETY: f64 = 4.0;

/// Random (t, x, y, z) with t log-uniform in [1e-2, 1e2] and points in
/// [-3, 3]ⁿ; y is drawn near x half of the time.
pub fn random_triples(n: usize, count: usize, seed: u64) -> Vec<(f64, Vec<f64>, Vec<f64>, Vec<f64>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let t = 10f64.powf(rng.gen_range(-2.0..2.0));
            let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let y: Vec<f64> = if rng.gen_bool(0.5) {
                x.iter().map(|v| v + rng.gen_range(-0.1..0.1) * t.sqrt()).collect()
            } else {
                (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect()
            };
            let z: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
            (t, x, y, z)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletenessReport {
    pub max_deviation: f64,
    pub worst_t: f64,
    pub worst_x: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UltraFit {
    pub slope: f64,
    pub expected: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegularityConstants {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
}

/// Windows of all coordinates merged, used by callers that integrate over
/// P_t-weighted neighbourhoods.
pub fn merged_window(k: &HeatKernel, t: f64, i: usize, points: &[f64]) -> Vec<Interval> {
    normalize(points.iter().flat_map(|&p| k.window(t, i, p)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dunkl::RootSystemSpec;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::Rng;

    fn z2(k: f64) -> HeatKernel {
        HeatKernel::new(WeightedMeasure::new(RootSystemSpec::z2(k).unwrap())).unwrap()
    }

    #[test]
    fn kernel_examples() {
        let c = HeatKernel::classical(1);
        assert_relative_eq!(c.eval(1.0 / (4.0 * std::f64::consts::PI), &[0.2], &[0.2]).unwrap(), 1.0);
        assert_relative_eq!(
            c.eval(0.25, &[0.0], &[1.0]).unwrap(),
            0.207_553_748_710_297_8,
            max_relative = 1e-12
        );
        assert!(matches!(c.eval(0.0, &[0.0], &[0.0]), Err(Error::Domain(_))));
        let d = z2(0.5);
        assert_relative_eq!(
            d.eval(1.0, &[1.0], &[0.0]).unwrap(),
            d.coord(0).eval_bessel(1.0, 1.0, 0.0),
            max_relative = 1e-8
        );
        // at y = 0 only the Gaussian factor survives: (2√2)⁻¹(2)^{-1} e^{-1/4}
        assert_relative_eq!(
            d.eval(1.0, &[1.0], &[0.0]).unwrap(),
            (-0.25f64).exp() / (4.0 * 2f64.sqrt()),
            max_relative = 1e-12
        );
    }

    #[test]
    fn completeness() {
        let c = HeatKernel::classical(1);
        let r = c.completeness_check(&[0.1, 1.0, 10.0], &[vec![0.0], vec![1.5]]).unwrap();
        assert!(r.max_deviation < 1e-8);
        for &k in &[0.25, 0.5, 1.0] {
            let r = z2(k).completeness_check(&[0.1, 1.0, 10.0], &[vec![0.0], vec![0.7], vec![-3.0]]).unwrap();
            assert!(r.max_deviation < 1e-6, "κ = {k}: {r:?}");
        }
        let zz = HeatKernel::new(WeightedMeasure::new(RootSystemSpec::z2_product(&[0.5, 0.5]).unwrap())).unwrap();
        let r = zz.completeness_check(&[1.0], &[vec![0.3, -1.0]]).unwrap();
        assert!(r.max_deviation < 1e-5);
    }

    #[test]
    fn semigroup_apply_examples() {
        let q = QuadSpec::default().with_rel_tol(1e-10);
        let c = HeatKernel::classical(1);
        let one = ScalarField::constant(1, 1.0);
        assert_relative_eq!(c.semigroup_apply(&one, 0.3, &[0.5], &q).unwrap(), 1.0, max_relative = 1e-12);
        assert_relative_eq!(z2(0.5).semigroup_apply(&one, 0.3, &[0.5], &q).unwrap(), 1.0, max_relative = 1e-9);
        // e^{-y²} = Gaussian with width 1/√2
        let g = ScalarField::gaussian(&[0.0], std::f64::consts::FRAC_1_SQRT_2, 1.0).unwrap();
        for &(t, x) in &[(0.1f64, 0.3f64), (1.0, -1.0), (5.0, 2.0)] {
            let exact = (1.0f64 + 4.0 * t).powf(-0.5) * (-x * x / (1.0 + 4.0 * t)).exp();
            assert_relative_eq!(c.semigroup_apply(&g, t, &[x], &q).unwrap(), exact, max_relative = 1e-8);
        }
        let tent = ScalarField::tent(&[0.0], 1.0, 1.0).unwrap();
        let v = c.semigroup_apply(&tent, 1e-4, &[0.4], &q).unwrap();
        assert!((v - 0.6).abs() < 1e-2);
        assert!(matches!(
            c.semigroup_apply(&ScalarField::indicator(&Region::half_space(&[1.0], 0.0)).unwrap(), 1.0, &[0.0], &q),
            Ok(v) if (v - 0.5).abs() < 1e-14
        ));
    }

    #[test]
    fn disk_mass_in_the_plane() {
        let c = HeatKernel::classical(2);
        let q = QuadSpec::default().with_rel_tol(1e-9);
        // P(|B_{2t}| < 1) for a centered 2-D Gaussian of variance 2t per axis
        let t = 0.2;
        let v = c.region_mass(t, &[0.0, 0.0], &Region::ball(&[0.0, 0.0], 1.0), &q).unwrap();
        assert_relative_eq!(v, 1.0 - (-1.0 / (4.0 * t)).exp(), max_relative = 1e-7);
    }

    #[test]
    fn semigroup_property() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for kern in [HeatKernel::classical(1), z2(0.5), z2(1.0)] {
            for _ in 0..5 {
                let s = rng.gen_range(0.05..2.0);
                let t = rng.gen_range(0.05..2.0);
                let x = [rng.gen_range(-2.0..2.0)];
                let y = [rng.gen_range(-2.0..2.0)];
                assert!(kern.semigroup_defect(s, t, &x, &y).unwrap() < 1e-5);
            }
        }
    }

    #[test]
    fn ultracontractivity_slopes() {
        let q = QuadSpec::default().with_rel_tol(1e-9);
        let grid = [1.0, 10.0, 100.0, 1000.0];
        let f1 = ScalarField::tent(&[0.3], 0.5, 1.0).unwrap();
        let fit = HeatKernel::classical(1).ultracontractivity_exponent(&f1, 1.0, &grid, &q).unwrap();
        assert!((fit.slope + 0.5).abs() < 0.05, "{fit:?}");
        let fit = z2(0.5).ultracontractivity_exponent(&f1, 1.0, &grid, &q).unwrap();
        assert!((fit.slope + 1.0).abs() < 0.05, "{fit:?}");
        let f2 = ScalarField::tent(&[0.3, -0.2], 0.5, 1.0).unwrap();
        let fit = HeatKernel::classical(2).ultracontractivity_exponent(&f2, 2.0, &grid, &q).unwrap();
        assert!((fit.slope + 0.5).abs() < 0.05, "{fit:?}");
    }

    #[test]
    fn regularity_and_gaussian_bounds() {
        for kern in [HeatKernel::classical(1), z2(0.5)] {
            let c = kern.calibrate_regularity(400, 11).unwrap();
            assert_eq!(kern.kernel_regularity_probe(&c, 0.5, &[0.3], &[0.3], &[1.0]).unwrap(), 0.0);
            for (t, x, y, z) in random_triples(1, 200, 12) {
                assert!(kern.kernel_regularity_probe(&c, t, &x, &y, &z).unwrap() <= 1.0);
            }
            let (c1, c2) = kern.calibrate_gaussian_bound(400, 13).unwrap();
            for (t, x, y, _) in random_triples(1, 200, 14) {
                assert!(kern.gaussian_bound_ratio(t, &x, &y, c2).unwrap() <= c1);
            }
        }
    }

    proptest! {
        #[test]
        fn symmetry_positivity_invariance(t in 0.01f64..10.0, x in -4.0f64..4.0, y in -4.0f64..4.0, k in 0.0f64..2.0) {
            let kern = z2(k);
            let a = kern.eval(t, &[x], &[y]).unwrap();
            let b = kern.eval(t, &[y], &[x]).unwrap();
            prop_assert!(a > 0.0);
            prop_assert!((a - b).abs() <= 1e-10 * a);
            let c = kern.eval(t, &[-x], &[-y]).unwrap();
            prop_assert!((a - c).abs() <= 1e-10 * a);
        }

        #[test]
        fn sub_markov(t in 0.01f64..10.0, x in -3.0f64..3.0, lo in -3.0f64..1.0, w in 0.01f64..3.0) {
            let kern = z2(0.5);
            let b = BoxSet { dim: 1, boxes: vec![crate::region::AxisBox { lo: vec![lo], hi: vec![lo + w] }] };
            let v = kern.box_mass(t, &[x], &b);
            prop_assert!(v >= 0.0 && v <= 1.0 + 1e-8);
        }
    }
}
