//! Weierstrass functions, box-counting dimension and the inner-neighbourhood
//! power-law fit for boundary admissibility.

use kiddo::{ImmutableKdTree, SquaredEuclidean};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dunkl::WeightedMeasure;
use crate::error::{Error, Result};
use crate::quad::{qmc, QuadSpec};
use crate::region::{AxisBox, Region, Shape};

/// Truncated Weierstrass function Σ_{k=0}^{K} a^k cos(2π b^k x).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeierstrassSpec {
    pub a: f64,
    pub b: f64,
    pub terms: usize,
}

impl WeierstrassSpec {
    pub fn new(a: f64, b: f64, terms: usize) -> Result<Self> {
        let w = WeierstrassSpec { a, b, terms };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a > 0.0 && self.a < 1.0) || !(self.b > 1.0) || !(self.a * self.b > 1.0) || !self.b.is_finite() {
            return Err(Error::Precondition(format!(
                "weierstrass needs 0 < a < 1, b > 1, ab > 1; got a = {}, b = {}",
                self.a, self.b
            )));
        }
        if self.terms > 64 {
            return Err(Error::Precondition("at most 64 weierstrass terms".into()));
        }
        Ok(())
    }

    pub fn eval(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        let mut amp = 1.0;
        let mut freq = 1.0;
        for _ in 0..=self.terms {
            // reduce the phase before multiplying by 2π to keep it accurate
            acc += amp * (2.0 * std::f64::consts::PI * (freq * x).rem_euclid(1.0)).cos();
            amp *= self.a;
            freq *= self.b;
        }
        acc
    }

    /// Bound on the omitted tail Σ_{k>K} a^k.
    pub fn truncation_bound(&self) -> f64 {
        self.a.powi(self.terms as i32 + 1) / (1.0 - self.a)
    }

    /// Σ_{k≤K} a^k, an upper bound of |W|.
    pub fn sup_bound(&self) -> f64 {
        (1.0 - self.a.powi(self.terms as i32 + 1)) / (1.0 - self.a)
    }

    /// Graph dimension 2 + log_b a.
    pub fn graph_dimension(&self) -> f64 {
        2.0 + self.a.ln() / self.b.ln()
    }
}

/// Number of dyadic box scales δ_k = δ₀2^{−k}, k = 0..10.
pub const BOX_LEVELS: usize = 11;
/// Scales dropped from each end of the box-count fit.
pub const BOX_DROP: usize = 2;
/// Largest |residual| of a log-log fit still accepted as a power law.
pub const FIT_RESIDUAL_LIMIT: f64 = 0.1;
/// Curve sample spacing as a fraction of the smallest neighbourhood radius.
pub const CURVE_SPACING: f64 = 0.1;
/// Cap on the number of boundary samples held in the search tree.
pub const MAX_CURVE_SAMPLES: usize = 12_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleCount {
    pub delta: f64,
    pub count: u64,
    /// log N − fitted line; zero for scales outside the fit.
    pub residual: f64,
    pub fitted: bool,
    /// Box-based content proxy N(δ)·δ^σ at the fitted dimension σ.
    pub content: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxCountReport {
    pub dimension: f64,
    pub intercept: f64,
    pub max_residual: f64,
    pub scales: Vec<ScaleCount>,
}

/// Least-squares line y = a + b x; returns (a, b, std error of b, residuals).
fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64, Vec<f64>) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(u, v)| (u - mx) * (v - my)).sum();
    let b = sxy / sxx;
    let a = my - b * mx;
    let res: Vec<f64> = x.iter().zip(y).map(|(u, v)| v - a - b * u).collect();
    let dof = (n - 2.0).max(1.0);
    let se = (res.iter().map(|r| r * r).sum::<f64>() / dof / sxx).sqrt();
    (a, b, se, res)
}

fn check_window(window: &AxisBox, delta0: f64) -> Result<()> {
    if !(delta0 > 0.0) || !delta0.is_finite() {
        return Err(Error::Precondition(format!("box size must be positive, got {delta0}")));
    }
    if !window.is_bounded() || window.is_empty() {
        return Err(Error::Precondition("box counting needs a bounded nonempty window".into()));
    }
    Ok(())
}

fn deltas(delta0: f64) -> Vec<f64> {
    (0..BOX_LEVELS).map(|k| delta0 * 0.5f64.powi(k as i32)).collect()
}

fn fit_counts(deltas: &[f64], counts: &[u64]) -> Result<BoxCountReport> {
    let idx: Vec<usize> = (BOX_DROP..deltas.len() - BOX_DROP).filter(|&k| counts[k] > 0).collect();
    if idx.len() < 4 {
        return Err(Error::InsufficientScales(format!("{} usable box scales, need at least 4", idx.len())));
    }
    let x: Vec<f64> = idx.iter().map(|&k| (1.0 / deltas[k]).ln()).collect();
    let y: Vec<f64> = idx.iter().map(|&k| (counts[k] as f64).ln()).collect();
    let (a, b, _, res) = linear_fit(&x, &y);
    let scales = deltas
        .iter()
        .zip(counts)
        .enumerate()
        .map(|(k, (&delta, &count))| {
            let pos = idx.iter().position(|&j| j == k);
            ScaleCount {
                delta,
                count,
                residual: pos.map(|p| res[p]).unwrap_or(0.0),
                fitted: pos.is_some(),
                content: count as f64 * delta.powf(b),
            }
        })
        .collect();
    Ok(BoxCountReport {
        dimension: b,
        intercept: a,
        max_residual: res.iter().fold(0.0f64, |m, r| m.max(r.abs())),
        scales,
    })
}

/// Box-count dimension of a sampled point set inside `window`.
pub fn box_count_points(points: &[Vec<f64>], window: &AxisBox, delta0: f64) -> Result<BoxCountReport> {
    check_window(window, delta0)?;
    let ds = deltas(delta0);
    let counts: Vec<u64> = ds
        .par_iter()
        .map(|&d| {
            let mut keys: Vec<Vec<i64>> = points
                .iter()
                .filter(|p| p.iter().enumerate().all(|(k, v)| *v >= window.lo[k] && *v <= window.hi[k]))
                .map(|p| p.iter().enumerate().map(|(k, v)| ((v - window.lo[k]) / d).floor() as i64).collect())
                .collect();
            keys.sort_unstable();
            keys.dedup();
            keys.len() as u64
        })
        .collect();
    fit_counts(&ds, &counts)
}

/// Box-count dimension of the graph of a continuous function over the x-range
/// of a planar window.
///
/// Each column of width δ is filled between the sampled minimum and maximum
/// of f, sampled `per_box` times per smallest box width.
pub fn box_count_graph<F: Fn(f64) -> f64 + Sync>(
    f: F,
    window: &AxisBox,
    delta0: f64,
    per_box: usize,
) -> Result<BoxCountReport> {
    check_window(window, delta0)?;
    if window.dim() != 2 {
        return Err(Error::Precondition("graph box counting needs a planar window".into()));
    }
    if per_box < 4 {
        return Err(Error::Precondition("at least 4 samples per smallest box are required".into()));
    }
    let ds = deltas(delta0);
    let (x0, x1) = window.side(0);
    let (y0, y1) = window.side(1);
    let h = ds[BOX_LEVELS - 1] / per_box as f64;
    let m = ((x1 - x0) / h).ceil() as usize;
    let ys: Vec<f64> = (0..=m).into_par_iter().map(|i| f((x0 + i as f64 * h).min(x1))).collect();
    let counts: Vec<u64> = ds
        .par_iter()
        .map(|&d| {
            let cols = ((x1 - x0) / d).ceil() as usize;
            let rows = ((y1 - y0) / d).ceil() as i64;
            let mut total = 0u64;
            for c in 0..cols {
                let i0 = ((c as f64 * d) / h).floor() as usize;
                let i1 = ((((c + 1) as f64 * d) / h).ceil() as usize).min(m);
                let (lo, hi) = ys[i0..=i1].iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
                let r0 = (((lo - y0) / d).floor() as i64).max(0);
                let r1 = (((hi - y0) / d).floor() as i64).min(rows - 1);
                if r1 >= r0 {
                    total += (r1 - r0 + 1) as u64;
                }
            }
            total
        })
        .collect();
    fit_counts(&ds, &counts)
}

/// Box-count dimension of the Weierstrass graph over one period.
pub fn weierstrass_box_dimension(spec: &WeierstrassSpec, delta0: f64) -> Result<BoxCountReport> {
    spec.validate()?;
    let top = spec.sup_bound() + delta0;
    let window = AxisBox { lo: vec![0.0, -top], hi: vec![1.0, top] };
    box_count_graph(|x| spec.eval(x), &window, delta0, 8)
}

/// Geometric grid of `count` radii from `r_min` to `r_max`.
pub fn geometric_grid(r_min: f64, r_max: f64, count: usize) -> Vec<f64> {
    let q = (r_max / r_min).ln() / (count.max(2) - 1) as f64;
    (0..count.max(2)).map(|k| r_min * (k as f64 * q).exp()).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Admissibility {
    /// η > 2s₀ beyond the fit uncertainty.
    Admissible,
    NotAdmissible,
    /// η straddles 2s₀ within the fit uncertainty.
    Inconclusive,
    NotChecked,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeighbourhoodSample {
    pub r: f64,
    /// μ_κ({x ∈ Ω : d(x, Ωᶜ) ≤ r}).
    pub mu: f64,
    pub std_error: f64,
    /// Same with the vertical-distance proxy (a lower bound), when used.
    pub mu_proxy: Option<f64>,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryFit {
    pub eta: f64,
    pub c_star: f64,
    pub eta_std_error: f64,
    pub eta_proxy: Option<f64>,
    pub max_residual: f64,
    pub reliable: bool,
    pub s0: Option<f64>,
    pub admissibility: Admissibility,
    pub samples: Vec<NeighbourhoodSample>,
}

/// Distance to the complement of a tagged planar or linear domain.
enum Distance {
    Shape(Shape),
    Curve { tree: ImmutableKdTree<f64, 2>, spec: WeierstrassSpec, lower: [f64; 3] },
}

fn shape_distance(s: &Shape, x: &[f64]) -> Option<f64> {
    Some(match s {
        Shape::Empty => 0.0,
        Shape::Whole => f64::INFINITY,
        Shape::IntervalUnion(iv) => iv
            .iter()
            .filter(|[a, b]| x[0] > a.0 && x[0] < b.0)
            .map(|[a, b]| (x[0] - a.0).min(b.0 - x[0]))
            .fold(0.0, f64::max),
        Shape::AxisBox { lo, hi } => {
            let mut d = f64::INFINITY;
            for k in 0..x.len() {
                d = d.min(x[k] - lo[k].0).min(hi[k].0 - x[k]);
            }
            d.max(0.0)
        }
        Shape::Ball { center, radius } => {
            let r: f64 = x.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            (radius - r).max(0.0)
        }
        Shape::HalfSpace { normal, offset } => {
            let nn: f64 = normal.iter().map(|v| v * v).sum::<f64>().sqrt();
            ((x.iter().zip(normal).map(|(a, b)| a * b).sum::<f64>() - offset) / nn).max(0.0)
        }
        Shape::Intersection(v) => {
            let mut d = f64::INFINITY;
            for p in v {
                d = d.min(shape_distance(p, x)?);
            }
            d
        }
        _ => return None,
    })
}

fn parabola(lower: &[f64; 3], x: f64) -> f64 {
    lower[0] + lower[1] * x + lower[2] * x * x
}

/// Samples a curve x ↦ (x, f(x)) on [a, b] with consecutive points at most
/// `eps` apart.
fn sample_curve<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, eps: f64, keep: &dyn Fn(f64, f64) -> bool, out: &mut Vec<[f64; 2]>) -> Result<()> {
    let coarse = ((b - a) / eps).ceil().max(1.0) as usize;
    let h = (b - a) / coarse as f64;
    let mut prev = (a, f(a));
    if keep(prev.0, prev.1) {
        out.push([prev.0, prev.1]);
    }
    for i in 1..=coarse {
        let x = a + i as f64 * h;
        let y = f(x);
        let gap = ((y - prev.1).powi(2) + h * h).sqrt();
        let sub = (gap / eps).ceil().max(1.0) as usize;
        for j in 1..=sub {
            let xs = prev.0 + h * j as f64 / sub as f64;
            let ys = if j == sub { y } else { f(xs) };
            if keep(xs, ys) {
                out.push([xs, ys]);
            }
        }
        if out.len() > MAX_CURVE_SAMPLES {
            return Err(Error::Precondition("neighbourhood radii too small for the boundary sampling budget".into()));
        }
        prev = (x, y);
    }
    Ok(())
}

impl Distance {
    fn build(omega: &Region, r_min: f64) -> Result<Self> {
        let shape = omega
            .shape()
            .ok_or_else(|| Error::Precondition("the boundary fit needs a tagged domain".into()))?;
        if let Shape::WeierstrassDomain { weierstrass, lower } = shape {
            let bbox = omega.bbox().cloned().ok_or_else(|| Error::Precondition("unbounded domain".into()))?;
            let (x0, x1) = bbox.side(0);
            let eps = CURVE_SPACING * r_min;
            let mut pts = Vec::new();
            let w = weierstrass.clone();
            let low = *lower;
            sample_curve(&|x| w.eval(x), x0, x1, eps, &|x, y| y >= parabola(&low, x), &mut pts)?;
            sample_curve(&|x| parabola(&low, x), x0, x1, eps, &|x, y| y <= w.eval(x), &mut pts)?;
            if pts.is_empty() {
                return Err(Error::Precondition("empty weierstrass domain".into()));
            }
            return Ok(Distance::Curve { tree: ImmutableKdTree::new_from_slice(&pts), spec: w, lower: low });
        }
        let probe = vec![0.0; omega.dim()];
        shape_distance(shape, &probe)
            .ok_or_else(|| Error::Unsupported("distance to the complement is not available for this tag".into()))?;
        Ok(Distance::Shape(shape.clone()))
    }

    /// (distance, vertical proxy) for a point of Ω.
    fn eval(&self, x: &[f64]) -> (f64, Option<f64>) {
        match self {
            Distance::Shape(s) => (shape_distance(s, x).unwrap_or(0.0), None),
            Distance::Curve { tree, spec, lower } => {
                let nn = tree.nearest_one::<SquaredEuclidean>(&[x[0], x[1]]);
                let proxy = (spec.eval(x[0]) - x[1]).min(x[1] - parabola(lower, x[0]));
                (nn.distance.sqrt().min(proxy), Some(proxy))
            }
        }
    }
}

/// Inverse CDF of the density ∝ |x|^{2κ} on [lo, hi].
fn weighted_coordinate(kappa: f64, lo: f64, hi: f64, u: f64) -> f64 {
    if kappa == 0.0 {
        return lo + u * (hi - lo);
    }
    let e = 2.0 * kappa + 1.0;
    let prim = |x: f64| x.signum() * x.abs().powf(e);
    let t = prim(lo) + u * (prim(hi) - prim(lo));
    t.signum() * t.abs().powf(1.0 / e)
}

/// Fits μ_κ({x ∈ Ω : d(x, Ωᶜ) ≤ r}) ≈ c_* r^η over `r_grid`.
///
/// Points are drawn by randomized QMC over Ω's bounding box, proportional to
/// the weight for product root systems; distances use the pseudo-metric
/// min_g |gx − y|.
pub fn boundary_condition_fit(
    omega: &Region,
    measure: &WeightedMeasure,
    r_grid: &[f64],
    quad: &QuadSpec,
    s0: Option<f64>,
) -> Result<BoundaryFit> {
    let n = omega.dim();
    if measure.dim() != n {
        return Err(Error::Precondition("domain and measure dimensions differ".into()));
    }
    if !omega.is_bounded() {
        return Err(Error::Precondition("the boundary fit needs a bounded domain".into()));
    }
    if r_grid.len() < 4 || r_grid.iter().any(|&r| !(r > 0.0 && r <= 1.0)) {
        return Err(Error::InsufficientScales("the r-grid needs at least 4 radii in (0, 1]".into()));
    }
    let mut rs = r_grid.to_vec();
    rs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let bbox = omega.bbox().cloned().ok_or_else(|| Error::Precondition("domain without bounding box".into()))?;
    let dist = Distance::build(omega, rs[0])?;
    let spec = measure.spec();
    let kappas: Option<Vec<f64>> = measure.product_kappas().map(|k| k.to_vec());
    let total_weight = match &kappas {
        Some(k) => (0..n).map(|i| WeightedMeasure::weighted_length(k[i], bbox.lo[i], bbox.hi[i])).product::<f64>(),
        None => (0..n).map(|i| bbox.hi[i] - bbox.lo[i]).product::<f64>(),
    };
    let reps = 8;
    let per = (quad.mc_samples / reps).max(1);
    let has_proxy = matches!(dist, Distance::Curve { .. });
    let seqs = qmc::replicates(n, reps, quad.seed);
    let nr = rs.len();
    let means: Vec<(Vec<f64>, Vec<f64>)> = seqs
        .par_iter()
        .map(|seq| {
            let mut hit = vec![0.0; nr];
            let mut hit_proxy = vec![0.0; nr];
            let mut u = vec![0.0; n];
            let mut x = vec![0.0; n];
            for i in 0..per as u64 {
                seq.point(i, &mut u);
                let w = match &kappas {
                    Some(k) => {
                        for j in 0..n {
                            x[j] = weighted_coordinate(k[j], bbox.lo[j], bbox.hi[j], u[j]);
                        }
                        1.0
                    }
                    None => {
                        for j in 0..n {
                            x[j] = bbox.lo[j] + u[j] * (bbox.hi[j] - bbox.lo[j]);
                        }
                        measure.weight(&x)
                    }
                };
                if !omega.contains(&x) {
                    continue;
                }
                let mut d = f64::INFINITY;
                let mut proxy = None;
                for gx in spec.orbit(&x) {
                    if !omega.contains(&gx) {
                        d = 0.0;
                        break;
                    }
                    let (dg, pg) = dist.eval(&gx);
                    d = d.min(dg);
                    if let Some(p) = pg {
                        proxy = Some(proxy.map_or(p, |q: f64| q.min(p)));
                    }
                }
                for (k, &r) in rs.iter().enumerate() {
                    if d <= r {
                        hit[k] += w;
                    }
                    if proxy.is_some_and(|p| p <= r) {
                        hit_proxy[k] += w;
                    }
                }
            }
            let scale = total_weight / per as f64;
            (hit.iter().map(|h| h * scale).collect(), hit_proxy.iter().map(|h| h * scale).collect())
        })
        .collect();
    let avg = |k: usize, proxy: bool| -> (f64, f64) {
        let v: Vec<f64> = means.iter().map(|m| if proxy { m.1[k] } else { m.0[k] }).collect();
        let m = v.iter().sum::<f64>() / reps as f64;
        let var = v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (reps as f64 - 1.0);
        (m, (var / reps as f64).sqrt())
    };
    let mu: Vec<(f64, f64)> = (0..nr).map(|k| avg(k, false)).collect();
    if mu.iter().any(|m| !(m.0 > 0.0)) {
        return Err(Error::Accuracy("empty neighbourhood estimate; raise the sample budget or the radii".into()));
    }
    let lx: Vec<f64> = rs.iter().map(|r| r.ln()).collect();
    let ly: Vec<f64> = mu.iter().map(|m| m.0.ln()).collect();
    let (a, eta, se, res) = linear_fit(&lx, &ly);
    let eta_proxy = if has_proxy {
        let py: Vec<f64> = (0..nr).map(|k| avg(k, true).0).collect();
        if py.iter().all(|&v| v > 0.0) {
            Some(linear_fit(&lx, &py.iter().map(|v| v.ln()).collect::<Vec<_>>()).1)
        } else {
            None
        }
    } else {
        None
    };
    let max_residual = res.iter().fold(0.0f64, |m, r| m.max(r.abs()));
    let admissibility = match s0 {
        None => Admissibility::NotChecked,
        Some(s0) => {
            let margin = (2.0 * se).max(0.02);
            if eta - 2.0 * s0 > margin {
                Admissibility::Admissible
            } else if 2.0 * s0 - eta > margin {
                Admissibility::NotAdmissible
            } else {
                Admissibility::Inconclusive
            }
        }
    };
    let samples = rs
        .iter()
        .enumerate()
        .map(|(k, &r)| NeighbourhoodSample {
            r,
            mu: mu[k].0,
            std_error: mu[k].1,
            mu_proxy: if has_proxy { Some(avg(k, true).0) } else { None },
            residual: res[k],
        })
        .collect();
    Ok(BoundaryFit {
        eta,
        c_star: a.exp(),
        eta_std_error: se,
        eta_proxy,
        max_residual,
        reliable: max_residual <= FIT_RESIDUAL_LIMIT,
        s0,
        admissibility,
        samples,
    })
}

/// The planar domain between the Weierstrass graph and x ↦ x² − 3/2.
pub fn weierstrass_domain(spec: WeierstrassSpec) -> Result<Region> {
    Region::tagged(2, Shape::WeierstrassDomain { weierstrass: spec, lower: [-1.5, 0.0, 1.0] })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dunkl::RootSystemSpec;
    use approx::assert_relative_eq;

    #[test]
    fn weierstrass_values() {
        let w = WeierstrassSpec::new(0.5, 3.0, 40).unwrap();
        assert_relative_eq!(w.eval(0.0), w.sup_bound(), max_relative = 1e-15);
        assert_relative_eq!(w.eval(0.0), 2.0, max_relative = 1e-11);
        assert_relative_eq!(w.eval(0.5), -w.sup_bound(), max_relative = 1e-9);
        for &x in &[0.1, 0.37, 0.9] {
            assert!((w.eval(x + 1.0) - w.eval(x)).abs() < 1e-9);
        }
        assert!(WeierstrassSpec::new(0.2, 3.0, 10).is_err());
        assert_relative_eq!(w.graph_dimension(), 2.0 - 2f64.ln() / 3f64.ln(), max_relative = 1e-15);
    }

    #[test]
    fn segment_and_square_boundary() {
        let win = AxisBox { lo: vec![-0.1, -0.1], hi: vec![1.1, 1.1] };
        let seg: Vec<Vec<f64>> = (0..=40_000).map(|i| i as f64 / 40_000.0).map(|t| vec![t, 0.3 + 0.4 * t]).collect();
        let d = box_count_points(&seg, &win, 0.15).unwrap().dimension;
        assert!((d - 1.0).abs() < 0.05, "{d}");
        let mut sq = Vec::new();
        for i in 0..=40_000 {
            let t = i as f64 / 40_000.0;
            sq.extend([vec![t, 0.0], vec![t, 1.0], vec![0.0, t], vec![1.0, t]]);
        }
        let d = box_count_points(&sq, &win, 0.15).unwrap().dimension;
        assert!((d - 1.0).abs() < 0.05, "{d}");
    }

    #[test]
    fn smooth_graph_is_phase_independent() {
        let f = |x: f64| 0.3 * (3.0 * x).sin();
        for shift in [0.0, 0.5] {
            let d0 = 0.125;
            let off = shift * d0 * 0.5f64.powi(BOX_LEVELS as i32 - 1);
            let win = AxisBox { lo: vec![0.0, -0.5 + off], hi: vec![1.0, 0.5 + off] };
            let d = box_count_graph(f, &win, d0, 8).unwrap().dimension;
            assert!((d - 1.0).abs() < 0.05, "{d}");
        }
    }

    #[test]
    fn weierstrass_graph_dimension() {
        let w = WeierstrassSpec::new(0.5, 3.0, 14).unwrap();
        let rep = weierstrass_box_dimension(&w, 0.125).unwrap();
        assert!((rep.dimension - w.graph_dimension()).abs() < 0.15, "{rep:?}");
    }

    #[test]
    fn too_few_scales() {
        let win = AxisBox { lo: vec![0.0], hi: vec![1.0] };
        assert!(matches!(box_count_points(&[], &win, 0.1), Err(Error::InsufficientScales(_))));
    }

    #[test]
    fn interval_and_disk_neighbourhoods() {
        let q = QuadSpec::default().with_mc_samples(1 << 16);
        let grid = geometric_grid(0.005, 0.2, 8);
        let fit = boundary_condition_fit(&Region::interval(-1.0, 1.0), &WeightedMeasure::trivial(1), &grid, &q, Some(0.2))
            .unwrap();
        assert!((fit.eta - 1.0).abs() < 0.05, "{fit:?}");
        assert!((fit.c_star - 2.0).abs() < 0.1, "{fit:?}");
        assert_eq!(fit.admissibility, Admissibility::Admissible);
        assert!(fit.samples.windows(2).all(|w| w[0].mu <= w[1].mu));
        let disk = Region::ball(&[0.0, 0.0], 1.0);
        let fit = boundary_condition_fit(&disk, &WeightedMeasure::trivial(2), &grid, &q, None).unwrap();
        assert!((fit.eta - 1.0).abs() < 0.1, "{fit:?}");
        assert_eq!(fit.admissibility, Admissibility::NotChecked);
    }

    #[test]
    fn weighted_interval_neighbourhood() {
        // μ(D_r) = 2∫_{1−r}^1 (√2 x)^{2κ} dx for Ω = (−1, 1), κ = 1/2
        let q = QuadSpec::default().with_mc_samples(1 << 16);
        let m = WeightedMeasure::new(RootSystemSpec::z2(0.5).unwrap());
        let grid = geometric_grid(0.01, 0.2, 6);
        let omega = Region::interval(-1.0, 1.0);
        let fit = boundary_condition_fit(&omega, &m, &grid, &q, Some(0.45)).unwrap();
        for s in &fit.samples {
            let exact = 2.0 * WeightedMeasure::weighted_length(0.5, 1.0 - s.r, 1.0);
            assert_relative_eq!(s.mu, exact, max_relative = 0.02);
        }
        assert_eq!(fit.admissibility, Admissibility::Admissible);
        // a threshold at the fitted exponent itself cannot be decided
        let edge = boundary_condition_fit(&omega, &m, &grid, &q, Some(fit.eta / 2.0)).unwrap();
        assert_eq!(edge.admissibility, Admissibility::Inconclusive);
    }

    #[test]
    fn weierstrass_domain_exponent() {
        let w = WeierstrassSpec::new(0.5, 3.0, 8).unwrap();
        let omega = weierstrass_domain(w).unwrap();
        let q = QuadSpec::default().with_mc_samples(1 << 17);
        let fit = boundary_condition_fit(&omega, &WeightedMeasure::trivial(2), &geometric_grid(0.003, 0.1, 8), &q, Some(0.2))
            .unwrap();
        let target = 2f64.ln() / 3f64.ln();
        assert!((fit.eta - target).abs() < 0.15, "{fit:?}");
        assert!(fit.eta_proxy.is_some());
    }
}
