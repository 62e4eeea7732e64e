//! Weighted perimeter with kernel |x−y|^{−(2χ+n+2s)} against the
//! probability measure ν_κ = 𝔠_κ^{−1}e^{−|x|²/2}μ_κ.
//!
//! Each L̃ term is written by subordination as
//! 4^{−m/2}/Γ(m/2) ∫₀^∞ t^{−1−m/2} G(t) dt, m = 2χ+n+2s, with
//! G(t) = ∬_{A×B} e^{−|x−y|²/4t} dν dν factorized over coordinates.

use serde::{Deserialize, Serialize};

use super::{box_cells, check_s, decomposition};
use crate::dunkl::WeightedMeasure;
use crate::error::{Error, Result};
use crate::heat::window_radius;
use crate::quad::{self, QuadSpec};
use crate::region::{intersect_intervals, BoxSet, Interval, Region};
use crate::specfun::gamma;
use crate::timeint::{ProfileSpec, TimeProfile};

/// |x| beyond which the Gaussian factor is below 1e-18.
const GAUSS_REACH: f64 = 9.2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedPerimeter {
    pub s: f64,
    pub value: f64,
    pub terms: [f64; 3],
    pub divergent: bool,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedTrend {
    pub s: Vec<f64>,
    pub values: Vec<f64>,
    pub s_times: Vec<f64>,
    /// s·value decreases as s decreases along the grid.
    pub decreasing: bool,
    /// Last s·value over the first.
    pub last_over_first: f64,
}

/// Normalized one-dimensional density |x|^{2κ}e^{−x²/2}/(2^{κ+1/2}Γ(κ+1/2)).
struct Density {
    kappa: f64,
    norm: f64,
}

impl Density {
    fn new(kappa: f64) -> Result<Self> {
        Ok(Density { kappa, norm: 2f64.powf(kappa + 0.5) * gamma(kappa + 0.5)? })
    }

    fn eval(&self, x: f64) -> f64 {
        let w = if self.kappa == 0.0 { 1.0 } else { x.abs().powf(2.0 * self.kappa) };
        w * (-0.5 * x * x).exp() / self.norm
    }

    /// ∫_a ∫_b e^{−(x−y)²/4t} g(x) g(y) dy dx.
    fn pair(&self, t: f64, a: Interval, b: Interval, rel_tol: f64, budget: usize) -> f64 {
        let clip = [(-GAUSS_REACH, GAUSS_REACH)];
        let ia = intersect_intervals(&[a], &clip);
        let ib = intersect_intervals(&[b], &clip);
        if ia.is_empty() || ib.is_empty() {
            return 0.0;
        }
        let r = window_radius(t);
        let (b0, b1) = ib[0];
        let mut br = vec![0.0, b0, b1, b0 - r, b0 + r, b1 - r, b1 + r];
        br.retain(|v| v.is_finite());
        let outer = quad::adaptive_union(
            |x| {
                let gx = self.eval(x);
                if gx == 0.0 {
                    return 0.0;
                }
                let iv = intersect_intervals(&ib, &[(x - r, x + r)]);
                let inner = quad::adaptive_union(
                    |y| (-(x - y) * (x - y) / (4.0 * t)).exp() * self.eval(y),
                    &iv,
                    &[0.0, x],
                    rel_tol * 0.1,
                    1e-300,
                    budget,
                );
                gx * inner.value
            },
            &ia,
            &br,
            rel_tol,
            1e-300,
            budget,
        );
        outer.value
    }
}

fn box_set_pair(dens: &[Density], t: f64, a: &BoxSet, b: &BoxSet, rel_tol: f64, budget: usize) -> f64 {
    let mut total = 0.0;
    for ba in &a.boxes {
        for bb in &b.boxes {
            let mut prod = 1.0;
            for (i, d) in dens.iter().enumerate() {
                prod *= d.pair(t, ba.side(i), bb.side(i), rel_tol, budget);
                if prod == 0.0 {
                    break;
                }
            }
            total += prod;
        }
    }
    total
}

/// Weighted perimeter at one s.
pub fn weighted_perimeter(
    measure: &WeightedMeasure,
    e: &Region,
    omega: &Region,
    s: f64,
    quad: &QuadSpec,
) -> Result<WeightedPerimeter> {
    Ok(weighted_perimeter_grid(measure, e, omega, &[s], quad)?.remove(0))
}

/// Subordinated L̃ terms of several (A, B) pairs on an s-grid from one
/// sampled profile; returns per s the terms and the divergence flag.
fn terms_grid(
    measure: &WeightedMeasure,
    pairs: &[(BoxSet, BoxSet)],
    s_grid: &[f64],
    quad: &QuadSpec,
) -> Result<(Vec<(Vec<f64>, bool)>, bool)> {
    for &s in s_grid {
        check_s(s)?;
    }
    let kappas = measure
        .product_kappas()
        .ok_or_else(|| Error::Unsupported("weighted perimeters need a product root system".into()))?;
    let dens: Vec<Density> = kappas.iter().map(|&k| Density::new(k)).collect::<Result<_>>()?;
    let live: Vec<bool> = pairs.iter().map(|(a, b)| !a.is_empty() && !b.is_empty()).collect();
    let chi = measure.chi();
    let n = measure.dim() as f64;
    let betas: Vec<f64> = s_grid.iter().map(|s| chi + n / 2.0 + s).collect();
    let tol = quad.rel_tol.max(1e-10);
    let budget = quad.max_evals;
    let m = pairs.len();
    let prof = TimeProfile::build(
        |t| (0..m).map(|i| if live[i] { box_set_pair(&dens, t, &pairs[i].0, &pairs[i].1, tol, budget) } else { 0.0 }).collect(),
        &ProfileSpec::from_quad(quad, &betas),
    )?;
    let out = betas
        .iter()
        .map(|&beta| {
            let c = 4f64.powf(-beta) / gamma(beta)?;
            let mut terms = vec![0.0; m];
            let mut divergent = false;
            for i in 0..m {
                if live[i] {
                    let ti = prof.integrate(beta, |d| d[i]);
                    divergent |= ti.divergent;
                    terms[i] = if ti.divergent { f64::INFINITY } else { c * ti.total };
                }
            }
            Ok((terms, divergent))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((out, prof.converged))
}

/// L̃(A, B) = ∬_{A×B} |x−y|^{−(2χ+n+2s)} dν_κ dν_κ for disjoint box sets.
pub fn weighted_interaction(measure: &WeightedMeasure, a: &Region, b: &Region, s: f64, quad: &QuadSpec) -> Result<f64> {
    if a.dim() != measure.dim() || b.dim() != measure.dim() {
        return Err(Error::Precondition("region and measure dimensions differ".into()));
    }
    let pair = (box_cells(a)?, box_cells(b)?);
    if pair.0.intersect(&pair.1).boxes.iter().any(|bx| (0..bx.dim()).all(|k| bx.hi[k] > bx.lo[k])) {
        return Err(Error::Precondition("interaction sets overlap".into()));
    }
    let (res, _) = terms_grid(measure, &[pair], &[s], quad)?;
    Ok(res[0].0[0])
}

/// Weighted perimeter on an s-grid from one sampled G profile.
pub fn weighted_perimeter_grid(
    measure: &WeightedMeasure,
    e: &Region,
    omega: &Region,
    s_grid: &[f64],
    quad: &QuadSpec,
) -> Result<Vec<WeightedPerimeter>> {
    if e.dim() != measure.dim() {
        return Err(Error::Precondition("region and measure dimensions differ".into()));
    }
    let pairs = decomposition(e, omega)?;
    let (res, converged) = terms_grid(measure, &pairs, s_grid, quad)?;
    Ok(s_grid
        .iter()
        .zip(res)
        .map(|(&s, (t, divergent))| {
            let terms = [t[0], t[1], t[2]];
            WeightedPerimeter { s, value: terms.iter().sum(), terms, divergent, converged }
        })
        .collect())
}

/// s·weighted perimeter along the grid, which should vanish as s → 0⁺.
pub fn weighted_trend(
    measure: &WeightedMeasure,
    e: &Region,
    omega: &Region,
    s_grid: &[f64],
    quad: &QuadSpec,
) -> Result<WeightedTrend> {
    let res = weighted_perimeter_grid(measure, e, omega, s_grid, quad)?;
    if res.iter().any(|r| r.divergent) {
        return Err(Error::Divergent("weighted perimeter infinite on the s-grid".into()));
    }
    let values: Vec<f64> = res.iter().map(|r| r.value).collect();
    let s_times: Vec<f64> = res.iter().map(|r| r.s * r.value).collect();
    let mut order: Vec<usize> = (0..s_grid.len()).collect();
    order.sort_by(|&i, &j| s_grid[j].partial_cmp(&s_grid[i]).unwrap());
    let decreasing = order.windows(2).all(|w| s_times[w[1]] < s_times[w[0]]);
    let first = s_times[order[0]];
    let last = s_times[*order.last().unwrap()];
    Ok(WeightedTrend { s: s_grid.to_vec(), values, s_times, decreasing, last_over_first: last / first })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dunkl::RootSystemSpec;
    use approx::assert_relative_eq;

    #[test]
    fn density_is_normalized() {
        for &k in &[0.0, 0.5, 1.0] {
            let d = Density::new(k).unwrap();
            let m = quad::adaptive(|x| d.eval(x), -GAUSS_REACH, GAUSS_REACH, &[0.0], 1e-12, 0.0, 10_000).value;
            assert_relative_eq!(m, 1.0, max_relative = 1e-10);
        }
    }

    #[test]
    fn subordination_matches_spatial_double_integral() {
        // κ = 0, n = 1, separated sets: direct ∬ |x−y|^{−1−2s} φ(x)φ(y)
        let m = WeightedMeasure::trivial(1);
        let s = 0.2;
        let q = QuadSpec::default().with_rel_tol(1e-9);
        let v = weighted_interaction(&m, &Region::interval(-1.0, 0.5), &Region::interval(1.0, 3.0), s, &q).unwrap();
        let phi = |x: f64| (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let direct = quad::adaptive(
            |x| {
                phi(x) * quad::adaptive(|y| (y - x).powf(-1.0 - 2.0 * s) * phi(y), 1.0, 3.0, &[], 1e-12, 0.0, 100_000).value
            },
            -1.0,
            0.5,
            &[],
            1e-11,
            0.0,
            100_000,
        )
        .value;
        assert_relative_eq!(v, direct, max_relative = 1e-6);
        let w = weighted_perimeter(&m, &Region::interval(0.0, 1.0), &Region::interval(-0.5, 3.0), s, &q).unwrap();
        // E ⊂ Ω leaves the third term empty
        assert!(w.terms[0] > 0.0 && w.terms[1] > 0.0 && w.terms[1].is_finite(), "{w:?}");
        assert_eq!(w.terms[2], 0.0);
    }

    #[test]
    fn vanishing_trend() {
        let m = WeightedMeasure::trivial(1);
        let q = QuadSpec::default().with_rel_tol(1e-7);
        let tr = weighted_trend(&m, &Region::interval(0.0, 1.0), &Region::whole(1), &[0.2, 0.1, 0.05, 0.02], &q).unwrap();
        assert!(tr.decreasing, "{tr:?}");
        assert!(tr.last_over_first < 0.1, "{tr:?}");
        let z = weighted_perimeter(&m, &Region::empty(1), &Region::whole(1), 0.1, &q).unwrap();
        assert_eq!(z.value, 0.0);
    }

    #[test]
    fn reflection_weight_on_half_line() {
        let m = WeightedMeasure::new(RootSystemSpec::z2(0.5).unwrap());
        let q = QuadSpec::default().with_rel_tol(1e-7);
        let e = Region::interval(0.0, f64::INFINITY);
        let tr = weighted_trend(&m, &e, &Region::whole(1), &[0.2, 0.1, 0.05, 0.02], &q).unwrap();
        assert!(tr.decreasing, "{tr:?}");
        // the unit interval has a weighted contact point at 1 and diverges
        let div = weighted_perimeter(&m, &Region::interval(0.0, 1.0), &Region::whole(1), 0.1, &q).unwrap();
        assert!(div.divergent);
    }
}
