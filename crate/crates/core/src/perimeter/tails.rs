//! Tail functionals Λ^κ_E(x,r,s) = ∫₁^∞ t^{−1−s} P_t 1_{E∖B_d(x,r)}(x) dt,
//! their limit Ξ^κ_E = lim s·Λ, and ι(E) = lim s∫_{E∖B₁}|x|^{−n−2s}dx.

use serde::{Deserialize, Serialize};

use super::REPRESENTATION_TOL;
use crate::error::{Error, Result};
use crate::extrap::{extrapolate, LimitEstimate};
use crate::heat::{HeatKernel, KernelKind};
use crate::quad::{self, QuadSpec};
use crate::region::{Interval, Region};
use crate::specfun::{gamma, gamma_p, sphere_area};
use crate::timeint::{total, ProfileSpec, TimeProfile};

/// Default s-grid of the Ξ and ι estimators.
pub const XI_S_GRID: [f64; 4] = [0.04, 0.02, 0.01, 0.005];
/// Distance Ξ may stray outside [0, 1] before it is clamped and flagged.
pub const XI_TOL: f64 = 0.03;
/// Second (x, r) pair of the independence check: x = 0.7·e₁, r = 2.5.
pub const ALT_RADIUS: f64 = 2.5;
const ALT_SHIFT: f64 = 0.7;
/// Floor of the (x, r)-independence tolerance.
pub const XI_CONSISTENCY_FLOOR: f64 = 2e-3;
/// Beyond this squared-radius argument γ(a, ρ²/4) equals Γ(a) to double
/// precision.
const GAMMA_SATURATION: f64 = 45.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaResult {
    pub s: f64,
    pub value: f64,
    /// 4^s π^{−n/2}∫_{E∖B(x,r)} γ(n/2+s, |x−y|²/4)|x−y|^{−n−2s}dy at κ = 0.
    pub closed_form: Option<f64>,
    pub agrees: Option<bool>,
    /// s·Λ, bounded by 1 (sub-Markov).
    pub s_times: f64,
    pub converged: bool,
}

fn tail_set(kernel: &HeatKernel, e: &Region, x: &[f64], r: f64) -> Result<Region> {
    if !(r > 0.0) {
        return Err(Error::Domain(format!("radius must be positive, got {r}")));
    }
    if x.len() != e.dim() || e.dim() != kernel.dim() {
        return Err(Error::Precondition("point, region and kernel dimensions differ".into()));
    }
    let ball = kernel.measure().spec().pseudo_ball(x, r)?;
    Ok(e.intersection(&ball.complement()?))
}

/// Λ^κ_E(x, r, s).
pub fn lambda_tail(kernel: &HeatKernel, e: &Region, x: &[f64], r: f64, s: f64, quad: &QuadSpec) -> Result<LambdaResult> {
    Ok(lambda_grid(kernel, e, x, r, &[s], quad)?.remove(0))
}

/// Λ^κ_E(x, r, s) for every s of the grid from one time profile on [1, ∞).
pub fn lambda_grid(
    kernel: &HeatKernel,
    e: &Region,
    x: &[f64],
    r: f64,
    s_grid: &[f64],
    quad: &QuadSpec,
) -> Result<Vec<LambdaResult>> {
    if s_grid.iter().any(|&s| !(s > 0.0)) {
        return Err(Error::Domain("s must be positive".into()));
    }
    let f = tail_set(kernel, e, x, r)?;
    let spec = ProfileSpec::from_one(quad.log10_t_max, s_grid).with_rel_tol(quad.rel_tol.max(1e-10));
    let prof = TimeProfile::build_fallible(|t| Ok(vec![kernel.region_mass(t, x, &f, quad)?]), &spec)?;
    let classical = kernel.kind() == KernelKind::ClassicalGaussian;
    s_grid
        .iter()
        .map(|&s| {
            let value = prof.integrate(s, total).total;
            let closed_form = if classical { Some(lambda_closed_form(&f, x, s, quad)?) } else { None };
            let agrees = closed_form.map(|c| (c - value).abs() <= REPRESENTATION_TOL * c.abs().max(1e-300));
            Ok(LambdaResult { s, value, closed_form, agrees, s_times: s * value, converged: prof.converged })
        })
        .collect()
}

/// ∫_{ray ∩ F} γ(a, ρ²/4) ρ^{−1−2s} dρ over radial intervals.
fn radial_gamma(iv: &[Interval], a: f64, s: f64, quad: &QuadSpec) -> Result<f64> {
    let ga = gamma(a)?;
    let sat = 2.0 * GAMMA_SATURATION.sqrt();
    let mut acc = 0.0;
    for &(r0, r1) in iv {
        if !(r1 > r0) {
            continue;
        }
        let mid = r1.min(sat.max(r0));
        if mid > r0 {
            acc += quad::adaptive(
                |rho: f64| gamma_p(a, rho * rho / 4.0) * ga * rho.powf(-1.0 - 2.0 * s),
                r0,
                mid,
                &[],
                quad.rel_tol,
                1e-300,
                quad.max_evals,
            )
            .value;
        }
        let lo = r0.max(sat);
        if r1 > lo {
            let hi = if r1.is_finite() { r1.powf(-2.0 * s) } else { 0.0 };
            acc += ga * (lo.powf(-2.0 * s) - hi) / (2.0 * s);
        }
    }
    Ok(acc)
}

/// Closed form of Λ⁰ for F = E∖B(x, r), along rays from x (n ≤ 2).
pub fn lambda_closed_form(f: &Region, x: &[f64], s: f64, quad: &QuadSpec) -> Result<f64> {
    let n = x.len();
    let a = n as f64 / 2.0 + s;
    let pref = 4f64.powf(s) / std::f64::consts::PI.powf(n as f64 / 2.0);
    let missing = || Error::Unsupported("region without ray intersections".into());
    let body = match n {
        1 => {
            let p = f.ray_intervals(x, &[1.0]).ok_or_else(missing)?;
            let m = f.ray_intervals(x, &[-1.0]).ok_or_else(missing)?;
            radial_gamma(&p, a, s, quad)? + radial_gamma(&m, a, s, quad)?
        }
        2 => {
            f.ray_intervals(x, &[1.0, 0.0]).ok_or_else(missing)?;
            let breaks: Vec<f64> = (1..16).map(|k| k as f64 * std::f64::consts::TAU / 16.0).collect();
            quad::adaptive(
                |th: f64| {
                    let iv = f.ray_intervals(x, &[th.cos(), th.sin()]).unwrap_or_default();
                    radial_gamma(&iv, a, s, quad).unwrap_or(f64::NAN)
                },
                0.0,
                std::f64::consts::TAU,
                &breaks,
                quad.rel_tol.max(1e-9),
                1e-300,
                quad.max_evals,
            )
            .value
        }
        _ => return Err(Error::Unsupported(format!("closed-form Λ is implemented for n ≤ 2, got {n}"))),
    };
    Ok(pref * body)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct XiReport {
    /// Ξ^κ_E, clamped into [0, 1] when the estimate strays beyond the
    /// tolerance.
    pub xi: f64,
    pub estimate: LimitEstimate,
    /// Estimate from the second (x, r) pair.
    pub alt: LimitEstimate,
    pub consistent: bool,
    pub clamped: bool,
    pub reliable: bool,
}

/// Extrapolates s·Λ^κ_E(x, r, s) to s → 0⁺ and repeats the estimate at
/// (0.7·e₁, 2.5) to check independence of (x, r).
pub fn xi_estimate(
    kernel: &HeatKernel,
    e: &Region,
    x: &[f64],
    r: f64,
    s_grid: &[f64],
    quad: &QuadSpec,
) -> Result<XiReport> {
    if s_grid.len() < 2 {
        return Err(Error::InsufficientScales("Ξ needs at least two s values".into()));
    }
    let fit = |x: &[f64], r: f64| -> Result<LimitEstimate> {
        let l = lambda_grid(kernel, e, x, r, s_grid, quad)?;
        let raw: Vec<f64> = l.iter().map(|v| v.value).collect();
        extrapolate(s_grid, &raw, None)
    };
    let estimate = fit(x, r)?;
    let mut alt_x = vec![0.0; x.len()];
    alt_x[0] = ALT_SHIFT;
    let alt = fit(&alt_x, ALT_RADIUS)?;
    let consistent = (estimate.limit - alt.limit).abs()
        < (3.0 * (estimate.residual + alt.residual)).max(XI_CONSISTENCY_FLOOR);
    let mut xi = estimate.limit;
    let clamped = !(-XI_TOL..=1.0 + XI_TOL).contains(&xi);
    if clamped {
        xi = xi.clamp(0.0, 1.0);
    }
    Ok(XiReport { xi, reliable: estimate.reliable && alt.reliable && !clamped, estimate, alt, consistent, clamped })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IotaReport {
    pub estimate: LimitEstimate,
    /// "rays", "angular" or "rqmc".
    pub method: String,
    /// Largest RQMC standard error relative to the value (RQMC only).
    pub mc_rel_error: Option<f64>,
}

/// s·∫_{ray∩E, ρ>1} ρ^{−1−2s} dρ summed in closed form.
fn ray_weight(iv: &[Interval], s: f64) -> f64 {
    iv.iter()
        .map(|&(r0, r1)| {
            let lo = r0.max(1.0);
            if !(r1 > lo) {
                return 0.0;
            }
            let hi = if r1.is_finite() { r1.powf(-2.0 * s) } else { 0.0 };
            (lo.powf(-2.0 * s) - hi) / 2.0
        })
        .sum()
}

/// ι(E) = lim_{s→0⁺} s∫_{E∖B₁}|x|^{−n−2s}dx.
pub fn iota_estimate(e: &Region, s_grid: &[f64], quad: &QuadSpec) -> Result<IotaReport> {
    if s_grid.len() < 2 || s_grid.iter().any(|&s| !(s > 0.0)) {
        return Err(Error::InsufficientScales("ι needs at least two positive s values".into()));
    }
    let n = e.dim();
    let origin = vec![0.0; n];
    let tagged = e.ray_intervals(&origin, &{
        let mut d = vec![0.0; n];
        d[0] = 1.0;
        d
    });
    let (values, method, mc): (Vec<f64>, &str, Option<f64>) = match (n, tagged.is_some()) {
        (1, true) => {
            let p = e.ray_intervals(&origin, &[1.0]).unwrap();
            let m = e.ray_intervals(&origin, &[-1.0]).unwrap();
            (s_grid.iter().map(|&s| ray_weight(&p, s) + ray_weight(&m, s)).collect(), "rays", None)
        }
        (2, true) => {
            let breaks: Vec<f64> = (1..32).map(|k| k as f64 * std::f64::consts::TAU / 32.0).collect();
            let v = s_grid
                .iter()
                .map(|&s| {
                    quad::adaptive(
                        |th: f64| ray_weight(&e.ray_intervals(&origin, &[th.cos(), th.sin()]).unwrap_or_default(), s),
                        0.0,
                        std::f64::consts::TAU,
                        &breaks,
                        quad.rel_tol.max(1e-10),
                        1e-300,
                        quad.max_evals,
                    )
                    .value
                })
                .collect();
            (v, "angular", None)
        }
        (_, true) => {
            // uniform directions from the unit square (Archimedes' map)
            if n != 3 {
                return Err(Error::Unsupported(format!("ι is implemented for n ≤ 3, got {n}")));
            }
            let area = sphere_area(3)?;
            let mut worst: f64 = 0.0;
            let mut v = Vec::new();
            for &s in s_grid {
                let est = quad::qmc::rqmc_mean(
                    |u: &[f64]| {
                        let z = 2.0 * u[0] - 1.0;
                        let ph = std::f64::consts::TAU * u[1];
                        let rr = (1.0 - z * z).max(0.0).sqrt();
                        let d = [rr * ph.cos(), rr * ph.sin(), z];
                        ray_weight(&e.ray_intervals(&origin, &d).unwrap_or_default(), s)
                    },
                    2,
                    quad.mc_samples,
                    8,
                    quad.seed,
                );
                if est.value != 0.0 {
                    worst = worst.max(est.std_error / est.value.abs());
                }
                v.push(area * est.value);
            }
            (v, "rqmc", Some(worst))
        }
        (_, false) => {
            // predicate regions carry a bounding box, so the integral is
            // finite and s·(integral) is sampled over the box
            let bb = e.bbox().ok_or_else(|| Error::Unsupported("unbounded predicate region".into()))?.clone();
            let vol: f64 = (0..n).map(|k| bb.hi[k] - bb.lo[k]).product();
            let mut worst: f64 = 0.0;
            let mut v = Vec::new();
            for &s in s_grid {
                let est = quad::qmc::rqmc_mean(
                    |u: &[f64]| {
                        let y: Vec<f64> = (0..n).map(|k| bb.lo[k] + u[k] * (bb.hi[k] - bb.lo[k])).collect();
                        let r2: f64 = y.iter().map(|c| c * c).sum();
                        if r2 > 1.0 && e.contains(&y) {
                            s * r2.powf(-(n as f64 + 2.0 * s) / 2.0)
                        } else {
                            0.0
                        }
                    },
                    n,
                    quad.mc_samples,
                    8,
                    quad.seed,
                );
                if est.value != 0.0 {
                    worst = worst.max(est.std_error / est.value.abs());
                }
                v.push(vol * est.value);
            }
            (v, "rqmc", Some(worst))
        }
    };
    // values are s·∫; the extrapolator expects the unscaled integrals
    let raw: Vec<f64> = values.iter().zip(s_grid).map(|(v, s)| v / s).collect();
    let estimate = extrapolate(s_grid, &raw, None)?;
    Ok(IotaReport { estimate, method: method.to_string(), mc_rel_error: mc })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dunkl::{RootSystemSpec, WeightedMeasure};
    use approx::assert_relative_eq;

    #[test]
    fn lambda_closed_form_agrees_with_time_integral() {
        let k = HeatKernel::classical(1);
        let e = Region::interval(2.0, f64::INFINITY);
        let r = lambda_tail(&k, &e, &[0.0], 1.0, 0.1, &QuadSpec::default()).unwrap();
        assert_eq!(r.agrees, Some(true), "{r:?}");
        assert!(r.s_times <= 1.0 + 1e-6);
        let z = lambda_tail(&k, &Region::empty(1), &[0.0], 1.0, 0.1, &QuadSpec::default()).unwrap();
        assert_eq!(z.value, 0.0);
    }

    #[test]
    fn lambda_of_whole_line_tends_to_one() {
        let k = HeatKernel::classical(1);
        let r = lambda_tail(&k, &Region::whole(1), &[0.0], 1.0, 0.01, &QuadSpec::default()).unwrap();
        assert!((r.s_times - 1.0).abs() < 0.05, "{r:?}");
        assert!(r.s_times <= 1.0 + 1e-6);
    }

    #[test]
    fn xi_of_basic_sets() {
        let k = HeatKernel::classical(1);
        let q = QuadSpec::default();
        let x0 = [0.0];
        let bounded = xi_estimate(&k, &Region::interval(-1.0, 3.0), &x0, 1.0, &XI_S_GRID, &q).unwrap();
        assert!(bounded.xi.abs() <= 0.03, "{bounded:?}");
        let whole = xi_estimate(&k, &Region::whole(1), &x0, 1.0, &XI_S_GRID, &q).unwrap();
        assert!((whole.xi - 1.0).abs() <= 0.03, "{whole:?}");
        let half = xi_estimate(&k, &Region::interval(0.0, f64::INFINITY), &x0, 1.0, &XI_S_GRID, &q).unwrap();
        assert!((half.xi - 0.5).abs() <= 0.03, "{half:?}");
        assert!(half.consistent);
    }

    #[test]
    fn xi_with_reflection_weight() {
        let k = HeatKernel::new(WeightedMeasure::new(RootSystemSpec::z2(0.5).unwrap())).unwrap();
        let q = QuadSpec::default().with_rel_tol(1e-7);
        let e = Region::interval(0.0, f64::INFINITY);
        let a = xi_estimate(&k, &e, &[0.0], 1.0, &XI_S_GRID, &q).unwrap();
        let b = xi_estimate(&k, &e.complement().unwrap(), &[0.0], 1.0, &XI_S_GRID, &q).unwrap();
        assert!((a.xi + b.xi - 1.0).abs() <= 0.03, "{} + {}", a.xi, b.xi);
    }

    #[test]
    fn iota_values() {
        let q = QuadSpec::default();
        let line = iota_estimate(&Region::whole(1), &XI_S_GRID, &q).unwrap();
        assert_relative_eq!(line.estimate.limit, 1.0, max_relative = 1e-9);
        let plane = iota_estimate(&Region::whole(2), &XI_S_GRID, &q).unwrap();
        assert_relative_eq!(plane.estimate.limit, std::f64::consts::PI, max_relative = 1e-6);
        let theta = 1.2;
        let sector = Region::tagged(2, crate::region::Shape::Sector { start: 0.3, end: 0.3 + theta }).unwrap();
        let sec = iota_estimate(&sector, &XI_S_GRID, &q).unwrap();
        assert_relative_eq!(sec.estimate.limit, theta / 2.0, max_relative = 1e-5);
        let b = iota_estimate(&Region::ball(&[0.5, 0.0], 3.0), &XI_S_GRID, &q).unwrap();
        assert!(b.estimate.limit.abs() < 0.01, "{:?}", b.estimate);
    }
}
