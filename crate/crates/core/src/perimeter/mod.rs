//! Interaction functionals L^κ_s(A,B) = ∫₀^∞ t^{−1−s} ∫_A P_t 1_B dμ_κ dt,
//! classical and Dunkl relative s-perimeters and the relative s → 0⁺
//! limit theorems.
//!
//! Oracle: for E = (0,1) ⊂ ℝ the classical perimeter relative to ℝ is
//! 1/(s(1−2s)), by exact integration of |x−y|^{−1−2s} over E × Eᶜ.

mod properties;
mod tails;
mod weighted;

pub use properties::{perimeter_properties_suite, PropertiesReport, PropertyCheck};
pub use tails::{
    iota_estimate, lambda_closed_form, lambda_grid, lambda_tail, xi_estimate, IotaReport, LambdaResult, XiReport,
    ALT_RADIUS, XI_S_GRID, XI_TOL,
};
pub use weighted::{weighted_interaction, weighted_perimeter, weighted_perimeter_grid, weighted_trend, WeightedPerimeter, WeightedTrend};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extrap::{extrapolate, LimitEstimate};
use crate::heat::{HeatKernel, KernelKind};
use crate::quad::QuadSpec;
use crate::region::{BoxSet, Region};
use crate::riesz;
use crate::seminorm;
use crate::field::ScalarField;
use crate::specfun::gamma;
use crate::timeint::{total, ProfileSpec, TimeProfile};

/// Relative agreement required between the time-integral and spatial
/// representations at κ = 0.
pub const REPRESENTATION_TOL: f64 = 1e-3;
/// Quadrature tolerance of the spatial cross-check.
const SPATIAL_TOL: f64 = 1e-4;

pub(crate) fn check_s(s: f64) -> Result<()> {
    if s > 0.0 && s < 0.5 {
        Ok(())
    } else {
        Err(Error::Domain(format!("perimeter order s must lie in (0, 1/2), got {s}")))
    }
}

pub(crate) fn box_cells(r: &Region) -> Result<BoxSet> {
    r.box_cells()
        .ok_or_else(|| Error::Unsupported("perimeters need regions built from intervals, boxes and half-spaces".into()))
}

/// 2^{2s}Γ(n/2+s)/π^{n/2}: L^0_s(A,B) over ∬_{A×B}|x−y|^{−n−2s}.
pub fn riesz_constant(n: usize, s: f64) -> Result<f64> {
    let nf = n as f64;
    Ok(4f64.powf(s) * gamma(nf / 2.0 + s)? / std::f64::consts::PI.powf(nf / 2.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InteractionResult {
    pub s: f64,
    pub value: f64,
    pub small_time: f64,
    pub large_time: f64,
    pub divergent: bool,
    /// Spatial form 2^{2s}Γ(n/2+s)π^{−n/2}∬|x−y|^{−n−2s} at κ = 0.
    pub spatial: Option<f64>,
    pub agrees: Option<bool>,
    pub converged: bool,
}

fn check_disjoint(a: &BoxSet, b: &BoxSet) -> Result<()> {
    let ov = a.intersect(b);
    if ov.boxes.iter().any(|bx| (0..bx.dim()).all(|k| bx.hi[k] > bx.lo[k])) {
        return Err(Error::Precondition("interaction sets overlap".into()));
    }
    Ok(())
}

fn check_pair_support(a: &BoxSet, b: &BoxSet) -> Result<()> {
    if !a.is_empty() && !b.is_empty() && !a.is_bounded() && !b.is_bounded() {
        return Err(Error::Unsupported("interaction between two unbounded sets".into()));
    }
    Ok(())
}

/// L^κ_s(A, B) for disjoint A, B, at least one bounded.
pub fn interaction(kernel: &HeatKernel, a: &Region, b: &Region, s: f64, quad: &QuadSpec) -> Result<InteractionResult> {
    Ok(interaction_grid(kernel, a, b, &[s], quad)?.remove(0))
}

/// L^κ_s(A, B) for every s of the grid from one sampled time profile.
pub fn interaction_grid(
    kernel: &HeatKernel,
    a: &Region,
    b: &Region,
    s_grid: &[f64],
    quad: &QuadSpec,
) -> Result<Vec<InteractionResult>> {
    for &s in s_grid {
        check_s(s)?;
    }
    let (ca, cb) = (box_cells(a)?, box_cells(b)?);
    check_disjoint(&ca, &cb)?;
    check_pair_support(&ca, &cb)?;
    if ca.is_empty() || cb.is_empty() {
        return Ok(s_grid
            .iter()
            .map(|&s| InteractionResult {
                s,
                value: 0.0,
                small_time: 0.0,
                large_time: 0.0,
                divergent: false,
                spatial: Some(0.0),
                agrees: Some(true),
                converged: true,
            })
            .collect());
    }
    let tol = quad.rel_tol;
    let prof = TimeProfile::build_fallible(|t| Ok(vec![kernel.box_pair(t, &ca, &cb, tol)?]), &ProfileSpec::from_quad(quad, s_grid))?;
    let n = kernel.dim();
    s_grid
        .iter()
        .map(|&s| {
            let ti = prof.integrate(s, total);
            let value = if ti.divergent { f64::INFINITY } else { ti.total };
            let spatial = if kernel.kind() == KernelKind::ClassicalGaussian && n <= 2 {
                Some(riesz_constant(n, s)? * riesz::region_pair(a, b, 2.0 * s, SPATIAL_TOL, quad.max_evals)?.value)
            } else {
                None
            };
            let agrees = spatial.map(|sp| {
                (sp.is_infinite() && value.is_infinite()) || (sp - value).abs() <= REPRESENTATION_TOL * sp.abs()
            });
            Ok(InteractionResult {
                s,
                value,
                small_time: ti.below,
                large_time: ti.above,
                divergent: ti.divergent,
                spatial,
                agrees,
                converged: prof.converged,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerimeterResult {
    pub s: f64,
    pub value: f64,
    /// L(E∩Ω, Eᶜ∩Ω), L(E∩Ω, Eᶜ∩Ωᶜ), L(E∩Ωᶜ, Eᶜ∩Ω).
    pub terms: [f64; 3],
    pub divergent: bool,
    pub converged: bool,
    /// Time samples (Dunkl) or zero (classical closed forms).
    pub samples: usize,
}

/// The three (A, B) pairs of the relative perimeter as box sets.
pub fn decomposition(e: &Region, omega: &Region) -> Result<[(BoxSet, BoxSet); 3]> {
    if e.dim() != omega.dim() {
        return Err(Error::Precondition("E and Ω dimensions differ".into()));
    }
    let (ce, co) = (box_cells(e)?, box_cells(omega)?);
    let (cec, coc) = (ce.complement(), co.complement());
    Ok([
        (ce.intersect(&co), cec.intersect(&co)),
        (ce.intersect(&co), cec.intersect(&coc)),
        (ce.intersect(&coc), cec.intersect(&co)),
    ])
}

fn region_decomposition(e: &Region, omega: &Region) -> Result<[(Region, Region); 3]> {
    let ec = e.complement()?;
    let oc = omega.complement()?;
    Ok([
        (e.intersection(omega), ec.intersection(omega)),
        (e.intersection(omega), ec.intersection(&oc)),
        (e.intersection(&oc), ec.intersection(omega)),
    ])
}

/// Classical Per_s(E, Ω): the three-term sum of ∬|x−y|^{−n−2s}.
pub fn perimeter_classical(e: &Region, omega: &Region, s: f64, quad: &QuadSpec) -> Result<PerimeterResult> {
    check_s(s)?;
    if e.dim() != omega.dim() {
        return Err(Error::Precondition("E and Ω dimensions differ".into()));
    }
    let pairs = region_decomposition(e, omega)?;
    let mut terms = [0.0; 3];
    let mut converged = true;
    for (i, (a, b)) in pairs.iter().enumerate() {
        let empty = |r: &Region| r.box_cells().map(|c| c.is_empty()).unwrap_or(false);
        if empty(a) || empty(b) {
            continue;
        }
        let est = riesz::region_pair(a, b, 2.0 * s, quad.rel_tol, quad.max_evals)?;
        converged &= est.converged;
        terms[i] = est.value;
    }
    let value: f64 = terms.iter().sum();
    Ok(PerimeterResult { s, value, terms, divergent: value.is_infinite(), converged, samples: 0 })
}

/// Per^κ_s(E, Ω) = 2[L(E∩Ω,Eᶜ∩Ω) + L(E∩Ω,Eᶜ∩Ωᶜ) + L(E∩Ωᶜ,Eᶜ∩Ω)].
pub fn perimeter_dunkl(kernel: &HeatKernel, e: &Region, omega: &Region, s: f64, quad: &QuadSpec) -> Result<PerimeterResult> {
    Ok(perimeter_dunkl_grid(kernel, e, omega, &[s], quad)?.remove(0))
}

/// [`perimeter_dunkl`] for every s of the grid from one time profile.
pub fn perimeter_dunkl_grid(
    kernel: &HeatKernel,
    e: &Region,
    omega: &Region,
    s_grid: &[f64],
    quad: &QuadSpec,
) -> Result<Vec<PerimeterResult>> {
    for &s in s_grid {
        check_s(s)?;
    }
    if e.dim() != kernel.dim() {
        return Err(Error::Precondition("region and kernel dimensions differ".into()));
    }
    let pairs = decomposition(e, omega)?;
    for (a, b) in &pairs {
        check_pair_support(a, b)?;
    }
    let live: Vec<bool> = pairs.iter().map(|(a, b)| !a.is_empty() && !b.is_empty()).collect();
    let tol = quad.rel_tol;
    let prof = TimeProfile::build_fallible(
        |t| {
            let mut v = vec![0.0; 3];
            for i in 0..3 {
                if live[i] {
                    v[i] = kernel.box_pair(t, &pairs[i].0, &pairs[i].1, tol)?;
                }
            }
            Ok(v)
        },
        &ProfileSpec::from_quad(quad, s_grid),
    )?;
    Ok(s_grid
        .iter()
        .map(|&s| {
            let mut terms = [0.0; 3];
            let mut divergent = false;
            for i in 0..3 {
                if live[i] {
                    let ti = prof.integrate(s, |d| d[i]);
                    divergent |= ti.divergent;
                    terms[i] = if ti.divergent { f64::INFINITY } else { ti.total };
                }
            }
            PerimeterResult {
                s,
                value: 2.0 * terms.iter().sum::<f64>(),
                terms,
                divergent,
                converged: prof.converged,
                samples: prof.evals,
            }
        })
        .collect())
}

/// Per^κ_s(E) against N^κ_{2s,1}(1_E); returns (perimeter, seminorm).
pub fn perimeter_besov_consistency(kernel: &HeatKernel, e: &Region, s: f64, quad: &QuadSpec) -> Result<(f64, f64)> {
    let whole = Region::whole(e.dim());
    let per = perimeter_dunkl(kernel, e, &whole, s, quad)?;
    let f = ScalarField::indicator(e)?;
    let n = seminorm::besov_grid(kernel, &f, 1.0, &[2.0 * s], quad)?.remove(0);
    Ok((per.value, n.value))
}

/// μ_κ(E∩Ω) and μ_κ(Eᶜ∩Ω).
pub fn split_measures(kernel: &HeatKernel, e: &Region, omega: &Region, quad: &QuadSpec) -> Result<(f64, f64)> {
    let m = kernel.measure();
    let inside = m.measure_of(&e.intersection(omega), quad)?.value;
    let outside = m.measure_of(&e.complement()?.intersection(omega), quad)?.value;
    Ok((inside, outside))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelativeLimitReport {
    /// Extrapolation of s·Per^κ_s(E, Ω).
    pub estimate: LimitEstimate,
    pub xi: f64,
    pub mu_inside: f64,
    pub mu_outside: f64,
    /// 2Ξ_{Eᶜ}μ(E∩Ω) + 2Ξ_E μ(Eᶜ∩Ω) with Ξ_{Eᶜ} = 1 − Ξ_E.
    pub predicted_first: f64,
    /// 2[(1−Ξ_E)μ(E∩Ω) + Ξ_E μ(Eᶜ∩Ω)].
    pub predicted: f64,
    pub forms_agree: bool,
    pub balanced: bool,
    pub relative_error: f64,
    pub reliable: bool,
}

/// Extrapolates s·Per^κ_s(E,Ω) and compares with the relative limit
/// formula; Ξ_E is taken from `xi` when given, else estimated.
pub fn relative_limit_verify(
    kernel: &HeatKernel,
    e: &Region,
    omega: &Region,
    s_grid: &[f64],
    xi: Option<&XiReport>,
    quad: &QuadSpec,
) -> Result<RelativeLimitReport> {
    if !omega.is_bounded() {
        return Err(Error::Precondition("Ω must be bounded".into()));
    }
    if s_grid.len() < 2 {
        return Err(Error::InsufficientScales("the limit needs at least two s values".into()));
    }
    let pers = perimeter_dunkl_grid(kernel, e, omega, s_grid, quad)?;
    if pers.iter().any(|p| p.divergent) {
        return Err(Error::Divergent("perimeter infinite on the s-grid".into()));
    }
    let owned;
    let xi = match xi {
        Some(x) => x,
        None => {
            owned = xi_estimate(kernel, e, &vec![0.0; e.dim()], 1.0, XI_S_GRID.as_ref(), quad)?;
            &owned
        }
    };
    let (mu_in, mu_out) = split_measures(kernel, e, omega, quad)?;
    let x = xi.xi;
    let predicted_first = 2.0 * (1.0 - x) * mu_in + 2.0 * x * mu_out;
    let predicted = 2.0 * ((1.0 - x) * mu_in + x * mu_out);
    let raw: Vec<f64> = pers.iter().map(|p| p.value).collect();
    let estimate = extrapolate(s_grid, &raw, Some(predicted))?;
    let relative_error = (estimate.limit - predicted).abs() / predicted.abs().max(1e-12);
    Ok(RelativeLimitReport {
        reliable: estimate.reliable,
        estimate,
        xi: x,
        mu_inside: mu_in,
        mu_outside: mu_out,
        predicted_first,
        predicted,
        forms_agree: (predicted_first - predicted).abs() <= 1e-12 * predicted.abs().max(1.0),
        balanced: (mu_in - mu_out).abs() <= 5.0 * quad.rel_tol.max(1e-9) * (mu_in + mu_out),
        relative_error,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConverseReport {
    pub limit: LimitEstimate,
    pub mu_inside: f64,
    pub mu_outside: f64,
    /// (lim s·Per − 2μ(E∩Ω)) / (2[μ(Eᶜ∩Ω) − μ(E∩Ω)]).
    pub recovered: f64,
    pub direct: f64,
    pub difference: f64,
    pub agrees: bool,
    /// Boundary admissibility of Ω from the fractal module, when supplied.
    pub boundary: Option<crate::fractal::BoundaryFit>,
}

/// Recovers Ξ_E from the s → 0⁺ limit of s·Per^κ_s(E,Ω) when the measures
/// of E∩Ω and Eᶜ∩Ω differ, and compares with the direct estimate.
pub fn converse_xi_recover(
    kernel: &HeatKernel,
    e: &Region,
    omega: &Region,
    s_grid: &[f64],
    boundary: Option<crate::fractal::BoundaryFit>,
    quad: &QuadSpec,
    agreement: f64,
) -> Result<ConverseReport> {
    let (mu_in, mu_out) = split_measures(kernel, e, omega, quad)?;
    let gap = (mu_out - mu_in).abs();
    if gap <= 5.0 * quad.rel_tol.max(1e-9) * (mu_in + mu_out).max(1.0) {
        return Err(Error::Precondition("balanced measures: Ξ cannot be recovered".into()));
    }
    let direct = xi_estimate(kernel, e, &vec![0.0; e.dim()], 1.0, XI_S_GRID.as_ref(), quad)?;
    let report = relative_limit_verify(kernel, e, omega, s_grid, Some(&direct), quad)?;
    let recovered = (report.estimate.limit - 2.0 * mu_in) / (2.0 * (mu_out - mu_in));
    let difference = (recovered - direct.xi).abs();
    Ok(ConverseReport {
        limit: report.estimate,
        mu_inside: mu_in,
        mu_outside: mu_out,
        recovered,
        direct: direct.xi,
        difference,
        agrees: difference <= agreement,
        boundary,
    })
}
