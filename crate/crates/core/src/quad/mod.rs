//! Quadrature building blocks: Gauss–Legendre and Gauss–Jacobi rules,
//! adaptive Gauss–Kronrod, nested coordinate-wise cubature and randomized
//! quasi-Monte Carlo.

mod gauss;
pub mod qmc;

pub use gauss::{
    adaptive, adaptive_union, gauss_jacobi, gauss_legendre, gk15, gk15_nodes, legendre_cached,
    Estimate, Rule,
};

use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

static EVALS: AtomicU64 = AtomicU64::new(0);

/// Process-wide count of integrand evaluations made by the adaptive
/// Kronrod panels and the QMC sampler.
pub fn eval_count() -> u64 {
    EVALS.load(Ordering::Relaxed)
}

pub(crate) fn record_evals(n: u64) {
    EVALS.fetch_add(n, Ordering::Relaxed);
}

/// Quadrature scheme parameters shared by every evaluator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadSpec {
    /// Relative tolerance for adaptive rules.
    pub rel_tol: f64,
    /// Evaluation budget for one adaptive one-dimensional integral.
    pub max_evals: usize,
    /// Sample budget for (quasi-)Monte Carlo fallbacks.
    pub mc_samples: usize,
    pub seed: u64,
    /// Spatial truncation radius for regions without a bounding box.
    pub truncation_radius: Option<f64>,
    /// Split point of time integrals.
    pub time_split: f64,
    pub log10_t_min: f64,
    pub log10_t_max: f64,
}

impl Default for QuadSpec {
    fn default() -> Self {
        QuadSpec {
            rel_tol: 1e-8,
            max_evals: 100_000,
            mc_samples: 1 << 18,
            seed: 0x5eed,
            truncation_radius: None,
            time_split: 1.0,
            log10_t_min: -12.0,
            log10_t_max: 12.0,
        }
    }
}

impl QuadSpec {
    pub fn with_rel_tol(mut self, tol: f64) -> Self {
        self.rel_tol = tol;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_mc_samples(mut self, n: usize) -> Self {
        self.mc_samples = n;
        self
    }
}

/// Limits of integration at one nesting level: a union of intervals and the
/// interior points where the integrand has kinks.
pub struct Level {
    pub intervals: Vec<(f64, f64)>,
    pub breaks: Vec<f64>,
}

/// Coordinate-wise nested adaptive cubature.
///
/// `limits(k, prefix)` returns the integration set of coordinate k given the
/// first k coordinates; `f` is evaluated on full points.
pub fn nested<F, L>(f: &F, dim: usize, limits: &L, rel_tol: f64, abs_tol: f64, max_evals: usize) -> Estimate
where
    F: Fn(&[f64]) -> f64,
    L: Fn(usize, &[f64]) -> Level,
{
    let mut point = vec![0.0; dim];
    nested_level(f, dim, limits, 0, &mut point, rel_tol, abs_tol, max_evals)
}

#[allow(clippy::too_many_arguments)]
fn nested_level<F, L>(
    f: &F,
    dim: usize,
    limits: &L,
    k: usize,
    point: &mut Vec<f64>,
    rel_tol: f64,
    abs_tol: f64,
    max_evals: usize,
) -> Estimate
where
    F: Fn(&[f64]) -> f64,
    L: Fn(usize, &[f64]) -> Level,
{
    let level = limits(k, &point[..k]);
    if k + 1 == dim {
        let mut p = point.clone();
        return adaptive_union(
            |x| {
                p[k] = x;
                f(&p)
            },
            &level.intervals,
            &level.breaks,
            rel_tol,
            abs_tol,
            max_evals,
        );
    }
    let inner_tol = rel_tol * 0.1;
    let mut inner_evals = 0usize;
    let mut inner_ok = true;
    let mut p = point.clone();
    let outer = adaptive_union(
        |x| {
            p[k] = x;
            let e = nested_level(f, dim, limits, k + 1, &mut p, inner_tol, abs_tol * 0.1, max_evals);
            inner_evals += e.evals;
            inner_ok &= e.converged;
            e.value
        },
        &level.intervals,
        &level.breaks,
        rel_tol,
        abs_tol,
        max_evals,
    );
    Estimate { evals: inner_evals, converged: outer.converged && inner_ok, ..outer }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn nested_disk_area() {
        let est = nested(
            &|_x: &[f64]| 1.0,
            2,
            &|k, prefix: &[f64]| {
                if k == 0 {
                    Level { intervals: vec![(-1.0, 1.0)], breaks: vec![] }
                } else {
                    let h = (1.0 - prefix[0] * prefix[0]).max(0.0).sqrt();
                    Level { intervals: vec![(-h, h)], breaks: vec![] }
                }
            },
            1e-10,
            0.0,
            100_000,
        );
        assert_relative_eq!(est.value, std::f64::consts::PI, max_relative = 1e-8);
    }
}
