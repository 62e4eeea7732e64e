//! Time profiles: a function D(t) sampled once on adaptive Gauss–Kronrod
//! panels in v = ln t, then integrated against t^{-1-β} for many β.
//!
//! Below the sampled range D is extended by a fitted power law c·t^α, above
//! it by D∞ + C·t^{-γ}; both tails are integrated in closed form.

use std::sync::Mutex;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{gk15_nodes, QuadSpec};

const LN4: f64 = std::f64::consts::LN_2 * 2.0;

/// A fitted small-time exponent must exceed β by this much for the integral
/// to count as convergent.
pub const SMALL_TIME_MARGIN: f64 = 1e-4;

/// Sampling parameters of a profile.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileSpec {
    pub v_min: f64,
    pub v_max: f64,
    /// Panel boundaries that must be kept (ln of split times).
    pub splits: Vec<f64>,
    /// Whether (0, e^{v_min}) is covered by a power-law tail.
    pub small_tail: bool,
    pub initial_width: f64,
    pub rel_tol: f64,
    /// Budget of D evaluations.
    pub max_evals: usize,
    /// Exponents β whose integrals drive the refinement.
    pub betas: Vec<f64>,
}

impl ProfileSpec {
    pub fn new(log10_t_min: f64, log10_t_max: f64, betas: &[f64]) -> Self {
        ProfileSpec {
            v_min: log10_t_min * std::f64::consts::LN_10,
            v_max: log10_t_max * std::f64::consts::LN_10,
            splits: vec![0.0],
            small_tail: true,
            initial_width: 4.0,
            rel_tol: 1e-7,
            max_evals: 4000,
            betas: betas.to_vec(),
        }
    }

    /// Range, split and tolerance taken from a quadrature spec.
    pub fn from_quad(quad: &QuadSpec, betas: &[f64]) -> Self {
        let mut p = Self::new(quad.log10_t_min, quad.log10_t_max, betas).with_rel_tol(quad.rel_tol.max(1e-10));
        p.splits = vec![quad.time_split.ln()];
        p
    }

    /// Profile on [1, e^{v_max}) only.
    pub fn from_one(log10_t_max: f64, betas: &[f64]) -> Self {
        ProfileSpec { v_min: 0.0, small_tail: false, ..Self::new(0.0, log10_t_max, betas) }
    }

    pub fn with_rel_tol(mut self, tol: f64) -> Self {
        self.rel_tol = tol;
        self
    }
}

#[derive(Debug, Clone)]
struct Panel {
    a: f64,
    b: f64,
    v: [f64; 15],
    wk: [f64; 15],
    wg: [f64; 15],
    d: Vec<Vec<f64>>,
}

/// Samples of a vector-valued D(t).
#[derive(Debug, Clone)]
pub struct TimeProfile {
    panels: Vec<Panel>,
    split: f64,
    small: Option<[(f64, Vec<f64>); 2]>,
    large: [(f64, Vec<f64>); 3],
    pub evals: usize,
    pub converged: bool,
}

/// ∫ t^{-1-β} g(D(t)) dt split at the profile's first split point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeIntegral {
    pub total: f64,
    pub below: f64,
    pub above: f64,
    pub small_tail: f64,
    pub large_tail: f64,
    /// Fitted small-time exponent of g(D); the integral diverges when it
    /// does not exceed β.
    pub small_exponent: f64,
    pub divergent: bool,
}

fn make_panel<F>(d: &F, a: f64, b: f64) -> Panel
where
    F: Fn(f64) -> Vec<f64> + Sync,
{
    let (v, wk, wg) = gk15_nodes(a, b);
    let vals: Vec<Vec<f64>> = v.par_iter().map(|&x| d(x.exp())).collect();
    Panel { a, b, v, wk, wg, d: vals }
}

impl Panel {
    fn estimate(&self, beta: f64) -> (f64, f64) {
        let mut k = 0.0;
        let mut g = 0.0;
        for i in 0..15 {
            let f = (-beta * self.v[i]).exp() * self.d[i].iter().sum::<f64>();
            k += self.wk[i] * f;
            g += self.wg[i] * f;
        }
        (k, (k - g).abs())
    }
}

impl TimeProfile {
    /// Samples `d` (t ↦ component values) and refines until the integrals
    /// for every β in the spec meet the relative tolerance or the budget
    /// runs out.
    pub fn build<F>(d: F, spec: &ProfileSpec) -> Result<TimeProfile>
    where
        F: Fn(f64) -> Vec<f64> + Sync,
    {
        if !(spec.v_max > spec.v_min) {
            return Err(Error::Precondition("empty time range".into()));
        }
        let mut cuts: Vec<f64> = vec![spec.v_min, spec.v_max];
        cuts.extend(spec.splits.iter().copied().filter(|&v| v > spec.v_min && v < spec.v_max));
        cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut bounds = Vec::new();
        for w in cuts.windows(2) {
            let m = ((w[1] - w[0]) / spec.initial_width).ceil().max(1.0) as usize;
            for j in 0..m {
                bounds.push((w[0] + (w[1] - w[0]) * j as f64 / m as f64, w[0] + (w[1] - w[0]) * (j + 1) as f64 / m as f64));
            }
        }
        let mut panels: Vec<Panel> = bounds.iter().map(|&(a, b)| make_panel(&d, a, b)).collect();
        let mut evals = 15 * panels.len();
        let betas = if spec.betas.is_empty() { vec![0.0] } else { spec.betas.clone() };
        let mut converged = false;
        loop {
            // per-β totals and error shares
            let mut worst = None;
            let mut worst_score = 1.0;
            let mut all_ok = true;
            for &beta in &betas {
                let est: Vec<(f64, f64)> = panels.iter().map(|p| p.estimate(beta)).collect();
                let total: f64 = est.iter().map(|e| e.0).sum();
                let err: f64 = est.iter().map(|e| e.1).sum();
                let tol = spec.rel_tol * total.abs();
                if err > tol {
                    all_ok = false;
                }
                for (i, e) in est.iter().enumerate() {
                    let score = e.1 / (tol.max(1e-300) / panels.len() as f64);
                    if score > worst_score {
                        worst_score = score;
                        worst = Some(i);
                    }
                }
            }
            if all_ok {
                converged = true;
                break;
            }
            let Some(i) = worst else {
                converged = true;
                break;
            };
            if evals + 30 > spec.max_evals {
                break;
            }
            let p = panels.remove(i);
            let m = 0.5 * (p.a + p.b);
            let left = make_panel(&d, p.a, m);
            let right = make_panel(&d, m, p.b);
            evals += 30;
            panels.insert(i, right);
            panels.insert(i, left);
        }
        let small = if spec.small_tail {
            let v0 = spec.v_min;
            let v1 = spec.v_min - LN4;
            let vals: Vec<Vec<f64>> = [v0, v1].par_iter().map(|&v| d(v.exp())).collect();
            evals += 2;
            Some([(v0, vals[0].clone()), (v1, vals[1].clone())])
        } else {
            None
        };
        let lv = [spec.v_max - 2.0 * LN4, spec.v_max - LN4, spec.v_max];
        let lvals: Vec<Vec<f64>> = lv.par_iter().map(|&v| d(v.exp())).collect();
        evals += 3;
        let large = [(lv[0], lvals[0].clone()), (lv[1], lvals[1].clone()), (lv[2], lvals[2].clone())];
        let split = spec.splits.first().copied().unwrap_or(0.0);
        Ok(TimeProfile { panels, split, small, large, evals, converged })
    }

    /// [`TimeProfile::build`] for a sampler that may fail; the first error
    /// is returned.
    pub fn build_fallible<F>(d: F, spec: &ProfileSpec) -> Result<TimeProfile>
    where
        F: Fn(f64) -> Result<Vec<f64>> + Sync,
    {
        let err: Mutex<Option<Error>> = Mutex::new(None);
        let prof = Self::build(
            |t| match d(t) {
                Ok(v) => v,
                Err(e) => {
                    err.lock().unwrap().get_or_insert(e);
                    vec![f64::NAN]
                }
            },
            spec,
        )?;
        match err.into_inner().unwrap() {
            Some(e) => Err(e),
            None => Ok(prof),
        }
    }

    /// Every sampled (t, D(t)).
    pub fn samples(&self) -> Vec<(f64, Vec<f64>)> {
        let mut out: Vec<(f64, Vec<f64>)> = Vec::new();
        if let Some(s) = &self.small {
            out.push((s[1].0.exp(), s[1].1.clone()));
            out.push((s[0].0.exp(), s[0].1.clone()));
        }
        for p in &self.panels {
            for i in 0..15 {
                out.push((p.v[i].exp(), p.d[i].clone()));
            }
        }
        for l in &self.large {
            out.push((l.0.exp(), l.1.clone()));
        }
        out.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        out
    }

    /// ∫₀^∞ t^{-1-β} g(D(t)) dt for a nonnegative scalar transform g.
    pub fn integrate<G: Fn(&[f64]) -> f64>(&self, beta: f64, g: G) -> TimeIntegral {
        let mut below = 0.0;
        let mut above = 0.0;
        for p in &self.panels {
            let mut k = 0.0;
            for i in 0..15 {
                k += p.wk[i] * (-beta * p.v[i]).exp() * g(&p.d[i]);
            }
            if p.b <= self.split {
                below += k;
            } else {
                above += k;
            }
        }
        let mut out = TimeIntegral {
            total: 0.0,
            below,
            above,
            small_tail: 0.0,
            large_tail: 0.0,
            small_exponent: f64::INFINITY,
            divergent: false,
        };
        if let Some([(v0, d0), (v1, d1)]) = &self.small {
            let (g0, g1) = (g(d0), g(d1));
            if g0 > 0.0 {
                let alpha = if g1 > 0.0 { (g0 / g1).ln() / (v0 - v1) } else { f64::INFINITY };
                out.small_exponent = alpha;
                if alpha > beta + SMALL_TIME_MARGIN {
                    if alpha.is_finite() {
                        out.small_tail = g0 * (-beta * v0).exp() / (alpha - beta);
                    }
                } else {
                    out.divergent = true;
                    out.small_tail = f64::INFINITY;
                }
            }
        }
        let [(_, da), (_, db), (vc, dc)] = &self.large;
        let (ga, gb, gc) = (g(da), g(db), g(dc));
        let tmax_pow = (-beta * vc).exp();
        let d1 = ga - gb;
        let d2 = gb - gc;
        let mut tail = gc * tmax_pow / beta;
        if d2.abs() > 1e-15 * gc.abs().max(1e-300) && d1 * d2 > 0.0 && d1.abs() > d2.abs() {
            // g ≈ g∞ + C t^{-γ}
            let gamma = (d1 / d2).ln() / LN4;
            let c_t = d2 / (4f64.powf(gamma) - 1.0);
            let g_inf = gc - c_t;
            tail = g_inf * tmax_pow / beta + c_t * tmax_pow / (gamma + beta);
        }
        if beta <= 0.0 && gc > 0.0 {
            out.divergent = true;
            tail = f64::INFINITY;
        }
        out.large_tail = tail;
        out.below += out.small_tail;
        out.above += out.large_tail;
        out.total = out.below + out.above;
        out
    }

    /// max over the samples of t^{-β} g(D(t)).
    pub fn sup<G: Fn(&[f64]) -> f64>(&self, beta: f64, g: G) -> (f64, f64) {
        self.samples()
            .iter()
            .map(|(t, d)| (*t, t.powf(-beta) * g(d)))
            .fold((f64::NAN, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc })
    }
}

/// Sum of the components.
pub fn total(d: &[f64]) -> f64 {
    d.iter().sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn power_law_integrals() {
        // D(t) = t/(1+t): ∫ t^{-1-β} t/(1+t) dt = π / sin(π β) for 0 < β < 1
        let spec = ProfileSpec::new(-12.0, 12.0, &[0.2, 0.5]);
        let p = TimeProfile::build(|t| vec![t / (1.0 + t)], &spec).unwrap();
        for &b in &[0.1, 0.2, 0.5, 0.8] {
            let r = p.integrate(b, total);
            let exact = std::f64::consts::PI / (std::f64::consts::PI * b).sin();
            assert_relative_eq!(r.total, exact, max_relative = 1e-6);
            assert!(!r.divergent);
        }
        assert!(p.integrate(1.0, total).divergent);
        // sup of t^{-1/2} t/(1+t) is 1/2 at t = 1
        assert_relative_eq!(p.sup(0.5, total).1, 0.5, max_relative = 1e-3);
    }

    #[test]
    fn split_halves_add_up() {
        // D = 1 − e^{−t}: ∫₁^∞ t^{-2}(1 − e^{-t}) dt and the part below 1
        let spec = ProfileSpec::new(-12.0, 12.0, &[1.0]);
        let p = TimeProfile::build(|t| vec![-(-t).exp_m1()], &spec).unwrap();
        let r = p.integrate(0.5, total);
        // ∫₀^∞ t^{-3/2}(1 − e^{-t}) dt = 2√π
        assert_relative_eq!(r.total, 2.0 * std::f64::consts::PI.sqrt(), max_relative = 1e-6);
        assert!(r.below > 0.0 && r.above > 0.0);
        let only_upper = TimeProfile::build(|t| vec![-(-t).exp_m1()], &ProfileSpec::from_one(12.0, &[0.5])).unwrap();
        assert_relative_eq!(only_upper.integrate(0.5, total).total, r.above, max_relative = 1e-6);
    }
}
