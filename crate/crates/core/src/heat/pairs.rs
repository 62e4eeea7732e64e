//! One-dimensional heat masses ∫_I p_t(x,y) w(y) dy and pair integrals
//! ∫_A ∫_B p_t(x,y) w(x) w(y) dy dx.

use super::rank1::Rank1;
use crate::error::{Error, Result};
use crate::quad::{self, Estimate};
use crate::region::{intersect_intervals, normalize, Interval};
use crate::specfun::{normal_pdf, normal_sf};

/// Calibration constant of the truncation radius R(t) = √(c·t·ln(1/tol)).
pub const WINDOW_C: f64 = 6.0;
/// Kernel mass tolerated outside the truncation window.
pub const WINDOW_TOL: f64 = 1e-14;

pub fn window_radius(t: f64) -> f64 {
    (WINDOW_C * t * (1.0 / WINDOW_TOL).ln()).sqrt()
}

/// h(v) = φ(v) − |v|Φ(−|v|), so that ∫^v Φ = max(v, 0) + h(v).
fn h(v: f64) -> f64 {
    if v.is_infinite() {
        return 0.0;
    }
    let a = v.abs();
    normal_pdf(a) - a * normal_sf(a)
}

/// Φ(b) − Φ(a) without cancellation in the tails.
fn normal_mass(a: f64, b: f64) -> f64 {
    if !(b > a) {
        return 0.0;
    }
    if a >= 0.0 {
        normal_sf(a) - normal_sf(b)
    } else if b <= 0.0 {
        normal_sf(-b) - normal_sf(-a)
    } else {
        1.0 - normal_sf(b) - normal_sf(-a)
    }
}

impl Rank1 {
    /// Points where the mass of p_t(x, ·) is concentrated: windows around ±x.
    pub fn window(&self, t: f64, x: f64) -> Vec<Interval> {
        let r = window_radius(t);
        let mut w = vec![(x - r, x + r)];
        if self.kappa() > 0.0 {
            w.push((-x - r, -x + r));
        }
        normalize(w)
    }

    /// ∫_lo^hi p_t(x, y) w(y) dy.
    pub fn mass_in(&self, t: f64, x: f64, lo: f64, hi: f64) -> f64 {
        if self.kappa() == 0.0 {
            let s = (2.0 * t).sqrt();
            return normal_mass((lo - x) / s, (hi - x) / s);
        }
        self.mass_in_numeric(t, x, lo, hi, 1e-12).value
    }

    pub fn mass_in_numeric(&self, t: f64, x: f64, lo: f64, hi: f64, rel_tol: f64) -> Estimate {
        let pieces = intersect_intervals(&self.window(t, x), &[(lo, hi)]);
        quad::adaptive_union(
            |y| self.eval(t, x, y) * self.weight(y),
            &pieces,
            &[0.0, x, -x],
            rel_tol,
            1e-17,
            200_000,
        )
    }

    /// ∫_a ∫_b p_t(x, y) w(x) w(y) dy dx for intervals a, b.
    pub fn pair(&self, t: f64, a: Interval, b: Interval, rel_tol: f64) -> Result<f64> {
        if !(a.1 > a.0) || !(b.1 > b.0) {
            return Ok(0.0);
        }
        if self.kappa() == 0.0 {
            return Ok(gaussian_pair(t, a, b));
        }
        let a_unb = a.0.is_infinite() || a.1.is_infinite();
        let b_unb = b.0.is_infinite() || b.1.is_infinite();
        if a_unb && b_unb {
            return Err(Error::Unsupported(
                "pair integral with both sets unbounded in a weighted coordinate".into(),
            ));
        }
        // integrate over the bounded side
        let (a, b) = if a_unb { (b, a) } else { (a, b) };
        let r = window_radius(t);
        let reach = normalize(vec![(b.0 - r, b.1 + r), (-b.1 - r, -b.0 + r)]);
        let outer = intersect_intervals(&reach, &[a]);
        let mut br = vec![0.0];
        // contact layers of width R(t) at the endpoints of b and their mirrors
        for v in [b.0, b.1] {
            if v.is_finite() {
                br.extend([v, -v, v - r, v + r, -v - r, -v + r]);
            }
        }
        let est = quad::adaptive_union(
            |x| self.weight(x) * self.mass_in_numeric(t, x, b.0, b.1, rel_tol * 0.1).value,
            &outer,
            &br,
            rel_tol,
            1e-300,
            20_000,
        );
        Ok(est.value)
    }
}

/// Closed form of ∫_a ∫_b (4πt)^{-1/2} e^{-(x-y)²/4t} dy dx.
pub fn gaussian_pair(t: f64, a: Interval, b: Interval) -> f64 {
    if !(a.1 > a.0) || !(b.1 > b.0) {
        return 0.0;
    }
    let s = (2.0 * t).sqrt();
    let overlap = (a.1.min(b.1) - a.0.max(b.0)).max(0.0);
    let term = |u: f64| if u.is_nan() { 0.0 } else { h(u / s) };
    overlap + s * (term(b.1 - a.0) - term(b.1 - a.1) - term(b.0 - a.0) + term(b.0 - a.1))
}
