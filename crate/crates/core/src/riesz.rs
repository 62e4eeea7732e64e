//! Spatial Riesz interactions ∫_A ∫_B |x − y|^{−n−σ} dy dx for disjoint
//! sets, σ ∈ (0, 1).

use crate::error::{Error, Result};
use crate::quad::{self, Estimate, Level};
use crate::region::{BoxSet, Interval, Region};

fn check_sigma(sigma: f64) -> Result<()> {
    if sigma > 0.0 && sigma < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("Riesz exponent σ must lie in (0,1), got {sigma}")))
    }
}

/// ∫_a ∫_b |x − y|^{−1−σ} dy dx for two disjoint intervals (closed form).
pub fn interval_pair(a: Interval, b: Interval, sigma: f64) -> Result<f64> {
    check_sigma(sigma)?;
    if !(a.1 > a.0) || !(b.1 > b.0) {
        return Ok(0.0);
    }
    // orient so that a lies to the left of b
    let (a, b) = if a.1 <= b.0 {
        (a, b)
    } else if b.1 <= a.0 {
        ((-a.1, -a.0), (-b.1, -b.0))
    } else {
        return Err(Error::Precondition(format!("intervals {a:?} and {b:?} overlap")));
    };
    let g = |u: f64| u.powf(1.0 - sigma) / (sigma * (1.0 - sigma));
    let unb_left = a.0 == f64::NEG_INFINITY;
    let unb_right = b.1 == f64::INFINITY;
    Ok(match (unb_left, unb_right) {
        (true, true) => f64::INFINITY,
        (false, true) => g(b.0 - a.0) - g(b.0 - a.1),
        (true, false) => g(b.1 - a.1) - g(b.0 - a.1),
        (false, false) => g(b.1 - a.1) - g(b.0 - a.1) - g(b.1 - a.0) + g(b.0 - a.0),
    })
}

/// Sum of [`interval_pair`] over two interval unions.
pub fn intervals_pair(a: &[Interval], b: &[Interval], sigma: f64) -> Result<f64> {
    let mut total = 0.0;
    for &x in a {
        for &y in b {
            total += interval_pair(x, y, sigma)?;
        }
    }
    Ok(total)
}

/// ∫_B |x − y|^{−n−σ} dy in polar coordinates around x (n = 1, 2).
pub fn point_potential(x: &[f64], b: &Region, sigma: f64, rel_tol: f64, max_evals: usize) -> Result<f64> {
    let radial = |iv: &[Interval]| -> f64 {
        iv.iter()
            .map(|&(r0, r1)| {
                let hi = if r1.is_finite() { r1.powf(-sigma) } else { 0.0 };
                (r0.powf(-sigma) - hi) / sigma
            })
            .sum()
    };
    let missing = || Error::Unsupported("region without ray intersections".into());
    match x.len() {
        1 => {
            let p = b.ray_intervals(x, &[1.0]).ok_or_else(missing)?;
            let m = b.ray_intervals(x, &[-1.0]).ok_or_else(missing)?;
            Ok(radial(&p) + radial(&m))
        }
        2 => {
            b.ray_intervals(x, &[1.0, 0.0]).ok_or_else(missing)?;
            let mut breaks = Vec::new();
            if let Some(c) = b.cells() {
                for bx in &c.boxes {
                    for &u in &[bx.lo[0], bx.hi[0]] {
                        for &v in &[bx.lo[1], bx.hi[1]] {
                            if u.is_finite() && v.is_finite() {
                                breaks.push((v - x[1]).atan2(u - x[0]).rem_euclid(std::f64::consts::TAU));
                            }
                        }
                    }
                }
            }
            breaks.extend((1..8).map(|k| k as f64 * std::f64::consts::FRAC_PI_4));
            let est = quad::adaptive(
                |th: f64| {
                    let d = [th.cos(), th.sin()];
                    radial(&b.ray_intervals(x, &d).unwrap_or_default())
                },
                0.0,
                std::f64::consts::TAU,
                &breaks,
                rel_tol,
                1e-300,
                max_evals,
            );
            Ok(est.value)
        }
        n => Err(Error::Unsupported(format!("spatial Riesz potentials are implemented for n ≤ 2, got n = {n}"))),
    }
}

/// ∫_A ∫_B |x − y|^{−n−σ} dy dx; A and B must be disjoint.
///
/// One-dimensional interval unions use the closed form; in the plane A must
/// be a union of bounded boxes and the inner integral runs along rays.
pub fn region_pair(a: &Region, b: &Region, sigma: f64, rel_tol: f64, max_evals: usize) -> Result<Estimate> {
    check_sigma(sigma)?;
    let n = a.dim();
    if b.dim() != n {
        return Err(Error::Precondition("region dimensions differ".into()));
    }
    if n == 1 {
        if let (Some(ca), Some(cb)) = (a.cells(), b.cells()) {
            let v = intervals_pair(&cell_intervals(&ca), &cell_intervals(&cb), sigma)?;
            return Ok(Estimate { value: v, error: 0.0, evals: 0, converged: true });
        }
    }
    if n > 2 {
        return Err(Error::Unsupported(format!("spatial Riesz interactions are implemented for n ≤ 2, got n = {n}")));
    }
    let ca = a.cells().ok_or_else(|| Error::Unsupported("outer set must be a union of boxes".into()))?;
    let cb = b.cells();
    let (ca, b) = match (ca.is_bounded(), &cb) {
        (true, _) => (ca, b.clone()),
        (false, Some(cb)) if cb.is_bounded() => (cb.clone(), a.clone()),
        _ => return Err(Error::Unsupported("both sets unbounded".into())),
    };
    let inner_tol = rel_tol * 0.1;
    let mut acc = Estimate::zero();
    let breaks_for = |k: usize| -> Vec<f64> {
        let mut v = Vec::new();
        if let Some(c) = b.cells() {
            for bx in &c.boxes {
                v.push(bx.lo[k]);
                v.push(bx.hi[k]);
            }
        }
        v.retain(|x| x.is_finite());
        v
    };
    let mut err: Option<Error> = None;
    for bx in &ca.boxes {
        let est = quad::nested(
            &|x: &[f64]| match point_potential(x, &b, sigma, inner_tol, max_evals) {
                Ok(v) => v,
                Err(_) => f64::NAN,
            },
            n,
            &|k, _p: &[f64]| Level { intervals: vec![bx.side(k)], breaks: breaks_for(k) },
            rel_tol,
            1e-300,
            max_evals,
        );
        if est.value.is_nan() {
            err = Some(Error::Unsupported("region without ray intersections".into()));
        }
        acc = acc.add(est);
    }
    match err {
        Some(e) => Err(e),
        None => Ok(acc),
    }
}

/// Intervals of a one-dimensional box set.
pub fn cell_intervals(c: &BoxSet) -> Vec<Interval> {
    c.boxes.iter().map(|b| b.side(0)).collect()
}
