//! Numeric checks of the structural properties of relative perimeters:
//! G-invariance, subadditivity, monotonicity in the domain, classical
//! scaling and translation invariance, and non-monotonicity in the set.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{perimeter_classical, perimeter_dunkl};
use crate::error::{Error, Result};
use crate::heat::HeatKernel;
use crate::quad::QuadSpec;
use crate::region::{AxisBox, Region};

/// Floor of the relative tolerance used by the inequality and equality checks.
pub const PROPERTY_TOL_FLOOR: f64 = 1e-6;
/// Relative tolerance of the classical translation check.
pub const TRANSLATION_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyCheck {
    pub name: String,
    pub instance: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub passed: bool,
    /// Recorded for reference; does not count towards the verdict.
    pub informational: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertiesReport {
    pub s: f64,
    pub tolerance: f64,
    pub checks: Vec<PropertyCheck>,
    pub all_passed: bool,
}

impl PropertiesReport {
    pub fn by_name(&self, name: &str) -> Vec<&PropertyCheck> {
        self.checks.iter().filter(|c| c.name == name).collect()
    }
}

fn random_region(rng: &mut ChaCha8Rng, bbox: &AxisBox) -> Region {
    let n = bbox.dim();
    let mut pick = |k: usize| {
        let (lo, hi) = bbox.side(k);
        let w = hi - lo;
        let a = lo + w * rng.gen_range(0.02..0.6);
        let b = a + w * rng.gen_range(0.1..0.35);
        (a, b.min(hi - 0.01 * w))
    };
    if n == 1 {
        let first = pick(0);
        let (lo, hi) = bbox.side(0);
        let gap = first.1 + (hi - lo) * 0.05;
        if gap < hi - 0.1 * (hi - lo) {
            let len = (hi - 0.02 * (hi - lo) - gap) * 0.5;
            let second = (gap, gap + len);
            return Region::intervals(&[first, second]);
        }
        return Region::interval(first.0, first.1);
    }
    let sides: Vec<(f64, f64)> = (0..n).map(&mut pick).collect();
    let lo: Vec<f64> = sides.iter().map(|s| s.0).collect();
    let hi: Vec<f64> = sides.iter().map(|s| s.1).collect();
    Region::axis_box(&lo, &hi)
}

/// Ω ∩ (box of half the size of Ω's bounding box, same centre).
fn shrunken_domain(omega: &Region, bbox: &AxisBox) -> Region {
    let lo: Vec<f64> = (0..bbox.dim()).map(|k| 0.75 * bbox.lo[k] + 0.25 * bbox.hi[k]).collect();
    let hi: Vec<f64> = (0..bbox.dim()).map(|k| 0.25 * bbox.lo[k] + 0.75 * bbox.hi[k]).collect();
    omega.intersection(&Region::axis_box(&lo, &hi))
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-300)
}

/// Runs every property check on the given regions followed by `count`
/// random boxes (interval pairs on the line) inside Ω's bounding box.
pub fn perimeter_properties_suite(
    kernel: &HeatKernel,
    regions: &[Region],
    omega: &Region,
    s: f64,
    quad: &QuadSpec,
    count: usize,
    seed: u64,
) -> Result<PropertiesReport> {
    let n = kernel.dim();
    if omega.dim() != n || regions.iter().any(|r| r.dim() != n) {
        return Err(Error::Precondition("region and kernel dimensions differ".into()));
    }
    if !omega.is_bounded() || regions.iter().any(|r| !r.is_bounded()) {
        return Err(Error::Precondition("the properties suite needs bounded regions".into()));
    }
    let bbox = omega.bbox().cloned().ok_or_else(|| Error::Precondition("Ω needs a bounding box".into()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sets: Vec<Region> = regions.to_vec();
    sets.extend((0..count).map(|_| random_region(&mut rng, &bbox)));
    if sets.is_empty() {
        return Err(Error::Precondition("no regions to check".into()));
    }
    let tol = 2.0 * quad.rel_tol.max(PROPERTY_TOL_FLOOR);
    let per = |a: &Region, o: &Region| -> Result<f64> { Ok(perimeter_dunkl(kernel, a, o, s, quad)?.value) };
    let spec = kernel.measure().spec();
    let signs: Vec<Vec<f64>> = spec
        .group()
        .iter()
        .filter_map(|g| spec.as_signs(g))
        .filter(|sg| sg.iter().any(|&v| v < 0.0))
        .collect();
    let u1 = shrunken_domain(omega, &bbox);
    let mut checks = Vec::new();
    let mut push = |name: &str, instance: usize, lhs: f64, rhs: f64, passed: bool, informational: bool| {
        checks.push(PropertyCheck { name: name.into(), instance, lhs, rhs, passed, informational })
    };

    for (i, a) in sets.iter().enumerate() {
        let base = per(a, omega)?;
        for sg in &signs {
            let g = per(&a.reflected(sg), &omega.reflected(sg))?;
            push("g_invariance", i, g, base, close(g, base, tol), false);
        }
        let b = &sets[(i + 1) % sets.len()];
        if sets.len() > 1 {
            let union = per(&a.union(b), omega)?;
            let sum = base + per(b, omega)?;
            push("subadditivity", i, union, sum, union <= sum + tol * sum.abs(), false);
        }
        let inner = per(a, &u1)?;
        push("domain_monotonicity", i, inner, base, inner <= base + tol * base.abs(), false);
    }

    // classical scaling and translation on at most three instances
    let r = 2.0;
    let shift: Vec<f64> = (0..n).map(|k| 0.37 + 0.11 * k as f64).collect();
    let classical = HeatKernel::classical(n);
    for (i, a) in sets.iter().take(3).enumerate() {
        let p = perimeter_classical(a, omega, s, quad)?.value;
        let scaled = perimeter_classical(&a.affine(r, &vec![0.0; n])?, &omega.affine(r, &vec![0.0; n])?, s, quad)?.value;
        let factor = r.powf(n as f64 - 2.0 * s);
        push("scaling", i, scaled, factor * p, close(scaled, factor * p, tol.max(1e-6)), false);
        let moved = perimeter_classical(&a.affine(1.0, &shift)?, &omega.affine(1.0, &shift)?, s, quad)?.value;
        push("translation", i, moved, p, close(moved, p, TRANSLATION_TOL), false);
        if i == 0 {
            // the normalized κ = 0 object through the heat semigroup
            let p0 = perimeter_dunkl(&classical, a, omega, s, quad)?.value;
            let p0s = perimeter_dunkl(&classical, &a.affine(r, &vec![0.0; n])?, &omega.affine(r, &vec![0.0; n])?, s, quad)?.value;
            push("scaling_per0_ratio", i, p0s / p0, factor, close(p0s / p0, factor, 1e-3), true);
        }
    }

    // a set strictly inside another with the larger perimeter
    if n == 1 {
        let a = Region::intervals(&[(0.0, 1.0), (1.1, 2.0)]);
        let b = Region::interval(0.0, 2.0);
        let whole = Region::whole(1);
        let pa = perimeter_classical(&a, &whole, s, quad)?.value;
        let pb = perimeter_classical(&b, &whole, s, quad)?.value;
        push("non_monotonicity_classical", 0, pa, pb, pa > pb, false);
        let ka = per(&a, &whole)?;
        let kb = per(&b, &whole)?;
        push("non_monotonicity", 0, ka, kb, ka > kb, false);
    }

    let all_passed = checks.iter().all(|c| c.passed || c.informational);
    Ok(PropertiesReport { s, tolerance: tol, checks, all_passed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dunkl::{RootSystemSpec, WeightedMeasure};

    #[test]
    fn classical_suite_passes() {
        let k = HeatKernel::classical(1);
        let q = QuadSpec::default().with_rel_tol(1e-7);
        let rep = perimeter_properties_suite(&k, &[Region::interval(0.2, 0.9)], &Region::interval(-1.0, 1.5), 0.2, &q, 2, 7)
            .unwrap();
        assert!(rep.all_passed, "{rep:#?}");
        assert!(rep.by_name("g_invariance").is_empty());
        assert_eq!(rep.by_name("translation").len(), 3);
    }

    #[test]
    fn reflection_invariance_with_weight() {
        let k = HeatKernel::new(WeightedMeasure::new(RootSystemSpec::z2(0.5).unwrap())).unwrap();
        let q = QuadSpec::default().with_rel_tol(1e-6);
        let rep = perimeter_properties_suite(&k, &[Region::interval(0.5, 1.0)], &Region::interval(-1.0, 2.0), 0.2, &q, 0, 1)
            .unwrap();
        let g = rep.by_name("g_invariance");
        assert_eq!(g.len(), 1);
        assert!(g[0].passed, "{rep:#?}");
        assert!(rep.all_passed, "{rep:#?}");
    }
}
