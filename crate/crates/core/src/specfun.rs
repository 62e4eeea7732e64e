//! Special functions used by the closed forms: Gamma, the lower incomplete
//! gamma function, modified Bessel functions of the first kind and the
//! surface area of the unit sphere.
//!
//! Everything here is pure and allocation free.

use std::f64::consts::PI;

use crate::error::{domain, Result};

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

fn lanczos_sum(x: f64) -> f64 {
    let mut acc = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    acc
}

/// Γ(x) for x > 0.
pub fn gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(domain(format!("gamma requires x > 0, got {x}")));
    }
    Ok(gamma_unchecked(x))
}

pub(crate) fn gamma_unchecked(x: f64) -> f64 {
    if x < 0.5 {
        return PI / ((PI * x).sin() * gamma_unchecked(1.0 - x));
    }
    if x > 171.6 {
        return f64::INFINITY;
    }
    let z = x - 1.0;
    let t = z + LANCZOS_G + 0.5;
    // split the power to keep t^(z+0.5) finite up to the overflow threshold
    let half = t.powf(0.5 * (z + 0.5));
    (2.0 * PI).sqrt() * half * (half * (-t).exp()) * lanczos_sum(z)
}

/// ln Γ(x) for x > 0.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(domain(format!("ln_gamma requires x > 0, got {x}")));
    }
    Ok(ln_gamma_unchecked(x))
}

pub(crate) fn ln_gamma_unchecked(x: f64) -> f64 {
    if x < 0.5 {
        return (PI / (PI * x).sin()).ln() - ln_gamma_unchecked(1.0 - x);
    }
    let z = x - 1.0;
    let t = z + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + lanczos_sum(z).ln()
}

/// Lower incomplete gamma function γ(p, u) = ∫₀ᵘ e^{-t} t^{p-1} dt.
pub fn gamma_inc_lower(p: f64, u: f64) -> Result<f64> {
    if !(p > 0.0) || !p.is_finite() {
        return Err(domain(format!("gamma_inc_lower requires p > 0, got {p}")));
    }
    if !(u >= 0.0) {
        return Err(domain(format!("gamma_inc_lower requires u >= 0, got {u}")));
    }
    Ok(gamma_unchecked(p) * gamma_p(p, u))
}

/// Regularized lower incomplete gamma P(p, u) = γ(p, u) / Γ(p).
pub fn gamma_p(p: f64, u: f64) -> f64 {
    if u <= 0.0 {
        return 0.0;
    }
    if u.is_infinite() {
        return 1.0;
    }
    let log_prefactor = -u + p * u.ln() - ln_gamma_unchecked(p);
    if u < p + 1.0 {
        // ascending series
        let mut term = 1.0 / p;
        let mut sum = term;
        let mut k = 1.0;
        while term.abs() > sum.abs() * 1e-17 && k < 10_000.0 {
            term *= u / (p + k);
            sum += term;
            k += 1.0;
        }
        (log_prefactor.exp() * sum).min(1.0)
    } else {
        1.0 - upper_tail_cf(p, u, log_prefactor)
    }
}

/// Regularized upper tail Q(p, u) by the modified Lentz continued fraction.
fn upper_tail_cf(p: f64, u: f64, log_prefactor: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = u + 1.0 - p;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..10_000 {
        let an = -(i as f64) * (i as f64 - p);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    (log_prefactor.exp() * h).clamp(0.0, 1.0)
}

/// Modified Bessel function of the first kind I_ν(z), ν ≥ -1/2, z ≥ 0.
pub fn bessel_i(nu: f64, z: f64) -> Result<f64> {
    check_bessel_args(nu, z)?;
    if z == 0.0 {
        return Ok(bessel_at_zero(nu));
    }
    if z <= BESSEL_SERIES_MAX {
        Ok(bessel_i_series(nu, z))
    } else {
        Ok(bessel_i_scaled_asymptotic(nu, z) * z.exp())
    }
}

/// Exponentially scaled e^{-z} I_ν(z); finite for every z ≥ 0 when ν > -1/2.
pub fn bessel_i_scaled(nu: f64, z: f64) -> Result<f64> {
    check_bessel_args(nu, z)?;
    Ok(bessel_i_scaled_unchecked(nu, z))
}

pub(crate) fn bessel_i_scaled_unchecked(nu: f64, z: f64) -> f64 {
    if z == 0.0 {
        return bessel_at_zero(nu);
    }
    if z <= BESSEL_SERIES_MAX {
        bessel_i_series_log_scaled(nu, z, -z)
    } else {
        bessel_i_scaled_asymptotic(nu, z)
    }
}

/// e^{-z} [I_ν(z) - I_{ν+1}(z)] without the cancellation of the naive
/// difference at large z.
pub(crate) fn bessel_i_scaled_diff(nu: f64, z: f64) -> f64 {
    if z <= BESSEL_SERIES_MAX {
        return bessel_i_scaled_unchecked(nu, z) - bessel_i_scaled_unchecked(nu + 1.0, z);
    }
    let mu0 = 4.0 * nu * nu;
    let mu1 = 4.0 * (nu + 1.0) * (nu + 1.0);
    let mut a0 = 1.0;
    let mut a1 = 1.0;
    let mut sum = 0.0;
    let mut prev = f64::INFINITY;
    for k in 1..200 {
        let kf = k as f64;
        let odd = (2.0 * kf - 1.0) * (2.0 * kf - 1.0);
        a0 *= -(mu0 - odd) / (kf * 8.0 * z);
        a1 *= -(mu1 - odd) / (kf * 8.0 * z);
        let term = a0 - a1;
        if term.abs() > prev && k > 2 {
            break;
        }
        sum += term;
        prev = term.abs();
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum / (2.0 * PI * z).sqrt()
}

pub const BESSEL_SERIES_MAX: f64 = 30.0;

fn check_bessel_args(nu: f64, z: f64) -> Result<()> {
    if !(nu >= -0.5) || !nu.is_finite() {
        return Err(domain(format!("bessel_i requires nu >= -1/2, got {nu}")));
    }
    if !(z >= 0.0) {
        return Err(domain(format!("bessel_i requires z >= 0, got {z}")));
    }
    Ok(())
}

fn bessel_at_zero(nu: f64) -> f64 {
    if nu == 0.0 {
        1.0
    } else if nu > 0.0 {
        0.0
    } else {
        f64::INFINITY
    }
}

fn bessel_i_series(nu: f64, z: f64) -> f64 {
    bessel_i_series_log_scaled(nu, z, 0.0)
}

/// Ascending series Σ (z/2)^{2k+ν} / (k! Γ(k+ν+1)), multiplied by e^{log_scale}.
fn bessel_i_series_log_scaled(nu: f64, z: f64, log_scale: f64) -> f64 {
    let half = 0.5 * z;
    let q = half * half;
    let mut term = (nu * half.ln() - ln_gamma_unchecked(nu + 1.0) + log_scale).exp();
    let mut sum = term;
    let mut k = 0.0;
    loop {
        k += 1.0;
        term *= q / (k * (k + nu));
        sum += term;
        if term < sum * 1e-17 || k > 500.0 {
            break;
        }
    }
    sum
}

/// Hankel expansion of e^{-z} I_ν(z) for large z.
fn bessel_i_scaled_asymptotic(nu: f64, z: f64) -> f64 {
    let mu = 4.0 * nu * nu;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut prev = f64::INFINITY;
    for k in 1..200 {
        let kf = k as f64;
        let odd = (2.0 * kf - 1.0) * (2.0 * kf - 1.0);
        term *= -(mu - odd) / (kf * 8.0 * z);
        if term.abs() > prev {
            break;
        }
        sum += term;
        prev = term.abs();
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum / (2.0 * PI * z).sqrt()
}

/// Surface area ω_{n-1} = 2π^{n/2} / Γ(n/2) of the unit sphere in ℝⁿ.
pub fn sphere_area(n: usize) -> Result<f64> {
    if n == 0 {
        return Err(domain("sphere_area requires n >= 1"));
    }
    let h = n as f64 / 2.0;
    Ok(2.0 * PI.powf(h) / gamma_unchecked(h))
}

pub fn erf(x: f64) -> f64 {
    libm::erf(x)
}

pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}

/// Standard normal density.
pub(crate) fn normal_pdf(v: f64) -> f64 {
    (-0.5 * v * v).exp() / (2.0 * PI).sqrt()
}

/// Standard normal upper tail 1 - Φ(v).
pub(crate) fn normal_sf(v: f64) -> f64 {
    0.5 * erfc(v / std::f64::consts::SQRT_2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    /// ∫₀^∞ t^{p-1} e^{-t} dt by the substitution t = e^v and a wide
    /// trapezoid rule; double-exponential decay makes the sum converge fast.
    fn gamma_by_quadrature(p: f64) -> f64 {
        let h = 1e-3;
        let mut sum = 0.0;
        let mut v: f64 = -60.0;
        while v < 5.0 {
            let t: f64 = v.exp();
            sum += (p * v - t).exp();
            v += h;
        }
        sum * h
    }

    /// I_n(z) = (1/π) ∫₀^π e^{z cos θ} cos(nθ) dθ, periodic trapezoid rule.
    fn bessel_by_angle(n: i32, z: f64) -> f64 {
        let m = 4000;
        let h = PI / m as f64;
        let mut sum = 0.0;
        for k in 0..=m {
            let th = k as f64 * h;
            let w = if k == 0 || k == m { 0.5 } else { 1.0 };
            sum += w * (z * th.cos()).exp() * (n as f64 * th).cos();
        }
        sum * h / PI
    }

    #[test]
    fn gamma_examples() {
        assert_relative_eq!(gamma(1.0).unwrap(), 1.0, max_relative = 1e-14);
        assert_relative_eq!(gamma(0.5).unwrap(), PI.sqrt(), max_relative = 1e-13);
        let oracle = gamma_by_quadrature(0.6);
        assert_relative_eq!(gamma(0.6).unwrap(), oracle, max_relative = 1e-12);
        assert_relative_eq!(oracle, 1.489_192_248_812_817, max_relative = 1e-12);
        assert!(gamma(0.0).is_err());
        assert!(gamma(-1.5).is_err());
    }

    #[test]
    fn gamma_half_squared_is_pi() {
        let g = gamma(0.5).unwrap();
        assert_relative_eq!(g * g, PI, max_relative = 1e-12);
    }

    #[test]
    fn incomplete_gamma_examples() {
        for &u in &[0.0, 0.1, 1.0, 3.7, 25.0] {
            let v = gamma_inc_lower(1.0, u).unwrap();
            assert_relative_eq!(v, 1.0 - (-u as f64).exp(), max_relative = 1e-13, epsilon = 1e-300);
        }
        assert_eq!(gamma_inc_lower(2.5, 0.0).unwrap(), 0.0);
        let exact = 1.0 - 2.0 * (-1.0f64).exp();
        assert_relative_eq!(gamma_inc_lower(2.0, 1.0).unwrap(), exact, max_relative = 1e-13);
        assert_relative_eq!(exact, 0.264_241_117_657_115_4, max_relative = 1e-14);
        assert!(gamma_inc_lower(0.0, 1.0).is_err());
    }

    #[test]
    fn incomplete_gamma_matches_direct_quadrature() {
        // ∫₀¹ t e^{-t} dt on a fine Simpson grid
        let n = 2000;
        let h = 1.0 / n as f64;
        let f = |t: f64| t * (-t).exp();
        let mut s = f(0.0) + f(1.0);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * f(i as f64 * h);
        }
        let simpson = s * h / 3.0;
        assert_relative_eq!(gamma_inc_lower(2.0, 1.0).unwrap(), simpson, max_relative = 1e-11);
    }

    #[test]
    fn bessel_examples() {
        for &z in &[0.3, 1.0, 5.0, 11.9, 12.5, 29.0, 31.0, 45.0] {
            let exact = (2.0 / (PI * z)).sqrt() * z.sinh();
            assert_relative_eq!(bessel_i(0.5, z).unwrap(), exact, max_relative = 1e-12);
        }
        assert_eq!(bessel_i(0.0, 0.0).unwrap(), 1.0);
        assert_eq!(bessel_i(1.3, 0.0).unwrap(), 0.0);
        let oracle = bessel_by_angle(1, 2.0);
        assert_relative_eq!(bessel_i(1.0, 2.0).unwrap(), oracle, max_relative = 1e-12);
        assert_relative_eq!(oracle, 1.590_636_854_637_329, max_relative = 1e-13);
        assert!(bessel_i(-0.7, 1.0).is_err());
        assert!(bessel_i(0.5, -1.0).is_err());
    }

    #[test]
    fn bessel_accuracy_across_range() {
        for n in 0..3 {
            for k in 1..=50 {
                let z = k as f64;
                let oracle = bessel_by_angle(n, z);
                let v = bessel_i(n as f64, z).unwrap();
                assert_relative_eq!(v, oracle, max_relative = 1e-10);
            }
        }
    }

    #[test]
    fn scaled_difference_matches_direct() {
        for &nu in &[-0.5, 0.0, 0.25, 1.0] {
            for &z in &[31.0, 60.0, 400.0] {
                let direct = bessel_i_scaled(nu, z).unwrap() - bessel_i_scaled(nu + 1.0, z).unwrap();
                let diff = bessel_i_scaled_diff(nu, z);
                assert_relative_eq!(diff, direct, max_relative = 1e-9);
            }
        }
    }

    #[test]
    fn sphere_area_examples() {
        assert_relative_eq!(sphere_area(1).unwrap(), 2.0, max_relative = 1e-14);
        assert_relative_eq!(sphere_area(2).unwrap(), 2.0 * PI, max_relative = 1e-14);
        assert_relative_eq!(sphere_area(3).unwrap(), 4.0 * PI, max_relative = 1e-14);
        assert!(sphere_area(0).is_err());
    }

    proptest! {
        #[test]
        fn gamma_recurrence(x in 0.5f64..20.0) {
            let lhs = gamma(x + 1.0).unwrap();
            let rhs = x * gamma(x).unwrap();
            prop_assert!(((lhs - rhs) / rhs).abs() < 1e-12);
        }

        #[test]
        fn incomplete_gamma_monotone(p in 0.1f64..10.0, u1 in 0.0f64..40.0, du in 0.0f64..10.0) {
            let a = gamma_inc_lower(p, u1).unwrap();
            let b = gamma_inc_lower(p, u1 + du).unwrap();
            prop_assert!(b >= a);
        }

        #[test]
        fn incomplete_gamma_saturates(p in 0.1f64..10.0) {
            let ratio = gamma_inc_lower(p, 50.0 + 10.0 * p).unwrap() / gamma(p).unwrap();
            prop_assert!(ratio <= 1.0 && ratio >= 1.0 - 1e-9);
        }

        #[test]
        fn bessel_recurrence(nu in 0.5f64..3.0, z in 0.5f64..20.0) {
            let lhs = bessel_i(nu - 1.0, z).unwrap() - bessel_i(nu + 1.0, z).unwrap();
            let rhs = 2.0 * nu / z * bessel_i(nu, z).unwrap();
            prop_assert!(((lhs - rhs) / rhs).abs() < 1e-8);
        }
    }
}
