//! The rank-one Dunkl heat kernel for the weight (√2|x|)^{2κ}.

use crate::dunkl::rank_one_mm;
use crate::error::Result;
use crate::quad::{gauss_jacobi, Rule};
use crate::specfun;

/// Beyond this |z| the Dunkl kernel is evaluated through Bessel functions.
pub const JACOBI_MAX_Z: f64 = 30.0;

/// One coordinate of a product Dunkl kernel.
#[derive(Debug, Clone)]
pub struct Rank1 {
    kappa: f64,
    inv_c: f64,
    gamma_half: f64,
    jacobi_pref: f64,
    rules: Vec<(f64, Rule)>,
}

impl Rank1 {
    pub fn new(kappa: f64) -> Result<Self> {
        let c = rank_one_mm(kappa)?;
        let gamma_half = specfun::gamma(kappa + 0.5)?;
        let (jacobi_pref, rules) = if kappa > 0.0 {
            let pref = gamma_half / (specfun::gamma(kappa)? * std::f64::consts::PI.sqrt());
            let rules = [(2.0, 16), (8.0, 24), (JACOBI_MAX_Z, 48)]
                .iter()
                .map(|&(zmax, n)| (zmax, gauss_jacobi(n, kappa - 1.0, kappa)))
                .collect();
            (pref, rules)
        } else {
            (0.0, Vec::new())
        };
        Ok(Rank1 { kappa, inv_c: 1.0 / c, gamma_half, jacobi_pref, rules })
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// (√2|x|)^{2κ}
    pub fn weight(&self, x: f64) -> f64 {
        if self.kappa == 0.0 {
            1.0
        } else {
            (std::f64::consts::SQRT_2 * x.abs()).powf(2.0 * self.kappa)
        }
    }

    /// e^{−|z|} E_κ(z) with E_κ the Dunkl kernel E_κ(u, v) at uv = z.
    pub fn dunkl_scaled(&self, z: f64) -> f64 {
        if self.kappa == 0.0 {
            return (z - z.abs()).exp();
        }
        let az = z.abs();
        if az > JACOBI_MAX_Z {
            return self.dunkl_scaled_bessel(z);
        }
        let rule = &self.rules.iter().find(|(zmax, _)| az <= *zmax).unwrap().1;
        let mut acc = 0.0;
        for (x, w) in rule.nodes.iter().zip(&rule.weights) {
            acc += w * (z * x - az).exp();
        }
        self.jacobi_pref * acc
    }

    /// Bessel representation
    /// E_κ(z) = Γ(κ+½)(|z|/2)^{½−κ}[I_{κ−½}(|z|) + sgn(z) I_{κ+½}(|z|)], scaled by e^{−|z|}.
    pub fn dunkl_scaled_bessel(&self, z: f64) -> f64 {
        if self.kappa == 0.0 {
            return (z - z.abs()).exp();
        }
        let az = z.abs();
        if az < 1e-12 {
            return 1.0 + z / (2.0 * self.kappa + 1.0);
        }
        let nu = self.kappa - 0.5;
        let bracket = if z > 0.0 {
            specfun::bessel_i_scaled_unchecked(nu, az) + specfun::bessel_i_scaled_unchecked(nu + 1.0, az)
        } else if az > specfun::BESSEL_SERIES_MAX {
            specfun::bessel_i_scaled_diff(nu, az)
        } else {
            specfun::bessel_i_scaled_unchecked(nu, az) - specfun::bessel_i_scaled_unchecked(nu + 1.0, az)
        };
        self.gamma_half * (-nu * (0.5 * az).ln()).exp() * bracket
    }

    /// p_t(x, y) for this coordinate; t > 0 is assumed.
    pub fn eval(&self, t: f64, x: f64, y: f64) -> f64 {
        if self.kappa == 0.0 {
            let d = x - y;
            return (-d * d / (4.0 * t)).exp() / (4.0 * std::f64::consts::PI * t).sqrt();
        }
        let d = x.abs() - y.abs();
        let z = x * y / (2.0 * t);
        self.inv_c * (2.0 * t).powf(-(self.kappa + 0.5)) * (-d * d / (4.0 * t)).exp() * self.dunkl_scaled(z)
    }

    /// Same kernel through the Bessel representation only.
    pub fn eval_bessel(&self, t: f64, x: f64, y: f64) -> f64 {
        let d = x.abs() - y.abs();
        let z = x * y / (2.0 * t);
        self.inv_c * (2.0 * t).powf(-(self.kappa + 0.5)) * (-d * d / (4.0 * t)).exp() * self.dunkl_scaled_bessel(z)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn jacobi_and_bessel_routes_agree() {
        for &k in &[0.1, 0.25, 0.5, 1.0, 2.3] {
            let r = Rank1::new(k).unwrap();
            for i in -60..=60 {
                let z = i as f64 * 0.5;
                assert_relative_eq!(r.dunkl_scaled(z), r.dunkl_scaled_bessel(z), max_relative = 1e-10);
            }
        }
    }

    #[test]
    fn half_multiplicity_closed_form() {
        // κ = 1/2: E(z) = Γ(1)[I_0(z) + I_1(z)], and at z = 0 the kernel is 1
        let r = Rank1::new(0.5).unwrap();
        assert_relative_eq!(r.dunkl_scaled(0.0), 1.0, max_relative = 1e-13);
        let i0 = specfun::bessel_i(0.0, 1.3).unwrap();
        let i1 = specfun::bessel_i(1.0, 1.3).unwrap();
        assert_relative_eq!(r.dunkl_scaled(-1.3), (-1.3f64).exp() * (i0 - i1), max_relative = 1e-12);
    }

    #[test]
    fn zero_multiplicity_is_gaussian() {
        let r = Rank1::new(0.0).unwrap();
        assert_relative_eq!(r.eval(1.0 / (4.0 * std::f64::consts::PI), 0.3, 0.3), 1.0, max_relative = 1e-15);
        assert_relative_eq!(r.eval(0.25, 0.0, 1.0), (-1.0f64).exp() / std::f64::consts::PI.sqrt(), max_relative = 1e-15);
        assert_relative_eq!(r.eval_bessel(0.7, 0.2, -1.1), r.eval(0.7, 0.2, -1.1), max_relative = 1e-14);
    }
}
