//! Extrapolation of s·F(s) to s → 0⁺ from values on a small s-grid.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitModel {
    Linear,
    Quadratic,
}

/// s-grid values of s·F(s), the fitted limit and fit diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitEstimate {
    pub s: Vec<f64>,
    pub raw: Vec<f64>,
    pub s_times: Vec<f64>,
    pub limit: f64,
    pub slope: f64,
    pub model: FitModel,
    /// Root-mean-square residual of the fit.
    pub residual: f64,
    pub target: Option<f64>,
    pub reliable: bool,
}

impl LimitEstimate {
    pub fn relative_error(&self) -> Option<f64> {
        self.target.map(|t| (self.limit - t).abs() / t.abs().max(1e-12))
    }
}

/// Points used by the linear model.
pub const LINEAR_POINTS: usize = 4;
/// Linear residual (relative to |L|) above which the quadratic model is used.
pub const QUADRATIC_SWITCH: f64 = 1e-3;

/// Least-squares polynomial fit of degree `deg`; returns coefficients (low
/// order first) and the RMS residual.
pub fn polyfit(x: &[f64], y: &[f64], deg: usize) -> Result<(Vec<f64>, f64)> {
    let m = deg + 1;
    if x.len() < m || x.len() != y.len() {
        return Err(Error::Precondition(format!(
            "need at least {m} points for a degree-{deg} fit, got {}",
            x.len()
        )));
    }
    let mut a = nalgebra::DMatrix::<f64>::zeros(x.len(), m);
    for (i, &xi) in x.iter().enumerate() {
        let mut p = 1.0;
        for j in 0..m {
            a[(i, j)] = p;
            p *= xi;
        }
    }
    let b = nalgebra::DVector::from_column_slice(y);
    let svd = a.clone().svd(true, true);
    let coef = svd
        .solve(&b, 1e-14)
        .map_err(|e| Error::Accuracy(format!("least squares failed: {e}")))?;
    let r = &a * &coef - b;
    let rms = (r.norm_squared() / x.len() as f64).sqrt();
    Ok((coef.iter().copied().collect(), rms))
}

/// Fits s·F(s) ≈ L + a·s on the smallest grid points, falling back to a
/// quadratic over the whole grid when the linear residual is too large.
pub fn extrapolate(s: &[f64], raw: &[f64], target: Option<f64>) -> Result<LimitEstimate> {
    if s.len() != raw.len() || s.is_empty() {
        return Err(Error::Precondition("s-grid and values differ in length".into()));
    }
    if s.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::Precondition("s-grid must be positive".into()));
    }
    let s_times: Vec<f64> = s.iter().zip(raw).map(|(a, b)| a * b).collect();
    if s_times.iter().any(|v| !v.is_finite()) {
        return Err(Error::Divergent("s·F(s) is not finite on the grid".into()));
    }
    let mut order: Vec<usize> = (0..s.len()).collect();
    order.sort_by(|&i, &j| s[i].partial_cmp(&s[j]).unwrap());
    let take = LINEAR_POINTS.min(s.len());
    let xs: Vec<f64> = order[..take].iter().map(|&i| s[i]).collect();
    let ys: Vec<f64> = order[..take].iter().map(|&i| s_times[i]).collect();

    let (coef, res) = if take >= 2 { polyfit(&xs, &ys, 1)? } else { (vec![ys[0], 0.0], 0.0) };
    let mut est = LimitEstimate {
        s: s.to_vec(),
        raw: raw.to_vec(),
        s_times: s_times.clone(),
        limit: coef[0],
        slope: coef[1],
        model: FitModel::Linear,
        residual: res,
        target,
        reliable: true,
    };
    let scale = coef[0].abs().max(1e-12);
    if res > QUADRATIC_SWITCH * scale {
        if s.len() >= 4 {
            let all_x: Vec<f64> = order.iter().map(|&i| s[i]).collect();
            let all_y: Vec<f64> = order.iter().map(|&i| s_times[i]).collect();
            let (q, qres) = polyfit(&all_x, &all_y, 2)?;
            est.limit = q[0];
            est.slope = q[1];
            est.model = FitModel::Quadratic;
            est.residual = qres;
            est.reliable = qres <= QUADRATIC_SWITCH * q[0].abs().max(1e-12);
        } else {
            est.reliable = false;
        }
    }
    // an oscillating tail (sign changes of successive differences beyond the
    // residual) makes the extrapolation untrustworthy
    let ordered: Vec<f64> = order.iter().map(|&i| s_times[i]).collect();
    let diffs: Vec<f64> = ordered.windows(2).map(|w| w[1] - w[0]).collect();
    let flips = diffs
        .windows(2)
        .filter(|w| w[0] * w[1] < 0.0 && w[0].abs().min(w[1].abs()) > 3.0 * est.residual.max(1e-15))
        .count();
    if flips > 0 {
        est.reliable = false;
    }
    Ok(est)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn exact_linear_trend_is_recovered() {
        let s = [0.16, 0.08, 0.04, 0.02, 0.01];
        let raw: Vec<f64> = s.iter().map(|&x| (4.0 + 3.0 * x) / x).collect();
        let e = extrapolate(&s, &raw, Some(4.0)).unwrap();
        assert_eq!(e.model, FitModel::Linear);
        assert_relative_eq!(e.limit, 4.0, max_relative = 1e-12);
        assert!(e.relative_error().unwrap() < 1e-12);
        assert!(e.reliable);
    }

    #[test]
    fn curved_trend_switches_to_quadratic() {
        let s = [0.4, 0.3, 0.2, 0.1, 0.05];
        let raw: Vec<f64> = s.iter().map(|&x| (1.0 + x + 20.0 * x * x) / x).collect();
        let e = extrapolate(&s, &raw, None).unwrap();
        assert_eq!(e.model, FitModel::Quadratic);
        assert_relative_eq!(e.limit, 1.0, max_relative = 1e-10);
    }

    #[test]
    fn oscillating_values_are_flagged() {
        let s = [0.05, 0.04, 0.03, 0.02, 0.01];
        let v = [1.0, 1.3, 0.7, 1.4, 0.6];
        let raw: Vec<f64> = s.iter().zip(v).map(|(a, b)| b / a).collect();
        let e = extrapolate(&s, &raw, None).unwrap();
        assert!(!e.reliable);
    }
}
