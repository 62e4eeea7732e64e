//! Scalar fields on ℝⁿ with support and kink hints for quadrature.

use serde::{Deserialize, Serialize};

use crate::dunkl::WeightedMeasure;
use crate::error::{Error, Result};
use crate::quad::{self, QuadSpec};
use crate::region::{AxisBox, Region, Shape};

/// Tail level below which a decaying field is treated as zero.
pub const DECAY_CUTOFF: f64 = 1e-17;

/// Analytic description of a field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum FieldSpec {
    Zero,
    Constant { value: f64 },
    Indicator { shape: Shape },
    /// height·∏ max(0, 1 − |x_i − c_i|/h)
    Tent { center: Vec<f64>, half_width: f64, height: f64 },
    /// amplitude·exp(−|x − c|²/(2 width²))
    Gaussian { center: Vec<f64>, width: f64, amplitude: f64 },
    /// f(x / factor)
    Dilated { factor: f64, field: Box<FieldSpec> },
    Scaled { factor: f64, field: Box<FieldSpec> },
    Sum(Box<FieldSpec>, Box<FieldSpec>),
    Max(Box<FieldSpec>, Box<FieldSpec>),
    Min(Box<FieldSpec>, Box<FieldSpec>),
}

/// Where a field can be nonzero.
#[derive(Debug, Clone, PartialEq)]
pub enum Support {
    Empty,
    Bounded(AxisBox),
    /// Nonzero everywhere but below [`DECAY_CUTOFF`] outside the box.
    Decaying(AxisBox),
    Unbounded,
}

impl Support {
    pub fn window(&self) -> Option<&AxisBox> {
        match self {
            Support::Bounded(b) | Support::Decaying(b) => Some(b),
            _ => None,
        }
    }

    fn hull(a: &Support, b: &Support) -> Support {
        use Support::*;
        match (a, b) {
            (Empty, x) | (x, Empty) => x.clone(),
            (Unbounded, _) | (_, Unbounded) => Unbounded,
            _ => {
                let (x, y) = (a.window().unwrap(), b.window().unwrap());
                let bb = AxisBox {
                    lo: x.lo.iter().zip(&y.lo).map(|(p, q)| p.min(*q)).collect(),
                    hi: x.hi.iter().zip(&y.hi).map(|(p, q)| p.max(*q)).collect(),
                };
                if matches!(a, Decaying(_)) || matches!(b, Decaying(_)) {
                    Decaying(bb)
                } else {
                    Bounded(bb)
                }
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct ScalarField {
    dim: usize,
    spec: FieldSpec,
    region: Option<Region>,
}

impl ScalarField {
    pub fn new(dim: usize, spec: FieldSpec) -> Result<Self> {
        check(&spec, dim)?;
        let region = match &spec {
            FieldSpec::Indicator { shape } => Some(Region::tagged(dim, shape.clone())?),
            _ => None,
        };
        Ok(ScalarField { dim, spec, region })
    }

    pub fn indicator(region: &Region) -> Result<Self> {
        let shape = region
            .shape()
            .ok_or_else(|| Error::Unsupported("indicator fields need a tagged region".into()))?;
        Self::new(region.dim(), FieldSpec::Indicator { shape: shape.clone() })
    }

    pub fn constant(dim: usize, value: f64) -> Self {
        Self::new(dim, FieldSpec::Constant { value }).unwrap()
    }

    pub fn zero(dim: usize) -> Self {
        Self::new(dim, FieldSpec::Zero).unwrap()
    }

    pub fn tent(center: &[f64], half_width: f64, height: f64) -> Result<Self> {
        Self::new(center.len(), FieldSpec::Tent { center: center.to_vec(), half_width, height })
    }

    pub fn gaussian(center: &[f64], width: f64, amplitude: f64) -> Result<Self> {
        Self::new(center.len(), FieldSpec::Gaussian { center: center.to_vec(), width, amplitude })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn spec(&self) -> &FieldSpec {
        &self.spec
    }

    /// The region when the field is an indicator.
    pub fn indicator_region(&self) -> Option<&Region> {
        self.region.as_ref()
    }

    pub fn max(&self, other: &ScalarField) -> Result<Self> {
        Self::new(self.dim, FieldSpec::Max(Box::new(self.spec.clone()), Box::new(other.spec.clone())))
    }

    pub fn min(&self, other: &ScalarField) -> Result<Self> {
        Self::new(self.dim, FieldSpec::Min(Box::new(self.spec.clone()), Box::new(other.spec.clone())))
    }

    pub fn sum(&self, other: &ScalarField) -> Result<Self> {
        Self::new(self.dim, FieldSpec::Sum(Box::new(self.spec.clone()), Box::new(other.spec.clone())))
    }

    pub fn dilated(&self, factor: f64) -> Result<Self> {
        Self::new(self.dim, FieldSpec::Dilated { factor, field: Box::new(self.spec.clone()) })
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        eval(&self.spec, x)
    }

    /// Constant value when the field is constant on all of ℝⁿ.
    pub fn as_constant(&self) -> Option<f64> {
        match self.spec {
            FieldSpec::Zero => Some(0.0),
            FieldSpec::Constant { value } => Some(value),
            _ => None,
        }
    }

    pub fn support(&self) -> Support {
        support(&self.spec, self.dim)
    }

    /// Interior points of coordinate k where the field or its derivative
    /// jumps (for tagged shapes, only the axis-box edges are known).
    pub fn kinks(&self, k: usize) -> Vec<f64> {
        let mut v = Vec::new();
        kinks(&self.spec, k, &mut v);
        v.retain(|x| x.is_finite());
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v.dedup();
        v
    }

    /// ∫ |f|^p dμ_κ.
    pub fn lp_norm_pow(&self, p: f64, measure: &WeightedMeasure, quad: &QuadSpec) -> Result<f64> {
        if let Some(r) = &self.region {
            return Ok(measure.measure_of(r, quad)?.value);
        }
        if let Some(c) = self.as_constant() {
            return if c == 0.0 { Ok(0.0) } else { Err(Error::Divergent("nonzero constant is not in L^p".into())) };
        }
        let bb = match self.support() {
            Support::Empty => return Ok(0.0),
            Support::Unbounded => return Err(Error::Unsupported("L^p norm of a field with unbounded support".into())),
            Support::Bounded(b) | Support::Decaying(b) => b,
        };
        let n = self.dim;
        let est = quad::nested(
            &|x: &[f64]| self.eval(x).abs().powf(p) * measure.weight(x),
            n,
            &|k, _prefix: &[f64]| {
                let mut br = self.kinks(k);
                br.push(0.0);
                quad::Level { intervals: vec![bb.side(k)], breaks: br }
            },
            quad.rel_tol,
            0.0,
            quad.max_evals,
        );
        Ok(est.value)
    }
}

fn check(spec: &FieldSpec, n: usize) -> Result<()> {
    let bad = |m: &str| Err(Error::Precondition(m.to_string()));
    match spec {
        FieldSpec::Zero => Ok(()),
        FieldSpec::Constant { value } => {
            if value.is_finite() {
                Ok(())
            } else {
                bad("constant must be finite")
            }
        }
        FieldSpec::Indicator { shape } => Region::tagged(n, shape.clone()).map(|_| ()),
        FieldSpec::Tent { center, half_width, height } => {
            if center.len() != n || !(*half_width > 0.0) || !height.is_finite() || center.iter().any(|c| !c.is_finite())
            {
                bad("tent needs an n-vector center, half_width > 0 and a finite height")
            } else {
                Ok(())
            }
        }
        FieldSpec::Gaussian { center, width, amplitude } => {
            if center.len() != n || !(*width > 0.0) || !amplitude.is_finite() || center.iter().any(|c| !c.is_finite())
            {
                bad("gaussian needs an n-vector center, width > 0 and a finite amplitude")
            } else {
                Ok(())
            }
        }
        FieldSpec::Dilated { factor, field } | FieldSpec::Scaled { factor, field } => {
            if !(factor.is_finite() && *factor != 0.0) {
                return bad("factor must be finite and nonzero");
            }
            if matches!(spec, FieldSpec::Dilated { .. }) && *factor < 0.0 {
                return bad("dilation factor must be positive");
            }
            check(field, n)
        }
        FieldSpec::Sum(a, b) | FieldSpec::Max(a, b) | FieldSpec::Min(a, b) => {
            check(a, n)?;
            check(b, n)
        }
    }
}

fn eval(spec: &FieldSpec, x: &[f64]) -> f64 {
    match spec {
        FieldSpec::Zero => 0.0,
        FieldSpec::Constant { value } => *value,
        FieldSpec::Indicator { shape } => {
            if shape.contains(x) {
                1.0
            } else {
                0.0
            }
        }
        FieldSpec::Tent { center, half_width, height } => {
            let mut v = *height;
            for (xi, ci) in x.iter().zip(center) {
                v *= (1.0 - (xi - ci).abs() / half_width).max(0.0);
            }
            v
        }
        FieldSpec::Gaussian { center, width, amplitude } => {
            let d2: f64 = x.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum();
            amplitude * (-d2 / (2.0 * width * width)).exp()
        }
        FieldSpec::Dilated { factor, field } => {
            let y: Vec<f64> = x.iter().map(|v| v / factor).collect();
            eval(field, &y)
        }
        FieldSpec::Scaled { factor, field } => factor * eval(field, x),
        FieldSpec::Sum(a, b) => eval(a, x) + eval(b, x),
        FieldSpec::Max(a, b) => eval(a, x).max(eval(b, x)),
        FieldSpec::Min(a, b) => eval(a, x).min(eval(b, x)),
    }
}

fn support(spec: &FieldSpec, n: usize) -> Support {
    match spec {
        FieldSpec::Zero => Support::Empty,
        FieldSpec::Constant { value } => {
            if *value == 0.0 {
                Support::Empty
            } else {
                Support::Unbounded
            }
        }
        FieldSpec::Indicator { shape } => match shape.bbox(n) {
            Some(b) if b.is_empty() => Support::Empty,
            Some(b) => Support::Bounded(b),
            None => Support::Unbounded,
        },
        FieldSpec::Tent { center, half_width, .. } => Support::Bounded(AxisBox {
            lo: center.iter().map(|c| c - half_width).collect(),
            hi: center.iter().map(|c| c + half_width).collect(),
        }),
        FieldSpec::Gaussian { center, width, .. } => {
            let r = width * (2.0 * (1.0 / DECAY_CUTOFF).ln()).sqrt();
            Support::Decaying(AxisBox {
                lo: center.iter().map(|c| c - r).collect(),
                hi: center.iter().map(|c| c + r).collect(),
            })
        }
        FieldSpec::Dilated { factor, field } => match support(field, n) {
            Support::Bounded(b) => Support::Bounded(scale_box(&b, *factor)),
            Support::Decaying(b) => Support::Decaying(scale_box(&b, *factor)),
            s => s,
        },
        FieldSpec::Scaled { factor, field } => {
            if *factor == 0.0 {
                Support::Empty
            } else {
                support(field, n)
            }
        }
        FieldSpec::Sum(a, b) | FieldSpec::Max(a, b) | FieldSpec::Min(a, b) => {
            let (sa, sb) = (support(a, n), support(b, n));
            // max/min with a field that is zero off its support keeps zero
            // only where both vanish, which the hull covers
            Support::hull(&sa, &sb)
        }
    }
}

fn scale_box(b: &AxisBox, f: f64) -> AxisBox {
    AxisBox { lo: b.lo.iter().map(|v| v * f).collect(), hi: b.hi.iter().map(|v| v * f).collect() }
}

fn kinks(spec: &FieldSpec, k: usize, out: &mut Vec<f64>) {
    match spec {
        FieldSpec::Zero | FieldSpec::Constant { .. } | FieldSpec::Gaussian { .. } => {}
        FieldSpec::Indicator { shape } => shape_kinks(shape, k, out),
        FieldSpec::Tent { center, half_width, .. } => {
            out.extend([center[k] - half_width, center[k], center[k] + half_width]);
        }
        FieldSpec::Dilated { factor, field } => {
            let mut inner = Vec::new();
            kinks(field, k, &mut inner);
            out.extend(inner.into_iter().map(|v| v * factor));
        }
        FieldSpec::Scaled { field, .. } => kinks(field, k, out),
        FieldSpec::Sum(a, b) | FieldSpec::Max(a, b) | FieldSpec::Min(a, b) => {
            kinks(a, k, out);
            kinks(b, k, out);
        }
    }
}

fn shape_kinks(shape: &Shape, k: usize, out: &mut Vec<f64>) {
    match shape {
        Shape::IntervalUnion(iv) if k == 0 => {
            for [a, b] in iv {
                out.extend([a.0, b.0]);
            }
        }
        Shape::AxisBox { lo, hi } => out.extend([lo[k].0, hi[k].0]),
        Shape::Ball { center, radius } => out.extend([center[k] - radius, center[k] + radius]),
        Shape::HalfSpace { normal, offset } => {
            if normal.iter().enumerate().all(|(i, v)| i == k || *v == 0.0) && normal[k] != 0.0 {
                out.push(offset / normal[k]);
            }
        }
        Shape::Complement(s) => shape_kinks(s, k, out),
        Shape::Union(v) | Shape::Intersection(v) => v.iter().for_each(|s| shape_kinks(s, k, out)),
        _ => {}
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn evaluation_and_support() {
        let t = ScalarField::tent(&[0.0], 1.0, 2.0).unwrap();
        assert_eq!(t.eval(&[0.5]), 1.0);
        assert_eq!(t.eval(&[1.5]), 0.0);
        assert_eq!(t.kinks(0), vec![-1.0, 0.0, 1.0]);
        let g = ScalarField::gaussian(&[1.0], 0.1, 1.0).unwrap();
        assert!(matches!(g.support(), Support::Decaying(_)));
        let i = ScalarField::indicator(&Region::interval(0.0, 1.0)).unwrap();
        assert_eq!(i.support(), Support::Bounded(AxisBox { lo: vec![0.0], hi: vec![1.0] }));
        assert_eq!(ScalarField::constant(1, 3.0).support(), Support::Unbounded);
        let m = t.max(&i).unwrap();
        assert_eq!(m.eval(&[0.9]), 1.0);
        assert_eq!(m.kinks(0), vec![-1.0, 0.0, 1.0]);
        assert!(ScalarField::tent(&[0.0, 0.0], 1.0, 1.0).unwrap().dilated(-1.0).is_err());
    }

    #[test]
    fn lp_norms() {
        let m = WeightedMeasure::trivial(1);
        let q = QuadSpec::default().with_rel_tol(1e-11);
        let w = 0.1;
        let amp = (w * std::f64::consts::PI.sqrt()).powf(-0.5);
        let g = ScalarField::gaussian(&[0.0], w, amp).unwrap();
        assert_relative_eq!(g.lp_norm_pow(2.0, &m, &q).unwrap(), 1.0, max_relative = 1e-9);
        let t = ScalarField::tent(&[0.3], 0.5, 1.0).unwrap();
        assert_relative_eq!(t.lp_norm_pow(1.0, &m, &q).unwrap(), 0.5, max_relative = 1e-10);
        assert_relative_eq!(t.lp_norm_pow(2.0, &m, &q).unwrap(), 1.0 / 3.0, max_relative = 1e-10);
    }

    #[test]
    fn serde_round_trip() {
        let f = FieldSpec::Max(
            Box::new(FieldSpec::Tent { center: vec![0.0], half_width: 1.0, height: 1.0 }),
            Box::new(FieldSpec::Indicator { shape: Shape::IntervalUnion(vec![]) }),
        );
        let s = serde_json::to_string(&f).unwrap();
        assert_eq!(serde_json::from_str::<FieldSpec>(&s).unwrap(), f);
    }
}
