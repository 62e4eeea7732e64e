//! Measurable sets: tagged analytic shapes, predicate-only regions, exact
//! axis-box decompositions and line/ray intersections.

use std::fmt;
use std::sync::Arc;

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::fractal::WeierstrassSpec;

/// A coordinate that may be ±∞; serialized as a JSON number or as the
/// strings "inf" / "-inf".
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Coord(pub f64);

impl Serialize for Coord {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.is_finite() {
            s.serialize_f64(self.0)
        } else if self.0 > 0.0 {
            s.serialize_str("inf")
        } else if self.0 < 0.0 {
            s.serialize_str("-inf")
        } else {
            s.serialize_str("nan")
        }
    }
}

impl<'de> Deserialize<'de> for Coord {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = Coord;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a number or one of \"inf\", \"-inf\"")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Coord, E> {
                Ok(Coord(v))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Coord, E> {
                Ok(Coord(v as f64))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Coord, E> {
                Ok(Coord(v as f64))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Coord, E> {
                match v {
                    "inf" | "+inf" | "infinity" => Ok(Coord(f64::INFINITY)),
                    "-inf" | "-infinity" => Ok(Coord(f64::NEG_INFINITY)),
                    _ => Err(E::invalid_value(de::Unexpected::Str(v), &self)),
                }
            }
        }
        d.deserialize_any(V)
    }
}

/// Analytic descriptor of a region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Shape {
    Empty,
    Whole,
    /// Union of open intervals on the line.
    IntervalUnion(Vec<[Coord; 2]>),
    AxisBox { lo: Vec<Coord>, hi: Vec<Coord> },
    Ball { center: Vec<f64>, radius: f64 },
    /// {x : ⟨normal, x⟩ > offset}
    HalfSpace { normal: Vec<f64>, offset: f64 },
    /// Planar sector with apex at the origin: polar angle in [start, end).
    Sector { start: f64, end: f64 },
    /// {(x, y) : lower(x) < y < W(x)} with lower(x) = c0 + c1 x + c2 x².
    WeierstrassDomain { weierstrass: WeierstrassSpec, lower: [f64; 3] },
    Complement(Box<Shape>),
    Union(Vec<Shape>),
    Intersection(Vec<Shape>),
}

pub type Interval = (f64, f64);

/// Sorts and merges overlapping or touching intervals, dropping empty ones.
pub fn normalize(mut v: Vec<Interval>) -> Vec<Interval> {
    v.retain(|&(a, b)| b > a);
    v.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    let mut out: Vec<Interval> = Vec::with_capacity(v.len());
    for (a, b) in v {
        if let Some(last) = out.last_mut() {
            if a <= last.1 {
                last.1 = last.1.max(b);
                continue;
            }
        }
        out.push((a, b));
    }
    out
}

pub fn intersect_intervals(a: &[Interval], b: &[Interval]) -> Vec<Interval> {
    let mut out = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        let lo = a[i].0.max(b[j].0);
        let hi = a[i].1.min(b[j].1);
        if hi > lo {
            out.push((lo, hi));
        }
        if a[i].1 < b[j].1 {
            i += 1;
        } else {
            j += 1;
        }
    }
    out
}

pub fn complement_intervals(a: &[Interval]) -> Vec<Interval> {
    let mut out = Vec::new();
    let mut cur = f64::NEG_INFINITY;
    for &(lo, hi) in a {
        if lo > cur {
            out.push((cur, lo));
        }
        cur = cur.max(hi);
    }
    if cur < f64::INFINITY {
        out.push((cur, f64::INFINITY));
    }
    out
}

pub fn interval_measure(a: &[Interval]) -> f64 {
    a.iter().map(|(lo, hi)| hi - lo).sum()
}

/// Open axis-aligned box with possibly infinite sides.
#[derive(Debug, Clone, PartialEq)]
pub struct AxisBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl AxisBox {
    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn whole(n: usize) -> Self {
        AxisBox { lo: vec![f64::NEG_INFINITY; n], hi: vec![f64::INFINITY; n] }
    }

    pub fn is_empty(&self) -> bool {
        self.lo.iter().zip(&self.hi).any(|(a, b)| !(b > a))
    }

    pub fn is_bounded(&self) -> bool {
        self.lo.iter().chain(&self.hi).all(|v| v.is_finite())
    }

    pub fn side(&self, k: usize) -> Interval {
        (self.lo[k], self.hi[k])
    }

    pub fn intersect(&self, other: &AxisBox) -> AxisBox {
        AxisBox {
            lo: self.lo.iter().zip(&other.lo).map(|(a, b)| a.max(*b)).collect(),
            hi: self.hi.iter().zip(&other.hi).map(|(a, b)| a.min(*b)).collect(),
        }
    }

    /// self ∖ other as at most 2n disjoint boxes.
    pub fn minus(&self, other: &AxisBox) -> Vec<AxisBox> {
        if self.intersect(other).is_empty() {
            return vec![self.clone()];
        }
        let mut rest = self.clone();
        let mut out = Vec::new();
        for k in 0..self.dim() {
            if rest.lo[k] < other.lo[k] {
                let mut piece = rest.clone();
                piece.hi[k] = other.lo[k];
                out.push(piece);
                rest.lo[k] = other.lo[k];
            }
            if rest.hi[k] > other.hi[k] {
                let mut piece = rest.clone();
                piece.lo[k] = other.hi[k];
                out.push(piece);
                rest.hi[k] = other.hi[k];
            }
        }
        out
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter().zip(self.lo.iter().zip(&self.hi)).all(|(v, (a, b))| v > a && v < b)
    }
}

/// Finite disjoint union of axis boxes.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxSet {
    pub dim: usize,
    pub boxes: Vec<AxisBox>,
}

impl BoxSet {
    pub fn empty(dim: usize) -> Self {
        BoxSet { dim, boxes: Vec::new() }
    }

    pub fn whole(dim: usize) -> Self {
        BoxSet { dim, boxes: vec![AxisBox::whole(dim)] }
    }

    pub fn is_empty(&self) -> bool {
        self.boxes.is_empty()
    }

    pub fn is_bounded(&self) -> bool {
        self.boxes.iter().all(AxisBox::is_bounded)
    }

    pub fn intersect(&self, other: &BoxSet) -> BoxSet {
        let mut boxes = Vec::new();
        for a in &self.boxes {
            for b in &other.boxes {
                let c = a.intersect(b);
                if !c.is_empty() {
                    boxes.push(c);
                }
            }
        }
        BoxSet { dim: self.dim, boxes }
    }

    pub fn minus(&self, other: &BoxSet) -> BoxSet {
        let mut cur = self.boxes.clone();
        for b in &other.boxes {
            cur = cur.iter().flat_map(|a| a.minus(b)).filter(|c| !c.is_empty()).collect();
        }
        BoxSet { dim: self.dim, boxes: cur }
    }

    pub fn complement(&self) -> BoxSet {
        BoxSet::whole(self.dim).minus(self)
    }

    pub fn union(&self, other: &BoxSet) -> BoxSet {
        let mut boxes = self.boxes.clone();
        boxes.extend(other.minus(self).boxes);
        BoxSet { dim: self.dim, boxes }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.boxes.iter().any(|b| b.contains(x))
    }

    /// Bounding box of the union, `None` when unbounded or empty.
    pub fn bbox(&self) -> Option<AxisBox> {
        let first = self.boxes.first()?;
        let mut lo = first.lo.clone();
        let mut hi = first.hi.clone();
        for b in &self.boxes[1..] {
            for k in 0..self.dim {
                lo[k] = lo[k].min(b.lo[k]);
                hi[k] = hi[k].max(b.hi[k]);
            }
        }
        let bb = AxisBox { lo, hi };
        bb.is_bounded().then_some(bb)
    }
}

type Predicate = Arc<dyn Fn(&[f64]) -> bool + Send + Sync>;

/// A measurable set: analytic tag, or an indicator predicate with a
/// bounding box.
#[derive(Clone)]
pub struct Region {
    dim: usize,
    shape: Option<Shape>,
    predicate: Option<Predicate>,
    bbox: Option<AxisBox>,
}

impl fmt::Debug for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Region")
            .field("dim", &self.dim)
            .field("shape", &self.shape)
            .field("predicate", &self.predicate.is_some())
            .field("bbox", &self.bbox)
            .finish()
    }
}

impl Region {
    pub fn tagged(dim: usize, shape: Shape) -> Result<Region> {
        shape.check_dim(dim)?;
        let bbox = shape.bbox(dim);
        Ok(Region { dim, shape: Some(shape), predicate: None, bbox })
    }

    /// Region known only through its indicator; the predicate must be false
    /// outside `bbox`.
    pub fn from_predicate<F>(dim: usize, bbox: AxisBox, f: F) -> Region
    where
        F: Fn(&[f64]) -> bool + Send + Sync + 'static,
    {
        assert_eq!(bbox.dim(), dim);
        Region { dim, shape: None, predicate: Some(Arc::new(f)), bbox: Some(bbox) }
    }

    pub fn interval(a: f64, b: f64) -> Region {
        Region::tagged(1, Shape::IntervalUnion(vec![[Coord(a), Coord(b)]])).unwrap()
    }

    pub fn intervals(iv: &[(f64, f64)]) -> Region {
        Region::tagged(1, Shape::IntervalUnion(iv.iter().map(|&(a, b)| [Coord(a), Coord(b)]).collect()))
            .unwrap()
    }

    pub fn axis_box(lo: &[f64], hi: &[f64]) -> Region {
        Region::tagged(
            lo.len(),
            Shape::AxisBox {
                lo: lo.iter().map(|&v| Coord(v)).collect(),
                hi: hi.iter().map(|&v| Coord(v)).collect(),
            },
        )
        .unwrap()
    }

    pub fn ball(center: &[f64], radius: f64) -> Region {
        Region::tagged(center.len(), Shape::Ball { center: center.to_vec(), radius }).unwrap()
    }

    pub fn whole(dim: usize) -> Region {
        Region::tagged(dim, Shape::Whole).unwrap()
    }

    pub fn empty(dim: usize) -> Region {
        Region::tagged(dim, Shape::Empty).unwrap()
    }

    pub fn half_space(normal: &[f64], offset: f64) -> Region {
        Region::tagged(normal.len(), Shape::HalfSpace { normal: normal.to_vec(), offset }).unwrap()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn shape(&self) -> Option<&Shape> {
        self.shape.as_ref()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        match (&self.shape, &self.predicate) {
            (Some(s), _) => s.contains(x),
            (None, Some(p)) => {
                self.bbox.as_ref().map_or(true, |b| b.contains(x)) && p(x)
            }
            (None, None) => false,
        }
    }

    pub fn bbox(&self) -> Option<&AxisBox> {
        self.bbox.as_ref()
    }

    pub fn is_bounded(&self) -> bool {
        self.bbox.is_some()
    }

    /// Exact disjoint axis-box decomposition, when the tag admits one.
    pub fn cells(&self) -> Option<BoxSet> {
        self.shape.as_ref()?.cells(self.dim)
    }

    /// Box cells, also recovered from exact line intersections in n = 1.
    pub fn box_cells(&self) -> Option<BoxSet> {
        if let Some(c) = self.cells() {
            return Some(c);
        }
        if self.dim == 1 {
            let iv = self.line_intervals(&[0.0], &[1.0])?;
            return Some(BoxSet {
                dim: 1,
                boxes: iv.into_iter().map(|(a, b)| AxisBox { lo: vec![a], hi: vec![b] }).collect(),
            });
        }
        None
    }

    /// Parameters τ ∈ ℝ with origin + τ·dir inside the region.
    pub fn line_intervals(&self, origin: &[f64], dir: &[f64]) -> Option<Vec<Interval>> {
        self.shape.as_ref()?.line_intervals(origin, dir)
    }

    /// Radii ρ ≥ 0 with origin + ρ·dir inside the region.
    pub fn ray_intervals(&self, origin: &[f64], dir: &[f64]) -> Option<Vec<Interval>> {
        let line = self.line_intervals(origin, dir)?;
        Some(intersect_intervals(&line, &[(0.0, f64::INFINITY)]))
    }

    fn combine(&self, other: &Region, op: fn(Shape, Shape) -> Shape) -> Region {
        assert_eq!(self.dim, other.dim);
        match (&self.shape, &other.shape) {
            (Some(a), Some(b)) => Region::tagged(self.dim, op(a.clone(), b.clone())).unwrap(),
            _ => {
                let (a, b) = (self.clone(), other.clone());
                let is_union = matches!(op(Shape::Empty, Shape::Whole), Shape::Union(_));
                let bbox = match (&a.bbox, &b.bbox) {
                    (Some(x), Some(y)) if is_union => Some(AxisBox {
                        lo: x.lo.iter().zip(&y.lo).map(|(p, q)| p.min(*q)).collect(),
                        hi: x.hi.iter().zip(&y.hi).map(|(p, q)| p.max(*q)).collect(),
                    }),
                    (Some(x), Some(y)) => Some(x.intersect(y)),
                    (Some(x), None) | (None, Some(x)) if !is_union => Some(x.clone()),
                    _ => None,
                };
                Region {
                    dim: self.dim,
                    shape: None,
                    predicate: Some(Arc::new(move |x: &[f64]| {
                        if is_union {
                            a.contains(x) || b.contains(x)
                        } else {
                            a.contains(x) && b.contains(x)
                        }
                    })),
                    bbox,
                }
            }
        }
    }

    pub fn intersection(&self, other: &Region) -> Region {
        self.combine(other, |a, b| Shape::Intersection(vec![a, b]))
    }

    pub fn union(&self, other: &Region) -> Region {
        self.combine(other, |a, b| Shape::Union(vec![a, b]))
    }

    /// Complement; only tagged regions can be complemented exactly.
    pub fn complement(&self) -> Result<Region> {
        match &self.shape {
            Some(s) => Region::tagged(self.dim, Shape::Complement(Box::new(s.clone()))),
            None => Err(Error::Unsupported(
                "complement of a predicate-only region has no exact representation".into(),
            )),
        }
    }

    /// Image under x ↦ diag(signs)·x.
    pub fn reflected(&self, signs: &[f64]) -> Region {
        match &self.shape {
            Some(s) => Region::tagged(self.dim, s.map_affine(signs, &vec![0.0; self.dim])).unwrap(),
            None => {
                let a = self.clone();
                let sg = signs.to_vec();
                let bbox = self.bbox.as_ref().map(|b| reflect_box(b, signs));
                Region {
                    dim: self.dim,
                    shape: None,
                    predicate: Some(Arc::new(move |x: &[f64]| {
                        let y: Vec<f64> = x.iter().zip(&sg).map(|(v, s)| v * s).collect();
                        a.contains(&y)
                    })),
                    bbox,
                }
            }
        }
    }

    /// Image under x ↦ scale·x + shift (tagged regions only).
    pub fn affine(&self, scale: f64, shift: &[f64]) -> Result<Region> {
        let s = self
            .shape
            .as_ref()
            .ok_or_else(|| Error::Unsupported("affine image of a predicate-only region".into()))?;
        let scales = vec![scale; self.dim];
        Region::tagged(self.dim, s.map_affine(&scales, shift))
    }

    /// Number of random probes (out of `probes`) where tag and predicate
    /// disagree; meaningful only for regions that carry both.
    pub fn tag_predicate_mismatches(&self, other_predicate: &dyn Fn(&[f64]) -> bool, probes: usize, seed: u64) -> usize {
        let Some(bb) = self.bbox.clone() else { return 0 };
        let seqs = crate::quad::qmc::replicates(self.dim, 1, seed);
        let mut u = vec![0.0; self.dim];
        let mut x = vec![0.0; self.dim];
        let mut bad = 0;
        for i in 0..probes as u64 {
            seqs[0].point(i, &mut u);
            for k in 0..self.dim {
                x[k] = bb.lo[k] + u[k] * (bb.hi[k] - bb.lo[k]);
            }
            if self.contains(&x) != other_predicate(&x) {
                bad += 1;
            }
        }
        bad
    }
}

fn reflect_box(b: &AxisBox, signs: &[f64]) -> AxisBox {
    let mut lo = b.lo.clone();
    let mut hi = b.hi.clone();
    for k in 0..b.dim() {
        if signs[k] < 0.0 {
            lo[k] = -b.hi[k];
            hi[k] = -b.lo[k];
        }
    }
    AxisBox { lo, hi }
}

impl Shape {
    fn check_dim(&self, n: usize) -> Result<()> {
        let bad = |what: &str| Err(Error::Precondition(format!("{what} does not match dimension {n}")));
        match self {
            Shape::Empty | Shape::Whole => Ok(()),
            Shape::IntervalUnion(iv) => {
                if n != 1 {
                    return bad("interval_union");
                }
                if iv.iter().any(|[a, b]| a.0.is_nan() || b.0.is_nan()) {
                    return Err(Error::Precondition("NaN interval endpoint".into()));
                }
                Ok(())
            }
            Shape::AxisBox { lo, hi } => {
                if lo.len() != n || hi.len() != n {
                    return bad("axis_box");
                }
                if lo.iter().chain(hi).any(|c| c.0.is_nan()) {
                    return Err(Error::Precondition("NaN box bound".into()));
                }
                Ok(())
            }
            Shape::Ball { center, radius } => {
                if center.len() != n {
                    return bad("ball");
                }
                if !(*radius > 0.0) || !radius.is_finite() || center.iter().any(|c| !c.is_finite()) {
                    return Err(Error::Precondition("ball needs a finite center and radius > 0".into()));
                }
                Ok(())
            }
            Shape::HalfSpace { normal, offset } => {
                if normal.len() != n {
                    return bad("half_space");
                }
                if !offset.is_finite() || normal.iter().any(|c| !c.is_finite()) || normal.iter().all(|&c| c == 0.0) {
                    return Err(Error::Precondition("half_space needs a finite nonzero normal".into()));
                }
                Ok(())
            }
            Shape::Sector { start, end } => {
                if n != 2 {
                    return bad("sector");
                }
                let w = end - start;
                if !(w > 0.0 && w <= 2.0 * std::f64::consts::PI) || !start.is_finite() {
                    return Err(Error::Precondition("sector needs 0 < end - start <= 2π".into()));
                }
                Ok(())
            }
            Shape::WeierstrassDomain { weierstrass, lower } => {
                if n != 2 {
                    return bad("weierstrass_domain");
                }
                weierstrass.validate()?;
                if !(lower[2] > 0.0) || lower.iter().any(|c| !c.is_finite()) {
                    return Err(Error::Precondition(
                        "weierstrass_domain needs an upward parabola as lower curve".into(),
                    ));
                }
                Ok(())
            }
            Shape::Complement(s) => s.check_dim(n),
            Shape::Union(v) | Shape::Intersection(v) => v.iter().try_for_each(|s| s.check_dim(n)),
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            Shape::Empty => false,
            Shape::Whole => true,
            Shape::IntervalUnion(iv) => iv.iter().any(|[a, b]| x[0] > a.0 && x[0] < b.0),
            Shape::AxisBox { lo, hi } => {
                x.iter().zip(lo.iter().zip(hi)).all(|(v, (a, b))| *v > a.0 && *v < b.0)
            }
            Shape::Ball { center, radius } => {
                let d2: f64 = x.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum();
                d2 < radius * radius
            }
            Shape::HalfSpace { normal, offset } => {
                x.iter().zip(normal).map(|(a, b)| a * b).sum::<f64>() > *offset
            }
            Shape::Sector { start, end } => {
                if x[0] == 0.0 && x[1] == 0.0 {
                    return false;
                }
                let tau = 2.0 * std::f64::consts::PI;
                let th = x[1].atan2(x[0]);
                let rel = (th - start).rem_euclid(tau);
                rel < end - start
            }
            Shape::WeierstrassDomain { weierstrass, lower } => {
                let lo = lower[0] + lower[1] * x[0] + lower[2] * x[0] * x[0];
                x[1] > lo && x[1] < weierstrass.eval(x[0])
            }
            Shape::Complement(s) => !s.contains(x),
            Shape::Union(v) => v.iter().any(|s| s.contains(x)),
            Shape::Intersection(v) => v.iter().all(|s| s.contains(x)),
        }
    }

    /// Bounding box, `None` when unbounded (or not known to be bounded).
    pub fn bbox(&self, n: usize) -> Option<AxisBox> {
        match self {
            Shape::Empty => Some(AxisBox { lo: vec![0.0; n], hi: vec![0.0; n] }),
            Shape::Ball { center, radius } => Some(AxisBox {
                lo: center.iter().map(|c| c - radius).collect(),
                hi: center.iter().map(|c| c + radius).collect(),
            }),
            Shape::WeierstrassDomain { weierstrass, lower } => {
                let top = weierstrass.sup_bound();
                // lower(x) < top bounds x through the parabola
                let (c0, c1, c2) = (lower[0], lower[1], lower[2]);
                let disc = c1 * c1 - 4.0 * c2 * (c0 - top);
                if disc <= 0.0 {
                    return Some(AxisBox { lo: vec![0.0; 2], hi: vec![0.0; 2] });
                }
                let r = disc.sqrt();
                let x0 = (-c1 - r) / (2.0 * c2);
                let x1 = (-c1 + r) / (2.0 * c2);
                let vertex = c0 - c1 * c1 / (4.0 * c2);
                Some(AxisBox { lo: vec![x0, vertex], hi: vec![x1, top] })
            }
            Shape::Intersection(v) => {
                let mut acc: Option<AxisBox> = None;
                for s in v {
                    if let Some(b) = s.bbox(n) {
                        acc = Some(match acc {
                            Some(a) => a.intersect(&b),
                            None => b,
                        });
                    }
                }
                if acc.is_none() {
                    // intersections of unbounded pieces may still be box-bounded
                    return self.cells(n).and_then(|c| c.bbox());
                }
                acc.map(|b| if b.is_empty() { AxisBox { lo: vec![0.0; n], hi: vec![0.0; n] } } else { b })
            }
            Shape::Union(v) => {
                let mut acc: Option<AxisBox> = None;
                for s in v {
                    let b = s.bbox(n)?;
                    if b.is_empty() {
                        continue;
                    }
                    acc = Some(match acc {
                        Some(a) => AxisBox {
                            lo: a.lo.iter().zip(&b.lo).map(|(p, q)| p.min(*q)).collect(),
                            hi: a.hi.iter().zip(&b.hi).map(|(p, q)| p.max(*q)).collect(),
                        },
                        None => b,
                    });
                }
                Some(acc.unwrap_or(AxisBox { lo: vec![0.0; n], hi: vec![0.0; n] }))
            }
            _ => {
                let cells = self.cells(n)?;
                if cells.is_empty() {
                    return Some(AxisBox { lo: vec![0.0; n], hi: vec![0.0; n] });
                }
                cells.bbox()
            }
        }
    }

    pub fn cells(&self, n: usize) -> Option<BoxSet> {
        match self {
            Shape::Empty => Some(BoxSet::empty(n)),
            Shape::Whole => Some(BoxSet::whole(n)),
            Shape::IntervalUnion(iv) => {
                let merged = normalize(iv.iter().map(|[a, b]| (a.0, b.0)).collect());
                Some(BoxSet {
                    dim: 1,
                    boxes: merged.into_iter().map(|(a, b)| AxisBox { lo: vec![a], hi: vec![b] }).collect(),
                })
            }
            Shape::AxisBox { lo, hi } => {
                let b = AxisBox { lo: lo.iter().map(|c| c.0).collect(), hi: hi.iter().map(|c| c.0).collect() };
                Some(BoxSet { dim: n, boxes: if b.is_empty() { vec![] } else { vec![b] } })
            }
            Shape::HalfSpace { normal, offset } => {
                let nz: Vec<usize> = (0..n).filter(|&k| normal[k] != 0.0).collect();
                if nz.len() != 1 {
                    return None;
                }
                let k = nz[0];
                let mut b = AxisBox::whole(n);
                let c = offset / normal[k];
                if normal[k] > 0.0 {
                    b.lo[k] = c;
                } else {
                    b.hi[k] = c;
                }
                Some(BoxSet { dim: n, boxes: vec![b] })
            }
            Shape::Complement(s) => Some(s.cells(n)?.complement()),
            Shape::Union(v) => {
                let mut acc = BoxSet::empty(n);
                for s in v {
                    acc = acc.union(&s.cells(n)?);
                }
                Some(acc)
            }
            Shape::Intersection(v) => {
                let mut acc = BoxSet::whole(n);
                for s in v {
                    acc = acc.intersect(&s.cells(n)?);
                }
                Some(acc)
            }
            Shape::Ball { .. } | Shape::Sector { .. } | Shape::WeierstrassDomain { .. } => None,
        }
    }

    pub fn line_intervals(&self, p: &[f64], u: &[f64]) -> Option<Vec<Interval>> {
        let all = vec![(f64::NEG_INFINITY, f64::INFINITY)];
        Some(match self {
            Shape::Empty => vec![],
            Shape::Whole => all,
            Shape::IntervalUnion(iv) => {
                let pieces = iv.iter().map(|[a, b]| slab(p[0], u[0], a.0, b.0)).collect();
                normalize(pieces)
            }
            Shape::AxisBox { lo, hi } => {
                let mut cur = all;
                for k in 0..p.len() {
                    cur = intersect_intervals(&cur, &normalize(vec![slab(p[k], u[k], lo[k].0, hi[k].0)]));
                }
                cur
            }
            Shape::Ball { center, radius } => {
                let a: f64 = u.iter().map(|v| v * v).sum();
                let d: Vec<f64> = p.iter().zip(center).map(|(x, c)| x - c).collect();
                let b: f64 = 2.0 * d.iter().zip(u).map(|(x, y)| x * y).sum::<f64>();
                let c: f64 = d.iter().map(|v| v * v).sum::<f64>() - radius * radius;
                let disc = b * b - 4.0 * a * c;
                if a == 0.0 || disc <= 0.0 {
                    vec![]
                } else {
                    let r = disc.sqrt();
                    // stable roots
                    let q = -0.5 * (b + b.signum() * r);
                    let (mut t0, mut t1) = if q != 0.0 { (q / a, c / q) } else { (-r / (2.0 * a), r / (2.0 * a)) };
                    if t0 > t1 {
                        std::mem::swap(&mut t0, &mut t1);
                    }
                    vec![(t0, t1)]
                }
            }
            Shape::HalfSpace { normal, offset } => half_line(p, u, normal, *offset),
            Shape::Sector { start, end } => {
                let w = end - start;
                if w >= 2.0 * std::f64::consts::PI {
                    return Some(all);
                }
                let convex = |a: f64, b: f64| {
                    // {θ ∈ [a, b)} with b - a <= π: intersection of two half-planes
                    let n1 = [-a.sin(), a.cos()];
                    let n2 = [b.sin(), -b.cos()];
                    let h1 = half_line(p, u, &n1, 0.0);
                    let h2 = half_line(p, u, &n2, 0.0);
                    if b - a >= std::f64::consts::PI - 1e-15 {
                        return h1;
                    }
                    intersect_intervals(&h1, &h2)
                };
                if w <= std::f64::consts::PI {
                    convex(*start, *end)
                } else {
                    complement_intervals(&convex(*end, start + 2.0 * std::f64::consts::PI))
                }
            }
            Shape::WeierstrassDomain { weierstrass, lower } => {
                // only vertical lines have a closed-form intersection
                if u[0] != 0.0 || u[1] == 0.0 {
                    return None;
                }
                let x = p[0];
                let lo = lower[0] + lower[1] * x + lower[2] * x * x;
                let hi = weierstrass.eval(x);
                if hi <= lo {
                    vec![]
                } else {
                    let (a, b) = ((lo - p[1]) / u[1], (hi - p[1]) / u[1]);
                    vec![(a.min(b), a.max(b))]
                }
            }
            Shape::Complement(s) => complement_intervals(&s.line_intervals(p, u)?),
            Shape::Union(v) => {
                let mut acc = Vec::new();
                for s in v {
                    acc.extend(s.line_intervals(p, u)?);
                }
                normalize(acc)
            }
            Shape::Intersection(v) => {
                let mut acc = all;
                for s in v {
                    acc = intersect_intervals(&acc, &s.line_intervals(p, u)?);
                }
                acc
            }
        })
    }

    /// Image under x ↦ diag(scales)·x + shift. Scales must be nonzero; shapes
    /// that are not closed under non-uniform scaling require |scales| equal.
    pub fn map_affine(&self, scales: &[f64], shift: &[f64]) -> Shape {
        let map = |k: usize, v: f64| scales[k] * v + shift[k];
        match self {
            Shape::Empty | Shape::Whole => self.clone(),
            Shape::IntervalUnion(iv) => Shape::IntervalUnion(
                iv.iter()
                    .map(|[a, b]| {
                        let (x, y) = (map(0, a.0), map(0, b.0));
                        [Coord(x.min(y)), Coord(x.max(y))]
                    })
                    .collect(),
            ),
            Shape::AxisBox { lo, hi } => {
                let mut l = Vec::new();
                let mut h = Vec::new();
                for k in 0..lo.len() {
                    let (x, y) = (map(k, lo[k].0), map(k, hi[k].0));
                    l.push(Coord(x.min(y)));
                    h.push(Coord(x.max(y)));
                }
                Shape::AxisBox { lo: l, hi: h }
            }
            Shape::Ball { center, radius } => Shape::Ball {
                center: center.iter().enumerate().map(|(k, c)| map(k, *c)).collect(),
                radius: radius * scales[0].abs(),
            },
            Shape::HalfSpace { normal, offset } => {
                // ⟨n, (y - b)/a⟩ > c  ⇔  ⟨n/a, y⟩ > c + ⟨n/a, b⟩
                let nn: Vec<f64> = normal.iter().zip(scales).map(|(v, a)| v / a).collect();
                let off = offset + nn.iter().zip(shift).map(|(v, b)| v * b).sum::<f64>();
                Shape::HalfSpace { normal: nn, offset: off }
            }
            Shape::Sector { .. } => {
                if scales[0] > 0.0 && scales[1] > 0.0 && shift.iter().all(|&b| b == 0.0) {
                    self.clone()
                } else {
                    Shape::Intersection(vec![self.clone()]).map_generic(scales, shift)
                }
            }
            Shape::WeierstrassDomain { .. } => Shape::Intersection(vec![self.clone()]).map_generic(scales, shift),
            Shape::Complement(s) => Shape::Complement(Box::new(s.map_affine(scales, shift))),
            Shape::Union(v) => Shape::Union(v.iter().map(|s| s.map_affine(scales, shift)).collect()),
            Shape::Intersection(v) => Shape::Intersection(v.iter().map(|s| s.map_affine(scales, shift)).collect()),
        }
    }

    fn map_generic(&self, scales: &[f64], shift: &[f64]) -> Shape {
        // Sectors flip orientation under reflections: θ ↦ π - θ (x-flip),
        // θ ↦ -θ (y-flip). Weierstrass domains only support the identity.
        if let Shape::Intersection(v) = self {
            if let [Shape::Sector { start, end }] = v.as_slice() {
                if shift.iter().all(|&b| b == 0.0) {
                    let (mut a, mut b) = (*start, *end);
                    if scales[1] < 0.0 {
                        let (na, nb) = (-b, -a);
                        a = na;
                        b = nb;
                    }
                    if scales[0] < 0.0 {
                        let pi = std::f64::consts::PI;
                        let (na, nb) = (pi - b, pi - a);
                        a = na;
                        b = nb;
                    }
                    return Shape::Sector { start: a, end: b };
                }
            }
            if let [s] = v.as_slice() {
                return s.clone();
            }
        }
        self.clone()
    }
}

/// {τ : a < p + τu < b}.
fn slab(p: f64, u: f64, a: f64, b: f64) -> Interval {
    if u == 0.0 {
        return if p > a && p < b { (f64::NEG_INFINITY, f64::INFINITY) } else { (0.0, 0.0) };
    }
    let (t0, t1) = ((a - p) / u, (b - p) / u);
    let (lo, hi) = if u > 0.0 { (t0, t1) } else { (t1, t0) };
    (if lo.is_nan() { f64::NEG_INFINITY } else { lo }, if hi.is_nan() { f64::INFINITY } else { hi })
}

/// {τ : ⟨normal, p + τu⟩ > offset}.
fn half_line(p: &[f64], u: &[f64], normal: &[f64], offset: f64) -> Vec<Interval> {
    let a: f64 = normal.iter().zip(p).map(|(n, x)| n * x).sum::<f64>() - offset;
    let b: f64 = normal.iter().zip(u).map(|(n, x)| n * x).sum();
    if b == 0.0 {
        return if a > 0.0 { vec![(f64::NEG_INFINITY, f64::INFINITY)] } else { vec![] };
    }
    let t = -a / b;
    if b > 0.0 {
        vec![(t, f64::INFINITY)]
    } else {
        vec![(f64::NEG_INFINITY, t)]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn interval_algebra() {
        let a = normalize(vec![(0.0, 1.0), (0.5, 2.0), (3.0, 4.0)]);
        assert_eq!(a, vec![(0.0, 2.0), (3.0, 4.0)]);
        let c = complement_intervals(&a);
        assert_eq!(c, vec![(f64::NEG_INFINITY, 0.0), (2.0, 3.0), (4.0, f64::INFINITY)]);
        assert_eq!(intersect_intervals(&a, &[(1.0, 3.5)]), vec![(1.0, 2.0), (3.0, 3.5)]);
    }

    #[test]
    fn box_difference_tiles() {
        let a = AxisBox { lo: vec![0.0, 0.0], hi: vec![2.0, 2.0] };
        let b = AxisBox { lo: vec![0.5, 0.5], hi: vec![1.0, 3.0] };
        let pieces = a.minus(&b);
        let area: f64 = pieces.iter().map(|p| (p.hi[0] - p.lo[0]) * (p.hi[1] - p.lo[1])).sum();
        assert!((area - (4.0 - 0.5 * 1.5)).abs() < 1e-14);
    }

    #[test]
    fn complement_of_box_set_is_exact_in_1d() {
        let r = Region::intervals(&[(0.0, 1.0), (2.0, 3.0)]);
        let c = r.complement().unwrap().cells().unwrap();
        let mut iv: Vec<Interval> = c.boxes.iter().map(|b| (b.lo[0], b.hi[0])).collect();
        iv = normalize(iv);
        assert_eq!(iv, vec![(f64::NEG_INFINITY, 0.0), (1.0, 2.0), (3.0, f64::INFINITY)]);
    }

    #[test]
    fn coord_serde_accepts_infinity_strings() {
        let s: Shape = serde_json::from_str(r#"{"interval_union": [[0, "inf"], ["-inf", -1.5]]}"#).unwrap();
        assert!(s.contains(&[10.0]) && s.contains(&[-2.0]) && !s.contains(&[-1.0]));
        let back: Shape = serde_json::from_str(&serde_json::to_string(&s).unwrap()).unwrap();
        assert_eq!(back, s);
        assert!(serde_json::from_str::<Shape>(r#"{"interval_union": [[0, "huge"]]}"#).is_err());
    }

    #[test]
    fn sector_membership() {
        let s = Shape::Sector { start: 0.0, end: std::f64::consts::FRAC_PI_2 };
        assert!(s.contains(&[1.0, 1.0]));
        assert!(!s.contains(&[-1.0, 1.0]));
        let big = Shape::Sector { start: 0.0, end: 1.5 * std::f64::consts::PI };
        assert!(big.contains(&[-1.0, -0.5]));
        assert!(!big.contains(&[1.0, -0.5]));
    }

    fn random_shape() -> impl Strategy<Value = Shape> {
        let ball = (prop::collection::vec(-2.0f64..2.0, 2), 0.1f64..2.0)
            .prop_map(|(c, r)| Shape::Ball { center: c, radius: r });
        let bx = (prop::collection::vec(-2.0f64..0.0, 2), prop::collection::vec(0.1f64..2.0, 2)).prop_map(|(l, w)| {
            Shape::AxisBox {
                lo: l.iter().map(|&v| Coord(v)).collect(),
                hi: l.iter().zip(&w).map(|(a, b)| Coord(a + b)).collect(),
            }
        });
        let hs = (prop::collection::vec(-1.0f64..1.0, 2), -1.0f64..1.0)
            .prop_filter("nonzero normal", |(n, _)| n.iter().any(|v| v.abs() > 1e-3))
            .prop_map(|(n, o)| Shape::HalfSpace { normal: n, offset: o });
        let sec = (-3.0f64..3.0, 0.2f64..6.2).prop_map(|(a, w)| Shape::Sector { start: a, end: a + w });
        let leaf = prop_oneof![ball, bx, hs, sec];
        leaf.prop_recursive(2, 6, 3, |inner| {
            prop_oneof![
                inner.clone().prop_map(|s| Shape::Complement(Box::new(s))),
                prop::collection::vec(inner.clone(), 2).prop_map(Shape::Union),
                prop::collection::vec(inner, 2).prop_map(Shape::Intersection),
            ]
        })
    }

    proptest! {
        #[test]
        fn line_intervals_agree_with_membership(shape in random_shape(),
            p in prop::collection::vec(-3.0f64..3.0, 2),
            ang in 0.0f64..6.28, tau in -5.0f64..5.0) {
            let u = [ang.cos(), ang.sin()];
            let iv = shape.line_intervals(&p, &u).unwrap();
            let x = [p[0] + tau * u[0], p[1] + tau * u[1]];
            let inside = iv.iter().any(|&(a, b)| tau > a && tau < b);
            let near_edge = iv.iter().any(|&(a, b)| (tau - a).abs() < 1e-9 || (tau - b).abs() < 1e-9);
            prop_assume!(!near_edge);
            prop_assert_eq!(inside, shape.contains(&x));
        }

        #[test]
        fn box_cells_agree_with_membership(lo in prop::collection::vec(-2.0f64..0.0, 2),
            w in prop::collection::vec(0.1f64..2.0, 2),
            x in prop::collection::vec(-3.0f64..3.0, 2)) {
            let b = Shape::AxisBox {
                lo: lo.iter().map(|&v| Coord(v)).collect(),
                hi: lo.iter().zip(&w).map(|(a, c)| Coord(a + c)).collect(),
            };
            let h = Shape::HalfSpace { normal: vec![0.0, 1.0], offset: 0.3 };
            let s = Shape::Union(vec![b, Shape::Complement(Box::new(h))]);
            let cells = s.cells(2).unwrap();
            prop_assert_eq!(cells.contains(&x), s.contains(&x));
            let co = Shape::Complement(Box::new(s.clone())).cells(2).unwrap();
            prop_assert_eq!(co.contains(&x), !s.contains(&x));
        }
    }
}
