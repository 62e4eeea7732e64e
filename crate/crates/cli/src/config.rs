//! Run configuration: one JSON document naming the experiment, the root
//! system, quadrature settings, the seed and experiment parameters.

use std::fmt;

use nplab_core::dunkl::RootSystemConfig;
use nplab_core::field::FieldSpec;
use nplab_core::fractal::{geometric_grid, WeierstrassSpec};
use nplab_core::quad::QuadSpec;
use nplab_core::region::{Coord, Shape};
use serde::de::DeserializeOwned;
use serde_json::value::RawValue;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Seminorm,
    MsLimit,
    Perimeter,
    RelativeLimit,
    Xi,
    Iota,
    WeightedPerimeter,
    Fractal,
    VerifyKernel,
    PropertiesSuite,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 10] = [
        ExperimentKind::Seminorm,
        ExperimentKind::MsLimit,
        ExperimentKind::Perimeter,
        ExperimentKind::RelativeLimit,
        ExperimentKind::Xi,
        ExperimentKind::Iota,
        ExperimentKind::WeightedPerimeter,
        ExperimentKind::Fractal,
        ExperimentKind::VerifyKernel,
        ExperimentKind::PropertiesSuite,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::Seminorm => "seminorm",
            ExperimentKind::MsLimit => "ms_limit",
            ExperimentKind::Perimeter => "perimeter",
            ExperimentKind::RelativeLimit => "relative_limit",
            ExperimentKind::Xi => "xi",
            ExperimentKind::Iota => "iota",
            ExperimentKind::WeightedPerimeter => "weighted_perimeter",
            ExperimentKind::Fractal => "fractal",
            ExperimentKind::VerifyKernel => "verify_kernel",
            ExperimentKind::PropertiesSuite => "properties_suite",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|k| k.name() == s)
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticePair {
    pub f: FieldSpec,
    pub g: FieldSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeminormParams {
    pub function: FieldSpec,
    pub p: f64,
    /// Outer exponent; defaults to p, "inf" selects the supremum form.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<Coord>,
    /// Compare with the constant times the Gagliardo seminorm (κ = 0 only).
    #[serde(default)]
    pub compare_gagliardo: bool,
    /// Function pairs for the lattice inequality at every s of the grid.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub lattice: Vec<LatticePair>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MsLimitParams {
    pub function: FieldSpec,
    #[serde(default = "one")]
    pub p: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PerimeterOracle {
    /// Per_s((0,1), ℝ) = 1/(s(1−2s)).
    UnitInterval,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerimeterParams {
    pub e: Shape,
    #[serde(default = "whole")]
    pub omega: Shape,
    /// Spatial Riesz form instead of the heat-semigroup form.
    #[serde(default)]
    pub classical: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<PerimeterOracle>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelativeLimitParams {
    pub e: Shape,
    pub omega: Shape,
    /// Overrides the estimated Ξ_E.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xi: Option<f64>,
    /// Also recover Ξ_E from the limit (unbalanced measures).
    #[serde(default)]
    pub converse: bool,
    #[serde(default = "converse_agreement")]
    pub converse_tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct XiParams {
    pub e: Shape,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<Vec<f64>>,
    #[serde(default = "one")]
    pub r: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<f64>,
    /// Also estimate Ξ of the complement and compare the sum with 1.
    #[serde(default)]
    pub complement: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IotaParams {
    pub e: Shape,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<f64>,
    /// Pass when the estimate lies below this bound.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub upper_bound: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightedPerimeterParams {
    pub e: Shape,
    #[serde(default = "whole")]
    pub omega: Shape,
    /// Largest accepted ratio of the last to the first s·value.
    #[serde(default = "tenth")]
    pub max_ratio: f64,
}

/// Radii of the boundary fit: an explicit list or a geometric grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RadiusGrid {
    List(Vec<f64>),
    Geometric { r_min: f64, r_max: f64, count: usize },
}

impl RadiusGrid {
    pub fn radii(&self) -> Vec<f64> {
        match self {
            RadiusGrid::List(v) => v.clone(),
            RadiusGrid::Geometric { r_min, r_max, count } => geometric_grid(*r_min, *r_max, *count),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundaryCase {
    pub domain: Shape,
    pub r_grid: RadiusGrid,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta_target: Option<f64>,
    #[serde(default = "eta_tolerance")]
    pub eta_tolerance: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s0: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FractalParams {
    pub weierstrass: WeierstrassSpec,
    #[serde(default = "delta0")]
    pub delta0: f64,
    /// Accepted distance of the fitted dimension from 2 + log_b a.
    #[serde(default = "dimension_tolerance")]
    pub dimension_tolerance: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub boundary: Vec<BoundaryCase>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyKernelParams {
    /// ℤ₂ multiplicities to test; empty uses the configured root system.
    #[serde(default)]
    pub kappas: Vec<f64>,
    #[serde(default = "kernel_times")]
    pub t_grid: Vec<f64>,
    #[serde(default = "kernel_points")]
    pub points: Vec<f64>,
    /// Random (s, t, x, y) tuples for the semigroup property.
    #[serde(default = "twenty")]
    pub tuples: usize,
    #[serde(default = "completeness_tol")]
    pub completeness_tolerance: f64,
    #[serde(default = "semigroup_tol")]
    pub semigroup_tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PropertiesSuiteParams {
    #[serde(default)]
    pub regions: Vec<Shape>,
    pub omega: Shape,
    pub s: f64,
    #[serde(default = "ten")]
    pub count: usize,
}

fn one() -> f64 {
    1.0
}
fn tenth() -> f64 {
    0.1
}
fn whole() -> Shape {
    Shape::Whole
}
fn converse_agreement() -> f64 {
    0.05
}
fn eta_tolerance() -> f64 {
    0.15
}
fn delta0() -> f64 {
    0.125
}
fn dimension_tolerance() -> f64 {
    0.15
}
fn kernel_times() -> Vec<f64> {
    vec![0.1, 1.0, 10.0]
}
fn kernel_points() -> Vec<f64> {
    vec![0.0, 0.3, -1.2, 2.5]
}
fn twenty() -> usize {
    20
}
fn ten() -> usize {
    10
}
fn completeness_tol() -> f64 {
    1e-6
}
fn semigroup_tol() -> f64 {
    1e-5
}

#[derive(Debug, Clone, PartialEq)]
pub enum Params {
    Seminorm(SeminormParams),
    MsLimit(MsLimitParams),
    Perimeter(PerimeterParams),
    RelativeLimit(RelativeLimitParams),
    Xi(XiParams),
    Iota(IotaParams),
    WeightedPerimeter(WeightedPerimeterParams),
    Fractal(FractalParams),
    VerifyKernel(VerifyKernelParams),
    PropertiesSuite(PropertiesSuiteParams),
}

impl Params {
    pub fn kind(&self) -> ExperimentKind {
        match self {
            Params::Seminorm(_) => ExperimentKind::Seminorm,
            Params::MsLimit(_) => ExperimentKind::MsLimit,
            Params::Perimeter(_) => ExperimentKind::Perimeter,
            Params::RelativeLimit(_) => ExperimentKind::RelativeLimit,
            Params::Xi(_) => ExperimentKind::Xi,
            Params::Iota(_) => ExperimentKind::Iota,
            Params::WeightedPerimeter(_) => ExperimentKind::WeightedPerimeter,
            Params::Fractal(_) => ExperimentKind::Fractal,
            Params::VerifyKernel(_) => ExperimentKind::VerifyKernel,
            Params::PropertiesSuite(_) => ExperimentKind::PropertiesSuite,
        }
    }

    fn to_value(&self) -> serde_json::Value {
        let v = match self {
            Params::Seminorm(p) => serde_json::to_value(p),
            Params::MsLimit(p) => serde_json::to_value(p),
            Params::Perimeter(p) => serde_json::to_value(p),
            Params::RelativeLimit(p) => serde_json::to_value(p),
            Params::Xi(p) => serde_json::to_value(p),
            Params::Iota(p) => serde_json::to_value(p),
            Params::WeightedPerimeter(p) => serde_json::to_value(p),
            Params::Fractal(p) => serde_json::to_value(p),
            Params::VerifyKernel(p) => serde_json::to_value(p),
            Params::PropertiesSuite(p) => serde_json::to_value(p),
        };
        v.expect("parameters serialize to JSON")
    }
}

/// The wire form of a configuration.
#[derive(Debug, Clone, Serialize)]
struct RawConfig {
    experiment: ExperimentKind,
    root_system: RootSystemConfig,
    seed: u64,
    quad: QuadSpec,
    #[serde(skip_serializing_if = "Option::is_none")]
    s_grid: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    tolerance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    output: Option<String>,
    params: serde_json::Value,
}

/// `RawConfig` with the parameters kept as text, for positioned errors.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ParsedConfig<'a> {
    experiment: ExperimentKind,
    root_system: RootSystemConfig,
    #[serde(default)]
    seed: u64,
    #[serde(default)]
    quad: QuadSpec,
    #[serde(default)]
    s_grid: Option<Vec<f64>>,
    #[serde(default)]
    tolerance: Option<f64>,
    #[serde(default)]
    output: Option<String>,
    #[serde(borrow)]
    params: &'a RawValue,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub root_system: RootSystemConfig,
    pub seed: u64,
    pub quad: QuadSpec,
    /// s-grid; each experiment has a default.
    pub s_grid: Option<Vec<f64>>,
    /// Acceptance tolerance; each experiment has a default.
    pub tolerance: Option<f64>,
    /// Output directory, overridden by `--out`.
    pub output: Option<String>,
    pub params: Params,
}

impl RunConfig {
    pub fn kind(&self) -> ExperimentKind {
        self.params.kind()
    }

    fn to_raw(&self) -> RawConfig {
        RawConfig {
            experiment: self.kind(),
            root_system: self.root_system.clone(),
            seed: self.seed,
            quad: self.quad.clone(),
            s_grid: self.s_grid.clone(),
            tolerance: self.tolerance,
            output: self.output.clone(),
            params: self.params.to_value(),
        }
    }

    /// Pretty JSON; `parse_config` of the result gives back `self`.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_raw()).expect("configuration serializes to JSON")
    }

    /// Canonical JSON of everything that determines the results (the output
    /// path excluded).
    pub fn canonical(&self) -> String {
        let mut raw = self.to_raw();
        raw.output = None;
        serde_json::to_string(&raw).expect("configuration serializes to JSON")
    }
}

impl Serialize for RunConfig {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_raw().serialize(s)
    }
}

/// A configuration error with the offending field path and, for syntax
/// errors, the line and column.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub path: String,
    pub line: Option<usize>,
    pub column: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        match (self.line, self.column) {
            (Some(l), Some(c)) => write!(f, "config error at line {l}, column {c}")?,
            _ => write!(f, "config error")?,
        }
        if !self.path.is_empty() && self.path != "." {
            write!(f, " in field `{}`", self.path)?;
        }
        write!(f, ": {}", self.message)
    }
}

impl std::error::Error for ConfigError {}

fn from_json_error(path: String, e: &serde_json::Error) -> ConfigError {
    let (line, column) = if e.line() > 0 { (Some(e.line()), Some(e.column())) } else { (None, None) };
    ConfigError { path, line, column, message: e.to_string() }
}

fn params_from<T: DeserializeOwned>(text: &str, raw: &RawValue) -> std::result::Result<T, ConfigError> {
    let body = raw.get();
    let de = &mut serde_json::Deserializer::from_str(body);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = format!("params.{}", e.path());
        let inner = e.into_inner();
        // the raw value borrows from `text`, so its offset gives the base line
        let offset = (body.as_ptr() as usize).saturating_sub(text.as_ptr() as usize).min(text.len());
        let before = &text[..offset];
        let base_line = before.matches('\n').count();
        let base_col = offset - before.rfind('\n').map_or(0, |i| i + 1);
        let (line, column) = match inner.line() {
            0 => (None, None),
            1 => (Some(base_line + 1), Some(base_col + inner.column())),
            l => (Some(base_line + l), Some(inner.column())),
        };
        let message = strip_position(&inner.to_string());
        ConfigError { path, line, column, message }
    })
}

/// Drops serde_json's " at line L column C" suffix, which is relative to
/// the parameter block.
fn strip_position(msg: &str) -> String {
    match msg.rfind(" at line ") {
        Some(i) => msg[..i].to_string(),
        None => msg.to_string(),
    }
}

fn bad(path: &str, msg: impl Into<String>) -> ConfigError {
    ConfigError { path: path.into(), line: None, column: None, message: msg.into() }
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> std::result::Result<RunConfig, ConfigError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let raw: ParsedConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        from_json_error(path, e.inner())
    })?;
    let params = match raw.experiment {
        ExperimentKind::Seminorm => Params::Seminorm(params_from(text, raw.params)?),
        ExperimentKind::MsLimit => Params::MsLimit(params_from(text, raw.params)?),
        ExperimentKind::Perimeter => Params::Perimeter(params_from(text, raw.params)?),
        ExperimentKind::RelativeLimit => Params::RelativeLimit(params_from(text, raw.params)?),
        ExperimentKind::Xi => Params::Xi(params_from(text, raw.params)?),
        ExperimentKind::Iota => Params::Iota(params_from(text, raw.params)?),
        ExperimentKind::WeightedPerimeter => Params::WeightedPerimeter(params_from(text, raw.params)?),
        ExperimentKind::Fractal => Params::Fractal(params_from(text, raw.params)?),
        ExperimentKind::VerifyKernel => Params::VerifyKernel(params_from(text, raw.params)?),
        ExperimentKind::PropertiesSuite => Params::PropertiesSuite(params_from(text, raw.params)?),
    };
    if let Some(g) = &raw.s_grid {
        if g.is_empty() || g.iter().any(|s| !s.is_finite() || *s <= 0.0) {
            return Err(bad("s_grid", "s values must be finite and positive"));
        }
    }
    if let Some(t) = raw.tolerance {
        if !(t > 0.0) || !t.is_finite() {
            return Err(bad("tolerance", "tolerance must be finite and positive"));
        }
    }
    let q = &raw.quad;
    if !(q.rel_tol > 0.0 && q.rel_tol < 1.0) {
        return Err(bad("quad.rel_tol", "relative tolerance must lie in (0, 1)"));
    }
    if q.max_evals < 15 || q.mc_samples == 0 {
        return Err(bad("quad", "evaluation budgets must be positive"));
    }
    if !(q.log10_t_min < q.log10_t_max) || !q.log10_t_min.is_finite() || !q.log10_t_max.is_finite() {
        return Err(bad("quad", "time range must satisfy log10_t_min < log10_t_max"));
    }
    if !(q.time_split > 0.0) || !q.time_split.is_finite() {
        return Err(bad("quad.time_split", "time split must be finite and positive"));
    }
    Ok(RunConfig {
        root_system: raw.root_system,
        seed: raw.seed,
        quad: raw.quad,
        s_grid: raw.s_grid,
        tolerance: raw.tolerance,
        output: raw.output,
        params,
    })
}

impl<'de> Deserialize<'de> for RunConfig {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = serde_json::Value::deserialize(d)?;
        parse_config(&v.to_string()).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MS: &str = r#"{
        "experiment": "ms_limit",
        "root_system": {"dimension": 1, "preset": "trivial"},
        "seed": 7,
        "params": {"function": {"indicator": {"shape": {"interval_union": [[0, 1]]}}}}
    }"#;

    #[test]
    fn parses_and_round_trips() {
        let c = parse_config(MS).unwrap();
        assert_eq!(c.kind(), ExperimentKind::MsLimit);
        assert_eq!(c.seed, 7);
        let again = parse_config(&c.to_json()).unwrap();
        assert_eq!(c, again);
        let via_serde: RunConfig = serde_json::from_str(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(c, via_serde);
    }

    #[test]
    fn errors_name_the_field() {
        let e = parse_config(&MS.replace("\"p\"", "\"x\"").replace("\"function\"", "\"fnction\"")).unwrap_err();
        assert!(e.path.starts_with("params"), "{e}");
        let bad_tag = MS.replace("interval_union", "interval_onion");
        let e = parse_config(&bad_tag).unwrap_err();
        assert_eq!(e.line, Some(5), "{e}");
        assert!(e.path.starts_with("params.function"), "{e}");
        assert!(e.to_string().contains("interval_onion"), "{e}");
        let e = parse_config("{\"experiment\": \"nope\"}").unwrap_err();
        assert!(e.line.is_some(), "{e}");
        let e = parse_config("{ not json").unwrap_err();
        assert_eq!(e.line, Some(1));
        let e = parse_config(&MS.replace("\"seed\": 7", "\"seed\": 7, \"s_grid\": [0.1, -1]")).unwrap_err();
        assert_eq!(e.path, "s_grid");
    }

    #[test]
    fn experiment_names_are_stable() {
        for k in ExperimentKind::ALL {
            assert_eq!(ExperimentKind::from_name(k.name()), Some(k));
            let v = serde_json::to_value(k).unwrap();
            assert_eq!(v.as_str(), Some(k.name()));
        }
    }
}
