//! Result tables and their CSV and JSON renderings.

use std::io::{self, Write};
use std::path::{Path, PathBuf};

use nplab_core::extrap::LimitEstimate;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;

/// One CSV cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Cell {
    Int(u64),
    #[serde(serialize_with = "num_cell")]
    Num(f64),
    Bool(bool),
    Text(String),
}

/// Non-finite values become the strings they render as, since JSON has no
/// literal for them.
fn num_cell<S: serde::Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else {
        s.serialize_str(&format_float(*v))
    }
}

impl Cell {
    pub fn render(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Num(v) => format_float(*v),
            Cell::Bool(v) => v.to_string(),
            Cell::Text(v) => v.clone(),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}
impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v)
    }
}
impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as u64)
    }
}
impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}
impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}
impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

/// 17 significant digits, enough to round-trip every f64.
pub fn format_float(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:.16e}")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table { columns: columns.iter().map(|c| c.to_string()).collect(), rows: vec![] }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// (s, value, s·value) rows.
    pub fn s_rows(s: &[f64], values: &[f64]) -> Self {
        let mut t = Table::new(&["s", "value", "s_times_value"]);
        for (&s, &v) in s.iter().zip(values) {
            t.push(vec![s.into(), v.into(), (s * v).into()]);
        }
        t
    }

    pub fn to_csv(&self) -> Vec<u8> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r.iter().map(Cell::render)).expect("in-memory write");
        }
        w.into_inner().expect("in-memory write")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    /// |value − target| / max(|target|, 1e-12) ≤ tolerance
    Relative,
    /// |value − target| ≤ tolerance
    Absolute,
    /// value ≤ target
    AtMost,
    /// value ≥ target
    AtLeast,
}

/// One acceptance comparison; the run passes iff all of them pass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub name: String,
    pub value: f64,
    pub target: f64,
    pub tolerance: f64,
    pub metric: Metric,
    pub passed: bool,
}

impl Comparison {
    pub fn new(name: impl Into<String>, value: f64, target: f64, tolerance: f64, metric: Metric) -> Self {
        let passed = match metric {
            Metric::Relative => relative_error(value, target) <= tolerance,
            Metric::Absolute => (value - target).abs() <= tolerance,
            Metric::AtMost => value <= target,
            Metric::AtLeast => value >= target,
        };
        Comparison { name: name.into(), value, target, tolerance, metric, passed }
    }

    /// A yes/no outcome recorded as 1 against the target 1.
    pub fn flag(name: impl Into<String>, ok: bool) -> Self {
        let v = if ok { 1.0 } else { 0.0 };
        Comparison { name: name.into(), value: v, target: 1.0, tolerance: 0.0, metric: Metric::AtLeast, passed: ok }
    }
}

pub fn relative_error(value: f64, target: f64) -> f64 {
    (value - target).abs() / target.abs().max(1e-12)
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Integrand evaluations of the adaptive and QMC rules.
    pub quad_evals: u64,
    pub fit_residual: Option<f64>,
    pub wall_time_s: f64,
    pub cache_hit: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultTable {
    pub experiment: String,
    pub table: Table,
    /// Further tables written as `<experiment>_<name>.csv`.
    pub extra_tables: Vec<(String, Table)>,
    pub extrapolation: Option<LimitEstimate>,
    pub extrapolated_limit: Option<f64>,
    pub target_value: Option<f64>,
    pub target_provenance: Option<String>,
    pub relative_error: Option<f64>,
    pub comparisons: Vec<Comparison>,
    pub diagnostics: Diagnostics,
    /// Experiment-specific reports.
    pub details: serde_json::Value,
}

impl ResultTable {
    pub fn new(experiment: &str, table: Table) -> Self {
        ResultTable {
            experiment: experiment.into(),
            table,
            extra_tables: vec![],
            extrapolation: None,
            extrapolated_limit: None,
            target_value: None,
            target_provenance: None,
            relative_error: None,
            comparisons: vec![],
            diagnostics: Diagnostics::default(),
            details: serde_json::Value::Null,
        }
    }

    /// Sets the limit and target, deriving the relative error.
    pub fn with_limit(mut self, limit: f64, target: Option<f64>, provenance: &str) -> Self {
        self.extrapolated_limit = Some(limit);
        self.target_value = target;
        self.target_provenance = target.map(|_| provenance.to_string());
        self.relative_error = target.map(|t| relative_error(limit, t));
        self
    }

    pub fn with_estimate(mut self, est: &LimitEstimate, provenance: &str) -> Self {
        self.diagnostics.fit_residual = Some(est.residual);
        self.extrapolation = Some(est.clone());
        self.with_limit(est.limit, est.target, provenance)
    }

    pub fn all_passed(&self) -> bool {
        self.comparisons.iter().all(|c| c.passed)
    }
}

/// serde_json formatter writing floats with 17 significant digits.
struct Precise<'a>(serde_json::ser::PrettyFormatter<'a>);

macro_rules! delegate {
    ($($name:ident),*) => {
        $(fn $name<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
            self.0.$name(w)
        })*
    };
}

impl serde_json::ser::Formatter for Precise<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, v: f64) -> io::Result<()> {
        w.write_all(format_float(v).as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, v: f32) -> io::Result<()> {
        self.write_f64(w, v as f64)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    delegate!(begin_array, end_array, end_array_value, begin_object, end_object, begin_object_value, end_object_value);
}

/// JSON with 17-significant-digit floats.
pub fn to_precise_json<T: Serialize>(v: &T) -> Vec<u8> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, Precise(serde_json::ser::PrettyFormatter::new()));
    v.serialize(&mut ser).expect("results serialize to JSON");
    out.push(b'\n');
    out
}

#[derive(Serialize)]
struct Sidecar<'a> {
    #[serde(flatten)]
    result: &'a ResultTable,
    all_passed: bool,
    config: &'a RunConfig,
}

/// Paths written by `write_outputs`.
#[derive(Debug, Clone)]
pub struct Written {
    pub csv: PathBuf,
    pub json: PathBuf,
    pub extra: Vec<PathBuf>,
}

/// Writes `<out>/<experiment>.csv`, any extra tables and the JSON sidecar.
pub fn write_outputs(out: &Path, result: &ResultTable, config: &RunConfig) -> io::Result<Written> {
    std::fs::create_dir_all(out)?;
    let csv = out.join(format!("{}.csv", result.experiment));
    write_atomic(&csv, &result.table.to_csv())?;
    let mut extra = vec![];
    for (name, t) in &result.extra_tables {
        let p = out.join(format!("{}_{}.csv", result.experiment, name));
        write_atomic(&p, &t.to_csv())?;
        extra.push(p);
    }
    let json = out.join(format!("{}.json", result.experiment));
    let side = Sidecar { result, all_passed: result.all_passed(), config };
    write_atomic(&json, &to_precise_json(&side))?;
    Ok(Written { csv, json, extra })
}

/// Write to a temporary file in the same directory, then rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}
