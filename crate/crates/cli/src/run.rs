//! Experiment dispatch: turns a configuration into a result table.

use std::path::{Path, PathBuf};
use std::time::Instant;

use nplab_core::dunkl::{RootSystemConfig, RootSystemSpec, WeightedMeasure};
use nplab_core::extrap::{extrapolate, FitModel, LimitEstimate};
use nplab_core::field::ScalarField;
use nplab_core::fractal::{boundary_condition_fit, weierstrass_box_dimension};
use nplab_core::heat::HeatKernel;
use nplab_core::perimeter::{
    converse_xi_recover, iota_estimate, perimeter_classical, perimeter_dunkl_grid, perimeter_properties_suite,
    relative_limit_verify, weighted_trend, xi_estimate, XiReport, XI_S_GRID, XI_TOL,
};
use nplab_core::quad::{eval_count, QuadSpec};
use nplab_core::region::{Region, Shape};
use nplab_core::seminorm::{
    besov, besov_grid, besov_sup, conversion_constant, gagliardo_pow, lattice_check, ms_limit, SeminormRequest,
    DEFAULT_S_GRID,
};
use nplab_core::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::cache::{cache_key, Cache};
use crate::config::*;
use crate::output::{write_outputs, Cell, Comparison, Metric, ResultTable, Table, Written};

/// s-grid of the seminorm experiment when none is configured.
pub const SEMINORM_S_GRID: [f64; 3] = [0.1, 0.3, 0.5];
/// s-grid of the perimeter experiment when none is configured.
pub const PERIMETER_S_GRID: [f64; 3] = [0.05, 0.1, 0.2];
/// s-grid of the weighted perimeter experiment when none is configured.
pub const WEIGHTED_S_GRID: [f64; 4] = [0.2, 0.1, 0.05, 0.02];
/// Allowed negative slack of the lattice inequality.
pub const LATTICE_SLACK: f64 = 1e-3;

struct Ctx<'a> {
    cfg: &'a RunConfig,
    quad: QuadSpec,
    measure: WeightedMeasure,
    kernel: HeatKernel,
}

impl Ctx<'_> {
    fn dim(&self) -> usize {
        self.kernel.dim()
    }

    fn region(&self, shape: &Shape) -> Result<Region> {
        Region::tagged(self.dim(), shape.clone())
    }

    fn grid(&self, default: &[f64]) -> Vec<f64> {
        self.cfg.s_grid.clone().unwrap_or_else(|| default.to_vec())
    }

    fn tol(&self, default: f64) -> f64 {
        self.cfg.tolerance.unwrap_or(default)
    }
}

/// Quadrature settings of a run: the run seed drives every random choice.
pub fn effective_quad(cfg: &RunConfig) -> QuadSpec {
    cfg.quad.clone().with_seed(cfg.seed)
}

fn build_measure(rs: &RootSystemConfig) -> Result<WeightedMeasure> {
    Ok(WeightedMeasure::new(rs.build()?))
}

/// Runs the configured experiment without touching the file system.
pub fn run_experiment(cfg: &RunConfig) -> Result<ResultTable> {
    let start = Instant::now();
    let evals0 = eval_count();
    let measure = build_measure(&cfg.root_system)?;
    let kernel = HeatKernel::new(measure.clone())?;
    let ctx = Ctx { cfg, quad: effective_quad(cfg), measure, kernel };
    let mut out = match &cfg.params {
        Params::Seminorm(p) => seminorm(&ctx, p),
        Params::MsLimit(p) => ms(&ctx, p),
        Params::Perimeter(p) => perimeter(&ctx, p),
        Params::RelativeLimit(p) => relative(&ctx, p),
        Params::Xi(p) => xi(&ctx, p),
        Params::Iota(p) => iota(&ctx, p),
        Params::WeightedPerimeter(p) => weighted(&ctx, p),
        Params::Fractal(p) => fractal(&ctx, p),
        Params::VerifyKernel(p) => verify_kernel(&ctx, p),
        Params::PropertiesSuite(p) => properties(&ctx, p),
    }?;
    out.diagnostics.quad_evals = eval_count().saturating_sub(evals0);
    out.diagnostics.wall_time_s = start.elapsed().as_secs_f64();
    Ok(out)
}

fn seminorm(ctx: &Ctx, p: &SeminormParams) -> Result<ResultTable> {
    let name = ExperimentKind::Seminorm.name();
    let f = ScalarField::new(ctx.dim(), p.function.clone())?;
    let s_grid = ctx.grid(&SEMINORM_S_GRID);
    let q = p.q.map(|c| c.0).unwrap_or(p.p);
    let reports = if q.is_infinite() {
        besov_sup(&ctx.kernel, &f, p.p, &s_grid, &ctx.quad)?
    } else if q == p.p {
        besov_grid(&ctx.kernel, &f, p.p, &s_grid, &ctx.quad)?
    } else {
        s_grid
            .iter()
            .map(|&s| {
                besov(&SeminormRequest::new(f.clone(), p.p, s, ctx.kernel.clone()).with_q(q).with_quad(ctx.quad.clone()))
            })
            .collect::<Result<Vec<_>>>()?
    };
    let values: Vec<f64> = reports.iter().map(|r| r.value).collect();
    let mut res = ResultTable::new(name, Table::s_rows(&s_grid, &values));
    if p.compare_gagliardo {
        if ctx.measure.chi() != 0.0 {
            return Err(Error::Unsupported("the Gagliardo comparison needs κ = 0".into()));
        }
        if q != p.p {
            return Err(Error::Unsupported("the Gagliardo comparison needs q = p".into()));
        }
        let tol = ctx.tol(1e-3);
        let mut t = Table::new(&["s", "besov_pow", "constant_times_gagliardo_pow", "relative_error"]);
        for r in &reports {
            let g = match gagliardo_pow(&f, r.s, p.p, &ctx.quad) {
                Ok(v) => conversion_constant(ctx.dim(), r.s, p.p)? * v,
                Err(Error::Divergent(_)) => f64::INFINITY,
                Err(e) => return Err(e),
            };
            let c = if g.is_infinite() || r.divergent {
                // the identity then reads ∞ = ∞
                Comparison::flag(format!("conversion_s{}_both_infinite", r.s), g.is_infinite() && r.divergent)
            } else {
                Comparison::new(format!("conversion_s{}", r.s), r.power, g, tol, Metric::Relative)
            };
            t.push(vec![r.s.into(), r.power.into(), g.into(), crate::output::relative_error(r.power, g).into()]);
            res.comparisons.push(c);
        }
        res.extra_tables.push(("conversion".into(), t));
    }
    if !p.lattice.is_empty() {
        let mut t = Table::new(&["pair", "s", "norm", "lhs", "rhs", "slack"]);
        let mut reps = vec![];
        for (i, pair) in p.lattice.iter().enumerate() {
            let f = ScalarField::new(ctx.dim(), pair.f.clone())?;
            let g = ScalarField::new(ctx.dim(), pair.g.clone())?;
            for &s in &s_grid {
                let rep = lattice_check(&f, &g, &ctx.kernel, s, p.p, &ctx.quad, LATTICE_SLACK)?;
                for (label, side) in [("besov", &rep.besov), ("besov_sup", &rep.besov_sup)] {
                    t.push(vec![i.into(), s.into(), label.into(), side.lhs.into(), side.rhs.into(), side.slack.into()]);
                    res.comparisons.push(Comparison::new(
                        format!("lattice_{label}_pair{i}_s{s}"),
                        side.slack,
                        -LATTICE_SLACK,
                        0.0,
                        Metric::AtLeast,
                    ));
                }
                reps.push(rep);
            }
        }
        res.extra_tables.push(("lattice".into(), t));
        res.details = json!({ "reports": reports, "lattice": reps });
    } else {
        res.details = json!({ "reports": reports });
    }
    Ok(res)
}

fn ms(ctx: &Ctx, p: &MsLimitParams) -> Result<ResultTable> {
    let f = ScalarField::new(ctx.dim(), p.function.clone())?;
    let s_grid = ctx.grid(&DEFAULT_S_GRID);
    let m = ms_limit(&f, p.p, &ctx.kernel, &s_grid, &ctx.quad)?;
    let est = &m.estimate;
    let mut res = ResultTable::new(ExperimentKind::MsLimit.name(), Table::s_rows(&est.s, &est.raw))
        .with_estimate(est, "dimension-free MS-type formula: lim s·N_{s,p}(f)^p = (4/p)‖f‖_p^p");
    let target = est.target.expect("the MS limit has a target");
    res.comparisons.push(Comparison::new("ms_limit", est.limit, target, ctx.tol(0.01), Metric::Relative));
    res.details = json!({ "norm_pow": m.norm_pow, "upper_bound_ok": m.upper_bound_ok, "reports": m.reports });
    Ok(res)
}

fn perimeter(ctx: &Ctx, p: &PerimeterParams) -> Result<ResultTable> {
    let e = ctx.region(&p.e)?;
    let omega = ctx.region(&p.omega)?;
    let s_grid = ctx.grid(&PERIMETER_S_GRID);
    let results = if p.classical {
        s_grid.iter().map(|&s| perimeter_classical(&e, &omega, s, &ctx.quad)).collect::<Result<Vec<_>>>()?
    } else {
        perimeter_dunkl_grid(&ctx.kernel, &e, &omega, &s_grid, &ctx.quad)?
    };
    let values: Vec<f64> = results.iter().map(|r| r.value).collect();
    let mut res = ResultTable::new(ExperimentKind::Perimeter.name(), Table::s_rows(&s_grid, &values));
    if s_grid.len() >= 2 && values.iter().all(|v| v.is_finite()) {
        let target = p.oracle.map(|PerimeterOracle::UnitInterval| 1.0);
        let est = extrapolate(&s_grid, &values, target)?;
        res = res.with_estimate(&est, "exact interval perimeter 1/(s(1−2s)), so s·Per → 1");
    }
    if let Some(PerimeterOracle::UnitInterval) = p.oracle {
        let tol = ctx.tol(1e-4);
        for r in &results {
            let exact = 1.0 / (r.s * (1.0 - 2.0 * r.s));
            res.comparisons.push(Comparison::new(format!("interval_oracle_s{}", r.s), r.value, exact, tol, Metric::Relative));
        }
    }
    res.details = json!({ "results": results });
    Ok(res)
}

fn fixed_xi(x: f64) -> XiReport {
    let estimate = LimitEstimate {
        s: vec![],
        raw: vec![],
        s_times: vec![],
        limit: x,
        slope: 0.0,
        model: FitModel::Linear,
        residual: 0.0,
        target: None,
        reliable: true,
    };
    XiReport { xi: x, alt: estimate.clone(), estimate, consistent: true, clamped: false, reliable: true }
}

fn relative(ctx: &Ctx, p: &RelativeLimitParams) -> Result<ResultTable> {
    let e = ctx.region(&p.e)?;
    let omega = ctx.region(&p.omega)?;
    let s_grid = ctx.grid(&DEFAULT_S_GRID);
    let name = ExperimentKind::RelativeLimit.name();
    let provenance = "relative limit: lim s·Per_s(E,Ω) = 2[(1−Ξ_E)μ(E∩Ω) + Ξ_E μ(Eᶜ∩Ω)]";
    if p.converse {
        let c = converse_xi_recover(&ctx.kernel, &e, &omega, &s_grid, None, &ctx.quad, p.converse_tolerance)?;
        let mut res =
            ResultTable::new(name, Table::s_rows(&c.limit.s, &c.limit.raw)).with_estimate(&c.limit, provenance);
        res.comparisons.push(Comparison::new("converse_xi", c.recovered, c.direct, p.converse_tolerance, Metric::Absolute));
        res.details = json!({ "converse": c });
        return Ok(res);
    }
    let fixed = p.xi.map(fixed_xi);
    let r = relative_limit_verify(&ctx.kernel, &e, &omega, &s_grid, fixed.as_ref(), &ctx.quad)?;
    let est = &r.estimate;
    let mut res = ResultTable::new(name, Table::s_rows(&est.s, &est.raw)).with_estimate(est, provenance);
    res.comparisons.push(Comparison::new("relative_limit", est.limit, r.predicted, ctx.tol(0.02), Metric::Relative));
    res.details = json!({ "report": r });
    Ok(res)
}

fn xi(ctx: &Ctx, p: &XiParams) -> Result<ResultTable> {
    let e = ctx.region(&p.e)?;
    let x = p.x.clone().unwrap_or_else(|| vec![0.0; ctx.dim()]);
    if x.len() != ctx.dim() {
        return Err(Error::Precondition("the base point has the wrong dimension".into()));
    }
    let s_grid = ctx.grid(&XI_S_GRID);
    let rep = xi_estimate(&ctx.kernel, &e, &x, p.r, &s_grid, &ctx.quad)?;
    let est = &rep.estimate;
    let mut res = ResultTable::new(ExperimentKind::Xi.name(), Table::s_rows(&est.s, &est.raw));
    res.diagnostics.fit_residual = Some(est.residual);
    res.extrapolation = Some(est.clone());
    res = res.with_limit(rep.xi, p.target, "tail limit Ξ_E = lim s·Λ_E(x, r, s)");
    let tol = ctx.tol(XI_TOL);
    if let Some(t) = p.target {
        res.comparisons.push(Comparison::new("xi", rep.xi, t, tol, Metric::Absolute));
    }
    let mut complement = None;
    if p.complement {
        let ec = e.complement()?;
        let rc = xi_estimate(&ctx.kernel, &ec, &x, p.r, &s_grid, &ctx.quad)?;
        res.comparisons.push(Comparison::new("xi_complement_sum", rep.xi + rc.xi, 1.0, tol, Metric::Absolute));
        complement = Some(rc);
    }
    res.details = json!({ "report": rep, "complement": complement });
    Ok(res)
}

fn iota(ctx: &Ctx, p: &IotaParams) -> Result<ResultTable> {
    let e = ctx.region(&p.e)?;
    let s_grid = ctx.grid(&XI_S_GRID);
    let rep = iota_estimate(&e, &s_grid, &ctx.quad)?;
    let est = &rep.estimate;
    let mut res = ResultTable::new(ExperimentKind::Iota.name(), Table::s_rows(&est.s, &est.raw));
    res.diagnostics.fit_residual = Some(est.residual);
    res.extrapolation = Some(est.clone());
    res = res.with_limit(est.limit, p.target, "ι(E) = lim s∫_{E∖B₁}|x|^{−n−2s}dx; ι(ℝⁿ) = |S^{n−1}|/2");
    if let Some(t) = p.target {
        res.comparisons.push(Comparison::new("iota", est.limit, t, ctx.tol(0.02), Metric::Relative));
    }
    if let Some(b) = p.upper_bound {
        res.comparisons.push(Comparison::new("iota_upper_bound", est.limit, b, 0.0, Metric::AtMost));
    }
    res.details = json!({ "report": rep });
    Ok(res)
}

fn weighted(ctx: &Ctx, p: &WeightedPerimeterParams) -> Result<ResultTable> {
    let e = ctx.region(&p.e)?;
    let omega = ctx.region(&p.omega)?;
    let s_grid = ctx.grid(&WEIGHTED_S_GRID);
    let tr = weighted_trend(&ctx.measure, &e, &omega, &s_grid, &ctx.quad)?;
    let mut res = ResultTable::new(ExperimentKind::WeightedPerimeter.name(), Table::s_rows(&tr.s, &tr.values))
        .with_limit(*tr.s_times.last().unwrap_or(&f64::NAN), None, "");
    res.comparisons.push(Comparison::flag("s_times_value_decreasing", tr.decreasing));
    res.comparisons.push(Comparison::new("last_over_first", tr.last_over_first, p.max_ratio, 0.0, Metric::AtMost));
    res.details = json!({ "trend": tr });
    Ok(res)
}

fn fractal(ctx: &Ctx, p: &FractalParams) -> Result<ResultTable> {
    p.weierstrass.validate()?;
    let rep = weierstrass_box_dimension(&p.weierstrass, p.delta0)?;
    let mut t = Table::new(&["delta", "count", "residual"]);
    for sc in &rep.scales {
        t.push(vec![sc.delta.into(), sc.count.into(), sc.residual.into()]);
    }
    let target = p.weierstrass.graph_dimension();
    let mut res = ResultTable::new(ExperimentKind::Fractal.name(), t).with_limit(
        rep.dimension,
        Some(target),
        "box dimension of the Weierstrass graph 2 + log_b a",
    );
    res.diagnostics.fit_residual = Some(rep.max_residual);
    res.comparisons.push(Comparison::new("box_dimension", rep.dimension, target, p.dimension_tolerance, Metric::Absolute));
    let mut bt = Table::new(&["case", "r", "mu", "std_error", "residual"]);
    let mut fits = vec![];
    for (i, case) in p.boundary.iter().enumerate() {
        let dim = domain_dim(&case.domain).unwrap_or(ctx.dim());
        let region = Region::tagged(dim, case.domain.clone())?;
        let measure = if ctx.measure.dim() == dim { ctx.measure.clone() } else { WeightedMeasure::trivial(dim) };
        let fit = boundary_condition_fit(&region, &measure, &case.r_grid.radii(), &ctx.quad, case.s0)?;
        for smp in &fit.samples {
            bt.push(vec![i.into(), smp.r.into(), smp.mu.into(), smp.std_error.into(), smp.residual.into()]);
        }
        if let Some(eta) = case.eta_target {
            res.comparisons.push(Comparison::new(format!("eta_case{i}"), fit.eta, eta, case.eta_tolerance, Metric::Absolute));
        }
        if case.s0.is_some() {
            let ok = fit.admissibility == nplab_core::fractal::Admissibility::Admissible;
            res.comparisons.push(Comparison::flag(format!("admissible_case{i}"), ok));
        }
        fits.push(fit);
    }
    if !p.boundary.is_empty() {
        res.extra_tables.push(("boundary".into(), bt));
    }
    res.details = json!({ "box_count": rep, "boundary": fits });
    Ok(res)
}

/// Dimension implied by a shape, when it fixes one.
fn domain_dim(s: &Shape) -> Option<usize> {
    match s {
        Shape::IntervalUnion(_) => Some(1),
        Shape::AxisBox { lo, .. } => Some(lo.len()),
        Shape::Ball { center, .. } => Some(center.len()),
        Shape::HalfSpace { normal, .. } => Some(normal.len()),
        Shape::Sector { .. } | Shape::WeierstrassDomain { .. } => Some(2),
        Shape::Complement(inner) => domain_dim(inner),
        Shape::Union(v) | Shape::Intersection(v) => v.iter().find_map(domain_dim),
        Shape::Empty | Shape::Whole => None,
    }
}

fn verify_kernel(ctx: &Ctx, p: &VerifyKernelParams) -> Result<ResultTable> {
    let kernels: Vec<(f64, HeatKernel)> = if p.kappas.is_empty() {
        vec![(ctx.measure.chi(), ctx.kernel.clone())]
    } else {
        p.kappas
            .iter()
            .map(|&k| Ok((k, HeatKernel::new(WeightedMeasure::new(RootSystemSpec::z2(k)?))?)))
            .collect::<Result<Vec<_>>>()?
    };
    let mut t = Table::new(&["kappa", "check", "s", "t", "x", "y", "value"]);
    let mut res_cmp = vec![];
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.cfg.seed);
    let blank = || Cell::Text(String::new());
    for (kappa, k) in &kernels {
        let n = k.dim();
        let xs: Vec<Vec<f64>> = p.points.iter().map(|&v| vec![v; n]).collect();
        let mut worst: f64 = 0.0;
        for &time in &p.t_grid {
            let r = k.completeness_check(&[time], &xs)?;
            worst = worst.max(r.max_deviation);
            t.push(vec![(*kappa).into(), "completeness".into(), blank(), time.into(), blank(), blank(), r.max_deviation.into()]);
        }
        res_cmp.push(Comparison::new(format!("completeness_kappa{kappa}"), worst, p.completeness_tolerance, 0.0, Metric::AtMost));
        let mut worst: f64 = 0.0;
        for _ in 0..p.tuples {
            let s = rng.gen_range(0.05..2.0);
            let time = rng.gen_range(0.05..2.0);
            let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let y: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let d = k.semigroup_defect(s, time, &x, &y)?;
            worst = worst.max(d);
            t.push(vec![(*kappa).into(), "semigroup".into(), s.into(), time.into(), x[0].into(), y[0].into(), d.into()]);
        }
        if p.tuples > 0 {
            res_cmp.push(Comparison::new(format!("semigroup_kappa{kappa}"), worst, p.semigroup_tolerance, 0.0, Metric::AtMost));
        }
    }
    let mut res = ResultTable::new(ExperimentKind::VerifyKernel.name(), t);
    res.comparisons = res_cmp;
    Ok(res)
}

fn properties(ctx: &Ctx, p: &PropertiesSuiteParams) -> Result<ResultTable> {
    let regions = p.regions.iter().map(|s| ctx.region(s)).collect::<Result<Vec<_>>>()?;
    let omega = ctx.region(&p.omega)?;
    let rep = perimeter_properties_suite(&ctx.kernel, &regions, &omega, p.s, &ctx.quad, p.count, ctx.cfg.seed)?;
    let mut t = Table::new(&["check", "instance", "lhs", "rhs", "passed", "informational"]);
    let mut res_cmp = vec![];
    for c in &rep.checks {
        t.push(vec![c.name.clone().into(), c.instance.into(), c.lhs.into(), c.rhs.into(), c.passed.into(), c.informational.into()]);
        if !c.informational {
            res_cmp.push(Comparison::flag(format!("{}_{}", c.name, c.instance), c.passed));
        }
    }
    let mut res = ResultTable::new(ExperimentKind::PropertiesSuite.name(), t);
    res.comparisons = res_cmp;
    res.details = json!({ "s": rep.s, "tolerance": rep.tolerance, "all_passed": rep.all_passed });
    Ok(res)
}

/// Failure of a run, mapped to the process exit status.
#[derive(Debug)]
pub enum RunError {
    /// Bad configuration or arguments (exit 2).
    Config(String),
    /// The library cannot handle the request or failed numerically (exit 3).
    Capability(Error),
    /// Output could not be written (exit 3).
    Io(std::io::Error),
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
        match self {
            RunError::Config(m) => write!(f, "{m}"),
            RunError::Capability(e) => write!(f, "{e}"),
            RunError::Io(e) => write!(f, "cannot write outputs: {e}"),
        }
    }
}

impl std::error::Error for RunError {}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Capability(_) | RunError::Io(_) => 3,
        }
    }
}

/// Key of a configuration in the result cache.
pub fn config_cache_key(cfg: &RunConfig) -> String {
    let quad = serde_json::to_string(&effective_quad(cfg)).expect("quadrature settings serialize");
    cache_key(cfg.kind().name(), &cfg.canonical(), &quad)
}

pub struct RunOutcome {
    pub result: ResultTable,
    pub written: Written,
    pub cache_hit: bool,
}

impl RunOutcome {
    pub fn passed(&self) -> bool {
        self.result.all_passed()
    }

    pub fn exit_code(&self) -> i32 {
        if self.passed() { 0 } else { 1 }
    }
}

/// Runs a configuration through the cache and writes its outputs to `out`.
pub fn execute(cfg: &RunConfig, out: &Path, cache: &Cache) -> std::result::Result<RunOutcome, RunError> {
    let key = config_cache_key(cfg);
    let start = Instant::now();
    let (result, cache_hit) = match cache.get(&key) {
        Some(mut r) => {
            r.diagnostics.cache_hit = true;
            r.diagnostics.wall_time_s = start.elapsed().as_secs_f64();
            (r, true)
        }
        None => {
            let r = run_experiment(cfg).map_err(RunError::Capability)?;
            cache.put(&key, &r);
            (r, false)
        }
    };
    let written = write_outputs(out, &result, cfg).map_err(RunError::Io)?;
    Ok(RunOutcome { result, written, cache_hit })
}

/// Output directory: the command-line value, else the configured one, else `out`.
pub fn output_dir(cli: Option<&Path>, cfg: &RunConfig) -> PathBuf {
    cli.map(Path::to_path_buf).or_else(|| cfg.output.as_ref().map(PathBuf::from)).unwrap_or_else(|| PathBuf::from("out"))
}
