use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use nplab_cli::cache::Cache;
use nplab_cli::config::{parse_config, ExperimentKind};
use nplab_cli::run::{execute, output_dir, RunError};

/// Runs one nplab experiment from a JSON configuration.
#[derive(Parser, Debug)]
#[command(name = "nplab", version)]
struct Cli {
    /// Experiment name; must match the configuration's `experiment`.
    experiment: String,
    /// Path of the JSON configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (default: the configured one, else `out`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (default: NPLAB_THREADS, else all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Disable the on-disk result cache.
    #[arg(long)]
    no_cache: bool,
    /// Overrides the configured seed.
    #[arg(long)]
    seed: Option<u64>,
}

fn threads(flag: Option<usize>) -> Result<Option<usize>, String> {
    if let Some(n) = flag {
        return Ok(Some(n));
    }
    match std::env::var("NPLAB_THREADS") {
        Ok(v) => v.trim().parse().map(Some).map_err(|_| format!("NPLAB_THREADS must be an integer, got `{v}`")),
        Err(_) => Ok(None),
    }
}

fn run(cli: Cli) -> Result<i32, RunError> {
    if ExperimentKind::from_name(&cli.experiment).is_none() {
        let names: Vec<&str> = ExperimentKind::ALL.iter().map(|k| k.name()).collect();
        return Err(RunError::Config(format!("unknown experiment `{}`; expected one of {}", cli.experiment, names.join(", "))));
    }
    let n = threads(cli.threads).map_err(RunError::Config)?;
    if let Some(n) = n.filter(|&n| n > 0) {
        // the global pool can only be set once per process
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let text = std::fs::read_to_string(&cli.config)
        .map_err(|e| RunError::Config(format!("cannot read {}: {e}", cli.config.display())))?;
    let mut cfg = parse_config(&text).map_err(|e| RunError::Config(format!("{}: {e}", cli.config.display())))?;
    if cfg.kind().name() != cli.experiment {
        return Err(RunError::Config(format!(
            "command names experiment `{}` but the configuration describes `{}`",
            cli.experiment,
            cfg.kind()
        )));
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    let out = output_dir(cli.out.as_deref(), &cfg);
    let cache = if cli.no_cache {
        Cache::disabled()
    } else {
        let dir = std::env::var_os("NPLAB_CACHE_DIR").map(PathBuf::from).unwrap_or_else(|| out.join(".nplab-cache"));
        Cache::open(&dir)
    };
    let outcome = execute(&cfg, &out, &cache)?;
    let r = &outcome.result;
    if let Some(l) = r.extrapolated_limit {
        match (r.target_value, r.relative_error) {
            (Some(t), Some(e)) => println!("{}: limit {l:.10} target {t:.10} relative error {e:.3e}", r.experiment),
            _ => println!("{}: limit {l:.10}", r.experiment),
        }
    }
    for c in &r.comparisons {
        println!("{} {}: value {:.10e} target {:.10e}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.value, c.target);
    }
    println!(
        "wrote {} and {}{}",
        outcome.written.csv.display(),
        outcome.written.json.display(),
        if outcome.cache_hit { " (cached)" } else { "" }
    );
    Ok(outcome.exit_code())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
