//! Configuration-driven experiment harness for the nplab library.

pub mod cache;
pub mod config;
pub mod fuzzing;
pub mod output;
pub mod run;

pub use cache::{Cache, CacheMode};
pub use config::{parse_config, ConfigError, ExperimentKind, RunConfig};
pub use output::{Comparison, ResultTable, Table};
pub use run::{execute, run_experiment, RunError, RunOutcome};
