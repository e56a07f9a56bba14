//! Experiment runner for `guided-mh`: TOML configs, random-walk burn-in and
//! `rho` tuning, parallel replications, trace/aggregate CSV output.

pub mod config;
pub mod error;
pub mod run;
pub mod tuning;

pub use config::{load_config, validate_config, ExperimentConfig, PreparedTarget, TargetConfig};
pub use error::{BenchError, BenchResult};
pub use run::{emit_table, run_experiment, AggregateRow, ExperimentResult, Metric};
