//! Experiment harness: config loading, named experiments and CSV output.

pub mod config;
pub mod error;
pub mod experiments;
pub mod output;

pub use config::{load_config, ExperimentConfig};
pub use error::{CliError, CliResult};
pub use experiments::{run, RunOutcome};
pub use output::{emit_csv, write_csv, ResultRow};
