use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid config: {0}")]
    ConfigInvalid(String),
    #[error("unknown experiment `{0}`")]
    UnknownExperiment(String),
    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv failure: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Core(#[from] ergodic_osc_core::Error),
}

pub type CliResult<T> = std::result::Result<T, CliError>;
