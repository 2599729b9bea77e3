use std::path::PathBuf;

use nni_core::SolveStatus;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] nni_core::Error),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),

    #[error("json output: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, CliError>;

pub const EXIT_CONVERGED: i32 = 0;
pub const EXIT_MAX_ITERATIONS: i32 = 2;
pub const EXIT_HALVING_EXHAUSTED: i32 = 3;
pub const EXIT_NUMERICAL_ERROR: i32 = 4;
pub const EXIT_IO_OR_CONFIG: i32 = 5;

pub fn exit_code(status: &SolveStatus) -> i32 {
    match status {
        SolveStatus::Converged => EXIT_CONVERGED,
        SolveStatus::MaxIterations => EXIT_MAX_ITERATIONS,
        SolveStatus::HalvingExhausted => EXIT_HALVING_EXHAUSTED,
        SolveStatus::NumericalError(_) => EXIT_NUMERICAL_ERROR,
    }
}
