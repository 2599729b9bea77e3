use thiserror::Error;

/// Errors raised by the problem operators, the sparse kernels and the solver.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A vector that must be strictly positive has a nonpositive entry.
    #[error("positivity violated at index {index} (value {value:e})")]
    PositivityViolation { index: usize, value: f64 },

    /// The matrix fails a structural requirement (Z-pattern, irreducibility, squareness).
    #[error("structural violation: {0}")]
    Structural(String),

    /// Numerically singular pivot. `pivot` is the elimination step that failed.
    #[error("matrix is numerically singular at pivot {pivot}")]
    Singular { pivot: usize },

    /// A quantity guaranteed by M-matrix theory came out wrong; indicates an upstream bug
    /// or a breakdown of floating point.
    #[error("internal consistency check failed: {0}")]
    InternalConsistency(String),

    /// No step length `2^-j`, `j <= max_halvings`, made the look-ahead residual positive.
    #[error("halving procedure exhausted after {halvings} halvings")]
    HalvingExhausted { halvings: u32 },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}
