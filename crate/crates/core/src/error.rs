use thiserror::Error;

/// Errors raised by the kornlab core.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("invalid weight: {0}")]
    InvalidWeight(String),

    #[error("invalid ellipticity matrix: {0}")]
    InvalidEllipticity(String),

    #[error("beta = {beta} outside [0, 1/2)")]
    BetaOutOfRange { beta: f64 },

    #[error(
        "condition lambda > 4 n Lambda beta / (1 - 2 beta)^2 fails for beta = {beta} (max admissible {beta_star})"
    )]
    BetaConditionViolated { beta: f64, beta_star: f64 },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid constraints: {0}")]
    InvalidConstraints(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not positive definite (pivot {pivot} = {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("right-hand form of the pencil is not positive definite (pivot {pivot} = {value:e})")]
    IndefiniteB { pivot: usize, value: f64 },

    #[error("linear solve residual {residual:e} above tolerance {tol:e}")]
    SolveInaccurate { residual: f64, tol: f64 },

    #[error("eigensolver did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("mu bracket [{lo:e}, {hi:e}] does not contain an interior maximum")]
    BracketExhausted { lo: f64, hi: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Every problem found in a config document, in key order.
    #[error("invalid config: {}", .0.join("; "))]
    Config(Vec<String>),

    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
