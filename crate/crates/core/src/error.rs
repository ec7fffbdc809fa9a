use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected d = {expected}, got d = {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("operation only supported in dimension 1 (got d = {0})")]
    UnsupportedDimension(usize),

    #[error("invalid order: {0} (must be >= 1)")]
    InvalidOrder(f64),

    #[error("incompatible grids: {0}")]
    IncompatibleGrids(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("chain diverged to a non-finite position at step {step} (step size too large?)")]
    DivergedChain { step: u64 },

    #[error("no convergence after {iterations} iterations (last residual {residual:e})")]
    ConvergenceFailure { iterations: u64, residual: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("not implemented: {0}")]
    NotImplemented(String),

    #[error("quadrature failure: {0}")]
    QuadratureFailure(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
