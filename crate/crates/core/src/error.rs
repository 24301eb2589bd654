use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScatterError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("length mismatch: expected {expected} samples, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("operands live on different wavevector grids")]
    GridMismatch,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("input not valid for this operation: {0}")]
    InvalidInput(String),

    #[error("norm drifted by {drift:.3e} at t = {time:.4} (limit {limit:.1e}); reduce the time step")]
    NormDrift { time: f64, drift: f64, limit: f64 },
}

pub type Result<T> = std::result::Result<T, ScatterError>;
