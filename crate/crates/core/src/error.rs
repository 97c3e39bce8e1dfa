use thiserror::Error;

/// Errors raised by mesh construction, assembly, the split basis and the solvers.
#[derive(Debug, Error)]
pub enum DgError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("triangle {triangle} straddles a coefficient interface")]
    UnresolvedCoefficient { triangle: usize },

    #[error("non-positive coefficient {value} on triangle {triangle}")]
    NonPositiveCoefficient { triangle: usize, value: f64 },

    #[error("structural zero block violated: max entry {max_entry:e} exceeds {threshold:e}")]
    ZeroBlockViolation { max_entry: f64, threshold: f64 },

    #[error("non-positive diagonal entry {value} at row {row}")]
    NonPositiveDiagonal { row: usize, value: f64 },

    #[error("matrix is not symmetric positive definite ({context})")]
    NotSpd { context: String },

    #[error("{method} breakdown at iteration {iteration}: {reason}")]
    Breakdown { method: &'static str, iteration: usize, reason: String },

    #[error("{method} did not converge in {iterations} iterations (relative residual {residual:e})")]
    NotConverged { method: &'static str, iterations: usize, residual: f64 },

    #[error("stationary iteration diverged at step {iteration} (relative residual {residual:e})")]
    Diverged { iteration: usize, residual: f64 },

    #[error("effective condition number index m = {m} requires more than {n} eigenvalues")]
    InvalidIndex { m: usize, n: usize },

    #[error("meshes are not nested: {0}")]
    NotNested(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, DgError>;
