use thiserror::Error;

/// Errors produced by the solver library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("field length {actual} does not match grid size {expected}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("field contains a non-finite value at index {0}")]
    NonFinite(usize),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParam { name: &'static str, reason: String },

    /// CG found a direction of non-positive curvature; the operator is not SPD.
    #[error("PCG breakdown at iteration {iteration}: curvature {curvature:e}")]
    PcgBreakdown { iteration: usize, curvature: f64 },

    #[error("Poisson solve did not converge (relative residual {0:e})")]
    PoissonFailed(f64),

    #[error("preconditioner factorization failed at row {0}")]
    Factorization(usize),

    #[error("grid has {cells} cells, enumeration supports at most {max}")]
    TooLarge { cells: usize, max: usize },

    #[error("no binary configuration meets the volume target")]
    Infeasible,

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("index {index} out of range (expected < {len})")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("multiplier search left the admissible range |lambda| <= {0}")]
    BracketExceeded(f64),
}

pub type Result<T> = std::result::Result<T, Error>;
