use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian (relative residual {residual:e})")]
    NotHermitian { residual: f64 },

    #[error("operator is not positive semi-definite (smallest eigenvalue {min_eigenvalue:e})")]
    NotPositive { min_eigenvalue: f64 },

    #[error("operator is not a projector (residual {residual:e})")]
    NotProjector { residual: f64 },

    #[error("trace {trace} exceeds the allowed bound")]
    TraceExceeded { trace: f64 },

    #[error("non-finite matrix entry")]
    NonFinite,

    #[error("supports overlap (largest principal cosine {overlap})")]
    OverlappingSupports { overlap: f64 },

    #[error("operators do not commute: {label} has relative norm {norm:e}")]
    NonCommuting { label: String, norm: f64 },

    #[error("empty operator list")]
    EmptyInput,

    #[error("states are indistinguishable (overlap {overlap})")]
    IndistinguishableStates { overlap: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension {dim} exceeds the limit {max}")]
    DimensionGuard { dim: usize, max: usize },

    #[error("block structure is not valid for the operator pair: {0}")]
    InvalidBlockStructure(String),

    #[error("numerical tolerance breakdown: {0}")]
    ToleranceBreakdown(String),
}

pub type Result<T> = std::result::Result<T, Error>;
