use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("non-finite value {value} at position {index}")]
    NonFinite { index: usize, value: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("sequence must be non-negative and non-increasing (violated at position {0})")]
    NotDecreasing(usize),

    #[error("zero sequence has no sharpness witness")]
    ZeroSequence,

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("index {index} does not apply to this representation: {reason}")]
    IndexMismatch { index: String, reason: String },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("QR iteration did not converge after {0} sweeps")]
    NoConvergence(usize),

    #[error("approximation guarantee violated: sup error {sup_error} > epsilon {epsilon}")]
    GuaranteeViolated { sup_error: f64, epsilon: f64 },

    #[error("config: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
