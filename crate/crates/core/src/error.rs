use thiserror::Error;

/// Errors raised by the numerical layers of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("index {index} out of range for size {size}")]
    IndexOutOfRange { index: usize, size: usize },

    #[error("2·N·c1·l = {0} is not an integer")]
    NonIntegerShift(f64),

    #[error("channel profile has no paths")]
    EmptyProfile,

    #[error("inconsistent link grid: {0}")]
    InconsistentLinks(String),

    #[error("noise power must be nonnegative, got {0}")]
    NegativeNoisePower(f64),

    #[error("matrix is identically zero")]
    ZeroMatrix,

    #[error("non-positive curvature p^H A p = {0}; operator is not Hermitian positive definite")]
    NonPositiveCurvature(f64),

    #[error("diagonal entry {index} is not strictly positive ({value})")]
    NonPositiveDiagonal { index: usize, value: f64 },

    #[error("system is singular")]
    Singular,

    #[error("row {0} is identically zero")]
    ZeroRow(usize),

    #[error("bit count {bits} is not a multiple of {per_symbol} bits per symbol")]
    BitCount { bits: usize, per_symbol: usize },

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("empty input")]
    Empty,

    #[error("unknown method {0:?}")]
    UnknownMethod(String),
}

pub type Result<T> = std::result::Result<T, Error>;
