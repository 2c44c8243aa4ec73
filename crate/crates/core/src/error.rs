use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix must have at least one row and one column")]
    EmptyMatrix,

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("{context}: dimension mismatch, expected {expected:?}, found {found:?}")]
    DimensionMismatch {
        context: &'static str,
        expected: (usize, usize),
        found: (usize, usize),
    },

    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is singular to working precision (pivot column {pivot_col})")]
    Singular { pivot_col: usize },

    #[error("unsupported order q = {0}")]
    UnsupportedOrder(usize),

    #[error("horizon must be positive and finite, got {0}")]
    InvalidHorizon(f64),

    #[error("norm must be finite and nonnegative, got {0}")]
    InvalidNorm(f64),

    #[error("result overflowed to a non-finite value")]
    Overflow,

    #[error("precision must be at least {min} decimal digits, got {got}")]
    InvalidPrecision { min: u32, got: u32 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
