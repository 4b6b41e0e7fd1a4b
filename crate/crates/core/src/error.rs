use alloc::string::String;

/// Errors raised by model construction and the solvers.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CoreError {
    #[error("shape mismatch: expected {expected_rows}x{expected_cols}, found {rows}x{cols}")]
    ShapeMismatch {
        expected_rows: usize,
        expected_cols: usize,
        rows: usize,
        cols: usize,
    },
    #[error("dimension {0} exceeds the supported maximum")]
    TooLarge(usize),
    #[error("invalid marginal: {0}")]
    InvalidMarginal(String),
    #[error("invalid cost: {0}")]
    InvalidCost(String),
    #[error("invalid transport plan: {0}")]
    InvalidPlan(String),
    #[error("invalid potentials: {0}")]
    InvalidPotentials(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("problem is infeasible")]
    Infeasible,
    #[error("problem is unbounded")]
    Unbounded,
    #[error("iteration limit reached after {0} iterations")]
    IterationLimit(usize),
    #[error("internal solver error: {0}")]
    Internal(String),
}

pub type Result<T, E = CoreError> = core::result::Result<T, E>;

macro_rules! bail {
    ($variant:ident, $($arg:tt)*) => {
        return Err($crate::CoreError::$variant(alloc::format!($($arg)*)))
    };
}
pub(crate) use bail;
