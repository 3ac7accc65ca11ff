use thiserror::Error;

#[derive(Debug, Error)]
pub enum CobraError {
    #[error("matrix must have at least one row and one column")]
    EmptyMatrix,
    #[error("non-finite value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },
    #[error("shape mismatch: expected {expected:?}, found {found:?}")]
    ShapeMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("graph is disconnected ({components} components)")]
    Disconnected { components: usize },
    #[error("all pre-weights are zero; cannot normalize")]
    ZeroWeights,
    #[error("infeasible hold-out mask: {0}")]
    InfeasibleHoldout(String),
    #[error("non-finite iterate encountered in {0}")]
    NonFiniteIterate(&'static str),
    #[error("problem too large for the certificate solve: {size} > cap {cap}")]
    TooLarge { size: usize, cap: usize },
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, CobraError>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(CobraError::InvalidParameter(msg.into()))
}
