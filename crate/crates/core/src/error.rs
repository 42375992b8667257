use thiserror::Error;

#[derive(Debug, Error)]
pub enum LangevinError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("precision matrix is not symmetric (max asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },

    #[error("matrix is not positive definite: eigenvalue {eigenvalue:e} at index {index}")]
    NotPositiveDefinite { index: usize, eigenvalue: f64 },

    #[error("matrix is not positive semidefinite: eigenvalue {eigenvalue:e}")]
    NotPositiveSemidefinite { eigenvalue: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("step size h = {h} outside the admissible range {range}")]
    StepOutOfRange { h: f64, range: String },

    #[error("label at index {index} is {value}, expected 0 or 1")]
    InvalidLabel { index: usize, value: f64 },

    #[error("target has no per-observation gradients; subsampled oracle unavailable")]
    NotSumStructured,

    #[error("gradient oracle {0} is not valid for this operation")]
    OracleMismatch(&'static str),

    #[error("precision {epsilon} unreachable: infimum of the bias term over the step grid is {infimum}")]
    UnreachablePrecision { epsilon: f64, infimum: f64 },

    #[error("empty sample")]
    EmptySample,

    #[error("negative radicand {0}: the supplied lower bound on the mean potential is invalid")]
    NegativeRadicand(f64),

    #[error("malformed target descriptor: {0}")]
    Descriptor(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, LangevinError>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> LangevinError {
    LangevinError::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
