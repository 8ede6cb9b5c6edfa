use thiserror::Error;

use crate::fields::ValidationReport;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("series is identically zero")]
    ZeroSeries,

    #[error("pole encountered at {0}")]
    Pole(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(ValidationReport),

    #[error("trajectory left the admissible region at k = {k}")]
    Escaped { k: f64 },

    #[error("step size underflow at k = {k} (h = {h:e})")]
    StepUnderflow { k: f64, h: f64 },

    #[error("step limit reached at k = {k}")]
    StepLimit { k: f64 },

    #[error("degenerate configuration: {0}")]
    Degenerate(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("path is not tangent to the field (residual {residual:e})")]
    Tangency { residual: f64 },

    #[error("did not converge: {0}")]
    NotConverged(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
