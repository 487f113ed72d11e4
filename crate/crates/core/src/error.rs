use thiserror::Error;

/// Errors surfaced by the simulation and analysis layers.
#[derive(Debug, Error)]
pub enum CoreError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("physical grid too small: need at least {required} points per axis, got {actual}")]
    GridTooSmall { required: usize, actual: usize },

    #[error("lattice mismatch: {0}")]
    LatticeMismatch(String),

    #[error("unsupported option: {0}")]
    Unsupported(String),

    #[error("Wick table is missing the ({m},{n}) entry")]
    MissingWickEntry { m: u32, n: u32 },

    #[error("field contains non-finite coefficients")]
    NonFiniteField,

    #[error("transition covariance lost positive semidefiniteness (residual {residual:e})")]
    CovarianceNotPsd { residual: f64 },

    #[error("solution blew up at step {step} (t = {time})")]
    BlowUp { step: usize, time: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}
