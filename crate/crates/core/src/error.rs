use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The level value is 0 or 1, where the tangential gradient vanishes.
    #[error("focal point: level {level} has vanishing tangential gradient")]
    FocalPoint { level: f64 },

    #[error("ODE solver failure at t = {t} after {steps} steps: {reason}")]
    SolverFailure {
        t: f64,
        steps: usize,
        reason: String,
    },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
