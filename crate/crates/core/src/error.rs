//! Error type shared by all modules.

use crate::optimize::Trajectory;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("problem size must be at least {min}, got {got}")]
    InvalidSize { got: usize, min: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("KL divergence undefined: {0}")]
    KlUndefined(String),

    /// Step-size underflow in the adaptive integrator. Carries everything
    /// recorded up to the failure point.
    #[error("integration failed: step size underflow at tau = {tau}")]
    IntegrationFailure { tau: f64, partial: Box<Trajectory> },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("malformed file: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
