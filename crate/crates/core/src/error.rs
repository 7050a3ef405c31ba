use thiserror::Error;

use crate::engine::OrbitTrace;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("invalid point: {0}")]
    InvalidPoint(String),
    #[error("sampling failed: {0}")]
    Sampling(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("estimation failed: {0}")]
    Estimation(String),
    #[error("iteration diverged at step {step}: {reason}")]
    Diverged {
        step: usize,
        reason: String,
        trace: Box<OrbitTrace>,
    },
}
