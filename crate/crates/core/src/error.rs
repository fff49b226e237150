use thiserror::Error;

use crate::grid::Basis;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("domain error in {function}: {detail}")]
    Domain {
        function: &'static str,
        detail: String,
    },

    #[error("unsupported branch: {0}")]
    UnsupportedBranch(String),

    #[error("basis mismatch: {left:?} vs {right:?}")]
    BasisMismatch { left: Basis, right: Basis },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("invalid normalization: {0}")]
    InvalidNormalization(String),

    #[error("Fock space dimension {dim} exceeds the capacity budget {budget}")]
    Capacity { dim: u128, budget: usize },

    #[error("unsupported group element: {0}")]
    UnsupportedElement(String),

    #[error("particle number mismatch: {0}")]
    ParticleNumber(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(function: &'static str, detail: impl Into<String>) -> Error {
    Error::Domain {
        function,
        detail: detail.into(),
    }
}
