use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Input data violates a documented invariant (non-Hermitian matrix, non-finite values, ...).
    #[error("validation error: {0}")]
    Validation(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("operands are expressed in different band decompositions")]
    DecompositionMismatch,

    /// Eigensolver or norm estimator failed to meet its accuracy contract.
    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("too few sweep points: need at least {needed}, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    #[error("derivative of order {order} is not classified Bounded")]
    NotBounded { order: usize },
}

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub(crate) fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
