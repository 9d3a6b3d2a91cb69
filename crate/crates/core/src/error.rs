use thiserror::Error;

/// Errors raised by the numerical kernels.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("degree mismatch: expected {expected}, found {found}")]
    DegreeMismatch { expected: usize, found: usize },

    #[error("insufficient degree: operation needs degree >= {needed}, tensor has {found}")]
    InsufficientDegree { needed: usize, found: usize },

    #[error("degree {degree} exceeds the maximum chaos order {max}")]
    DegreeOverflow { degree: usize, max: usize },

    #[error("ladder value {n} exceeds the available dimension {dim}")]
    LadderExceedsDimension { n: usize, dim: usize },

    #[error("symmetric tensor of degree {degree} over dimension {dim} is too large to store")]
    TooLarge { degree: usize, dim: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("malformed record: {0}")]
    Malformed(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
