use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A parametrization was evaluated exactly at a corner, where only
    /// one-sided derivatives exist.
    #[error("parameter s = {s} lies on corner {index}")]
    CornerEvaluation { index: usize, s: f64 },

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("matrix is singular at pivot index {pivot}")]
    SingularMatrix { pivot: usize },

    #[error("pole of the Mellin symbol at y = {re} + {im}i")]
    Pole { re: f64, im: f64 },

    #[error("numerical failure: {0}")]
    NumericalFailure(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
