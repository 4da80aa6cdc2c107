use thiserror::Error;

/// Errors produced by the recovery library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("index {index} out of range (valid 1..={max})")]
    OutOfRange { index: usize, max: usize },

    #[error("invalid spectrum: {0}")]
    InvalidSpectrum(String),

    #[error("spectrum tail diverges; bound comparisons are refused")]
    DivergentTail,

    #[error("tail sum beyond n={n} is zero; density is undefined")]
    ZeroTail { n: usize },

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("least squares reconstruction failed (alpha_hat = {alpha_hat:e})")]
    Reconstruction { alpha_hat: f64 },

    #[error("point set is empty")]
    EmptyPointSet,

    #[error("domain error: {0}")]
    Domain(String),

    #[error("insufficient points: need {needed}, have {have}")]
    InsufficientPoints { needed: usize, have: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("i/o: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
