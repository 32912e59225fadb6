use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("code construction: {0}")]
    Construction(String),
    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("mse curve: {0}")]
    Curve(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("malformed alist: {0}")]
    Alist(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_len(expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::LengthMismatch { expected, actual })
    }
}
