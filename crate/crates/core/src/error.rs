use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: String, got: String },

    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },

    #[error(
        "insufficient training budget: {n_samples} samples for {n_params} parameters \
         (r_params = {r_params:.2}, need > {required})"
    )]
    Budget {
        n_samples: usize,
        n_params: usize,
        r_params: f64,
        required: f64,
    },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Image(#[from] image::ImageError),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}

pub(crate) fn mismatch<T>(expected: impl ToString, got: impl ToString) -> Result<T> {
    Err(Error::DimensionMismatch {
        expected: expected.to_string(),
        got: got.to_string(),
    })
}
