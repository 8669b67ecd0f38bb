use thiserror::Error;

/// Errors produced anywhere in the toolkit.
#[derive(Debug, Error)]
pub enum AmbiError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unsupported convention: {0}")]
    UnsupportedConvention(String),

    #[error("malformed signal: {0}")]
    MalformedSignal(String),

    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: u64, message: String },

    #[error("unsupported format: {0}")]
    UnsupportedFormat(String),

    #[error("ill-conditioned layout (condition number {condition:.3e}): {message}")]
    IllConditioned { condition: f64, message: String },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, AmbiError>;

impl AmbiError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        AmbiError::InvalidArgument(msg.into())
    }

    pub(crate) fn parse(offset: u64, msg: impl Into<String>) -> Self {
        AmbiError::Parse {
            offset,
            message: msg.into(),
        }
    }
}
