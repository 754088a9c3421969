use thiserror::Error;

/// Errors raised by the estimation library.
#[derive(Debug, Error)]
pub enum DoaError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("numeric failure at iteration {iteration}: {source}")]
    Iteration {
        iteration: usize,
        #[source]
        source: Box<DoaError>,
    },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl DoaError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        DoaError::InvalidArgument(msg.into())
    }

    pub(crate) fn numeric(msg: impl Into<String>) -> Self {
        DoaError::Numeric(msg.into())
    }

    /// True for failures of the numerical kind (as opposed to bad input).
    pub fn is_numeric(&self) -> bool {
        match self {
            DoaError::Numeric(_) => true,
            DoaError::Iteration { .. } => true,
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, DoaError>;
