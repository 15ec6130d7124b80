use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Caller passed an argument outside the operation's domain.
    #[error("usage error: {0}")]
    Usage(String),

    #[error("state {state:?} is outside the box with caps {caps:?}")]
    OutOfBounds { state: Vec<i64>, caps: Vec<u32> },

    #[error("index {index} is outside 1..={size}")]
    IndexOutOfRange { index: usize, size: usize },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    /// The matrix handed to a propagator breaks a generator property.
    #[error("structural error: {0}")]
    Structural(String),

    /// A probability component fell below the clamping tolerance.
    #[error("negative probability {value:e} at index {index}")]
    NegativeProbability { index: usize, value: f64 },
}

impl Error {
    pub(crate) fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }
}
