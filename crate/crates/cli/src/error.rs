use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] cme_core::Error),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{}: {source}", path.display())]
    Json {
        path: PathBuf,
        source: serde_json::Error,
    },
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// 2 for bad input (flags, model files, dumps), 1 for numerical or
    /// I/O failures.
    pub fn exit_code(&self) -> u8 {
        use cme_core::Error as E;
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(E::Usage(_) | E::Parse { .. } | E::InvalidModel(_) | E::OutOfBounds { .. }) => 2,
            _ => 1,
        }
    }
}
