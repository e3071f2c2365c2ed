use std::path::{Path, PathBuf};

#[derive(Debug, thiserror::Error)]
pub enum AppError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("malformed code file (line {line}): {msg}")]
    Malformed { line: usize, msg: String },
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Runtime(String),
    #[error(transparent)]
    Core(#[from] meppm_core::Error),
}

impl AppError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        AppError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    /// 1 usage or configuration, 2 verification failure, 3 runtime failure.
    pub fn exit_code(&self) -> u8 {
        use meppm_core::Error as E;
        match self {
            AppError::Config(_) | AppError::Malformed { .. } => 1,
            AppError::Verification(_) => 2,
            AppError::Io { .. } | AppError::Runtime(_) => 3,
            AppError::Core(e) => match e {
                E::SearchExhausted { .. }
                | E::EnumerationLimit { .. }
                | E::ConstellationTooLarge { .. } => 3,
                _ => 1,
            },
        }
    }
}
