use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum AppError {
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("{0}")]
    Parse(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] opconv_core::Error),
}

impl AppError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        AppError::Io { path: path.into(), source }
    }

    /// Process exit status for this error: 2 for bad input, 3 for IO.
    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Io { .. } => 3,
            _ => 2,
        }
    }
}

pub type AppResult<T> = Result<T, AppError>;
