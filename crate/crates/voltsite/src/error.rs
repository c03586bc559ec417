use std::path::{Path, PathBuf};

/// Every failure a command can report, grouped by exit code.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{0}")]
    Usage(String),
    #[error("config {file}: {path}: {message}")]
    Config { file: String, path: String, message: String },
    #[error("invalid {file}: {message}")]
    Validation { file: String, message: String },
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: {source}", path.display())]
    Csv { path: PathBuf, source: csv::Error },
    #[error("{0}")]
    Runtime(String),
}

impl Error {
    pub const EXIT_USAGE: u8 = 2;
    pub const EXIT_VALIDATION: u8 = 3;
    pub const EXIT_RUNTIME: u8 = 4;

    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Usage(_) | Error::Config { .. } => Self::EXIT_USAGE,
            Error::Validation { .. } => Self::EXIT_VALIDATION,
            Error::Io { .. } | Error::Csv { .. } | Error::Runtime(_) => Self::EXIT_RUNTIME,
        }
    }

    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        Error::Io { path: path.to_path_buf(), source }
    }

    pub(crate) fn runtime(e: impl std::fmt::Display) -> Self {
        Error::Runtime(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
