use std::path::PathBuf;

/// Everything the IO layer can report.
#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },

    #[error("invalid configuration at {path}: {message}")]
    Config { path: String, message: String },

    #[error("cannot write {}: {source}", path.display())]
    Write { path: PathBuf, source: std::io::Error },

    #[error("cannot read {}: {source}", path.display())]
    Read { path: PathBuf, source: std::io::Error },

    #[error("malformed ledger CSV: {0}")]
    Csv(String),

    #[error("unknown ledger column {0:?}")]
    UnknownColumn(String),

    #[error(transparent)]
    Core(#[from] surfflow_core::Error),
}

impl IoError {
    pub(crate) fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        IoError::Config { path: path.into(), message: message.into() }
    }
}

pub type IoResult<T> = Result<T, IoError>;
