use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("row {row}: {message}")]
    Row { row: u64, message: String },
    #[error("missing column {0:?} in the header row")]
    MissingColumn(String),
    #[error("settings: {0}")]
    Settings(String),
    #[error("{0}")]
    Pipeline(String),
    #[error(transparent)]
    Core(#[from] stldtw_core::Error),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}
