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
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("{path}: no data rows")]
    EmptyFile { path: PathBuf },
    #[error("{path}: missing column '{column}'")]
    MissingColumn { path: PathBuf, column: String },
    #[error("{path}: data row {row}, column '{column}': {detail}")]
    Parse {
        path: PathBuf,
        row: usize,
        column: String,
        detail: String,
    },
    #[error("input already preprocessed (marker column '{0}' present); refusing to standardize twice")]
    AlreadyPreprocessed(String),
    #[error("{0}")]
    InvalidArg(String),
    #[error(transparent)]
    Core(#[from] ordr2_core::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> CliError {
        let path = path.into();
        move |source| CliError::Io { path, source }
    }
}
