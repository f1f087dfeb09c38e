use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("unknown matrix '{name}'; known names: {known}")]
    UnknownMatrix { name: String, known: String },
    #[error("download of {url} failed: {message}")]
    Network { url: String, message: String },
    #[error("{name}: expected {expected}, found {found}")]
    Mismatch {
        name: String,
        expected: String,
        found: String,
    },
    #[error("archive does not contain {0}")]
    MissingArchiveEntry(String),
    #[error("nothing to report: {0}")]
    EmptyReport(String),
    #[error("time step {step}: {source}")]
    Step {
        step: usize,
        #[source]
        source: warpell_core::Error,
    },
    #[error(transparent)]
    Core(#[from] warpell_core::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, LabError>;

pub(crate) fn io_err(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> LabError {
    let path = path.into();
    move |source| LabError::Io { path, source }
}
