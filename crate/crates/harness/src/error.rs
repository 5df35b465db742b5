use std::path::PathBuf;

/// Errors raised by the harness layer.
#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("steady-state window covers {periods:.1} periods, at least 10 are required")]
    WindowTooShort { periods: f64 },
    #[error("candidate and benchmark share no output times")]
    NoSharedTimes,
    #[error(transparent)]
    Core(#[from] oscavg_core::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, HarnessError>;

impl HarnessError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io { path: path.into(), source }
    }

    pub fn is_config(&self) -> bool {
        matches!(self, HarnessError::Config(_))
    }
}
