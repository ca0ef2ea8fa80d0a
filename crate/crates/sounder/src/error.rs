use std::path::PathBuf;

use mmw_core::ErrorClass;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SounderError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("format error: {0}")]
    Format(String),
    #[error("dimension error: {0}")]
    Dimension(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] mmw_core::Error),
}

pub type Result<T, E = SounderError> = std::result::Result<T, E>;

impl SounderError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        SounderError::Io { path: path.into(), source }
    }

    /// Process exit code: 2 usage/config, 3 data, 4 numerical degeneracy.
    pub fn exit_code(&self) -> i32 {
        match self {
            SounderError::Io { .. } | SounderError::Config(_) => 2,
            SounderError::Format(_) | SounderError::Dimension(_) | SounderError::Data(_) => 3,
            SounderError::Core(e) => match e.class() {
                ErrorClass::Config => 2,
                ErrorClass::Data => 3,
                ErrorClass::Numerical => 4,
            },
        }
    }
}
