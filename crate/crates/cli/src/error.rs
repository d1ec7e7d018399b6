use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = CliError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("data error: {0}")]
    Data(String),

    #[error("run diverged: {0}")]
    Divergence(String),

    #[error("check failed: {0}")]
    Failed(String),

    #[error("cannot access {}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
}

impl CliError {
    /// 0 success, 1 config, 2 data, 3 divergence, 4 certification or bound failure.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Io { .. } => 1,
            CliError::Data(_) => 2,
            CliError::Divergence(_) => 3,
            CliError::Failed(_) => 4,
        }
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}

impl From<gradclip::Error> for CliError {
    fn from(e: gradclip::Error) -> Self {
        match e {
            gradclip::Error::Parse { .. } => CliError::Data(e.to_string()),
            gradclip::Error::Divergence { .. } => CliError::Divergence(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}
