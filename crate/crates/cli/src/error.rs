use std::io;
use std::path::PathBuf;

use thiserror::Error;

/// Everything the CLI can fail with. Each variant maps to its own exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("bad config: {0}")]
    Config(String),
    #[error("{}:{line}: {msg}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },
    #[error("dataset {}: {msg}", path.display())]
    Dataset { path: PathBuf, msg: String },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("training diverged: {0}")]
    Diverged(pmn_core::Error),
    #[error(transparent)]
    Core(pmn_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Config(_) => 3,
            CliError::Parse { .. } | CliError::Dataset { .. } => 4,
            CliError::Io { .. } => 5,
            CliError::Diverged(_) => 6,
            CliError::Core(_) => 7,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>) -> impl FnOnce(io::Error) -> Self {
        let path = path.into();
        move |source| CliError::Io { path, source }
    }
}

impl From<pmn_core::Error> for CliError {
    fn from(e: pmn_core::Error) -> Self {
        match e {
            pmn_core::Error::NonFiniteLoss { .. } => CliError::Diverged(e),
            e => CliError::Core(e),
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
