use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid angular momentum arguments: {0}")]
    Angular(String),

    #[error("atomic data: {0}")]
    AtomData(String),

    #[error("comb: {0}")]
    Comb(String),

    #[error("phase mask: {0}")]
    Mask(String),

    #[error("configuration: {0}")]
    Config(String),

    #[error("physics check failed: {0}")]
    Physics(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Process exit status used by the command-line driver.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Io { .. } | Error::AtomData(_) => 2,
            Error::Physics(_) | Error::Comb(_) | Error::Mask(_) | Error::Angular(_) => 3,
            Error::Numerical(_) => 4,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
