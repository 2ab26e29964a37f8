use std::io;
use std::path::PathBuf;

use sptrace_core::Error as CoreError;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    /// A `check` run finished but at least one inequality failed.
    pub const CHECK_FAILED: i32 = 1;
    pub const USAGE: i32 = 2;
    pub const DATA: i32 = 3;
    pub const NUMERICAL: i32 = 4;
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{0}")]
    Usage(String),

    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("{path}: {source}")]
    InFile { path: PathBuf, source: Box<Error> },

    #[error("model file: expected magic {}, found {}", show_magic(.expected), show_magic(.found))]
    BadMagic { expected: [u8; 4], found: [u8; 4] },

    #[error("model file: unsupported version {found} (this build reads version {supported})")]
    Version { found: u32, supported: u32 },

    #[error("model file truncated: needed {needed} bytes, got {got}")]
    Truncated { needed: usize, got: usize },

    #[error("model file: {0}")]
    Format(String),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Core(#[from] CoreError),
}

fn show_magic(m: &[u8; 4]) -> String {
    format!("{:?}", String::from_utf8_lossy(m))
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn in_file(self, path: impl Into<PathBuf>) -> Self {
        Error::InFile {
            path: path.into(),
            source: Box::new(self),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) => exit::USAGE,
            Error::InFile { source, .. } => source.exit_code(),
            Error::Core(e) => match e {
                CoreError::InvalidParameter { .. } => exit::USAGE,
                CoreError::DimensionMismatch { .. } | CoreError::NonFinite { .. } => exit::DATA,
                _ => exit::NUMERICAL,
            },
            _ => exit::DATA,
        }
    }
}
