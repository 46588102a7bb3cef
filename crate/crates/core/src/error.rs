use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the planning, evaluation and file-format layers.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input text. `line` is 1-based when known.
    #[error("{kind} parse error{}: {message}", line.map(|l| format!(" at line {l}")).unwrap_or_default())]
    Parse {
        kind: &'static str,
        line: Option<usize>,
        message: String,
    },

    #[error("{kind} file has format version {found}, expected {expected}")]
    Version {
        kind: &'static str,
        found: String,
        expected: u32,
    },

    /// Input that parsed but violates a domain invariant.
    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("index {index} out of range for {what} (len {len})")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        len: usize,
    },

    /// A solver refused to run because the instance exceeds its guard.
    #[error("instance too large: {0}")]
    TooLarge(String),

    #[error("{0}")]
    NoEvaluableClasses(String),

    /// An error raised inside a named pipeline stage.
    #[error("{stage}: {source}")]
    Stage {
        stage: String,
        #[source]
        source: Box<Error>,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn parse(kind: &'static str, line: Option<usize>, message: impl Into<String>) -> Self {
        Error::Parse {
            kind,
            line,
            message: message.into(),
        }
    }

    pub fn in_stage(self, stage: impl Into<String>) -> Self {
        Error::Stage {
            stage: stage.into(),
            source: Box::new(self),
        }
    }

    /// The innermost error, looking through stage wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            other => other,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
