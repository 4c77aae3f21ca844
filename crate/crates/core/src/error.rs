use thiserror::Error;

/// Coarse error category, used by callers (notably the CLI) to map
/// failures onto distinct exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    Configuration,
    Data,
    Numerical,
    NotCovered,
}

impl ErrorCategory {
    pub fn as_str(&self) -> &'static str {
        match self {
            ErrorCategory::Configuration => "configuration",
            ErrorCategory::Data => "data",
            ErrorCategory::Numerical => "numerical",
            ErrorCategory::NotCovered => "not-covered",
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    /// Caller passed incompatible arguments (dimension or length mismatch).
    #[error("argument error: {0}")]
    Argument(String),

    /// Invalid configuration value (kernel parameters, run settings, paths).
    #[error("configuration error: {0}")]
    Config(String),

    /// Input data violates a contract (non-finite values, rank deficiency,
    /// conflicting rows, zero variance).
    #[error("data error: {0}")]
    Data(String),

    /// A numerical procedure failed (factorization after jitter escalation,
    /// coordinate descent non-convergence).
    #[error("numerical error: {0}")]
    Numerical(String),

    /// A structured file (manifest, dataset, model file) could not be parsed.
    #[error("format error in {path}, line {line}: {message}")]
    Format {
        path: String,
        line: usize,
        message: String,
    },

    /// A table evaluator was asked for a point it does not cover.
    #[error("not covered: {0}")]
    NotCovered(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Error {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::Io(io),
            other => Error::Data(format!("csv error: {other:?}")),
        }
    }
}

impl Error {
    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::Argument(_) | Error::Config(_) => ErrorCategory::Configuration,
            Error::Data(_) | Error::Format { .. } | Error::Io(_) => ErrorCategory::Data,
            Error::Numerical(_) => ErrorCategory::Numerical,
            Error::NotCovered(_) => ErrorCategory::NotCovered,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
