use thiserror::Error;

/// Broad failure classes, used by the CLI to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Usage,
    Data,
    Numeric,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid gaussian: {0}")]
    InvalidGaussian(String),

    #[error("non-integrable normal form: A[{index}] = {value} is not negative")]
    NonIntegrableForm { index: usize, value: f64 },

    #[error("non-integrable convolution at dimension {index} (a_x + a_y + 1/2 = {value})")]
    NonIntegrableConvolution { index: usize, value: f64 },

    #[error("parse error at {line}:{col}: {message}")]
    Parse {
        line: usize,
        col: usize,
        message: String,
    },

    #[error("ambiguous query: expected exactly one hole, found {0}")]
    AmbiguousQuery(usize),

    #[error("target method {index} out of range ({len} methods)")]
    TargetOutOfRange { index: usize, len: usize },

    #[error("non-finite objective at step {step}: {detail}")]
    NonFiniteObjective { step: usize, detail: String },

    #[error("insufficient eligible classes: requested {requested}, eligible {eligible}")]
    InsufficientClasses { requested: usize, eligible: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("format error: {0}")]
    Format(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn parse(line: usize, col: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            col,
            message: message.into(),
        }
    }

    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::InvalidArgument(_) => ErrorKind::Usage,
            Error::NonIntegrableForm { .. }
            | Error::NonIntegrableConvolution { .. }
            | Error::NonFiniteObjective { .. }
            | Error::InvalidGaussian(_) => ErrorKind::Numeric,
            _ => ErrorKind::Data,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
