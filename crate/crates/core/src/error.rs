use thiserror::Error;

/// Errors raised by the sampling library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("component {index} must be strictly positive, got {value}")]
    NonPositive { index: usize, value: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("non-finite input: {0}")]
    NonFinite(&'static str),

    /// The statistic evaluated to the group boundary (e.g. a state sitting exactly on the centre).
    #[error("degenerate statistic: {0}")]
    Degenerate(&'static str),

    #[error("state is outside the support of the {0}")]
    OutOfSupport(&'static str),

    #[error("directional proposal loop exceeded {max_tries} tries")]
    MaxTriesExceeded { max_tries: u32 },

    #[error("unknown kernel `{0}`")]
    UnknownKernel(String),

    #[error("kernel `{kernel}` is incompatible with target: {reason}")]
    Incompatible { kernel: String, reason: String },

    #[error("series is constant")]
    ConstantSeries,

    #[error("series too short: need at least {need}, got {got}")]
    SeriesTooShort { need: usize, got: usize },

    #[error("empty trace")]
    EmptyTrace,

    #[error("{path}:{line}: {reason}")]
    Parse {
        path: String,
        line: usize,
        reason: String,
    },

    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(err: csv::Error) -> Self {
        Error::Io(err.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}

pub(crate) fn check_positive(xs: &[f64]) -> Result<()> {
    for (index, &value) in xs.iter().enumerate() {
        if !(value > 0.0) || !value.is_finite() {
            return Err(Error::NonPositive { index, value });
        }
    }
    Ok(())
}

pub(crate) fn check_param(name: &'static str, ok: bool, reason: impl Into<String>) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            reason: reason.into(),
        })
    }
}
