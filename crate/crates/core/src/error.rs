use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate bone {bone} at frame {frame}: parent and child joints coincide")]
    DegenerateBone { frame: usize, bone: usize },

    #[error("clip has {frames} frames but the window needs {length}")]
    TooShort { frames: usize, length: usize },

    #[error("parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("invalid skeleton topology: {0}")]
    Topology(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("at least 2 samples are needed for a covariance, got {0}")]
    InsufficientSamples(usize),

    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("symmetric eigendecomposition did not converge ({0}x{0})")]
    EigenFailure(usize),

    #[error("checksum mismatch: file says {expected:08x}, content hashes to {actual:08x}")]
    ChecksumMismatch { expected: u32, actual: u32 },

    #[error("invalid config field `{field}`: {reason}")]
    Config { field: String, reason: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, reason: impl Into<String>) -> Self {
        Error::Parse {
            line,
            reason: reason.into(),
        }
    }

    pub(crate) fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            reason: reason.into(),
        }
    }

    /// True for errors caused by bad input (files, arguments, configs) as
    /// opposed to I/O or numerical failures at runtime.
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::Io(_) | Error::EigenFailure(_))
    }
}
