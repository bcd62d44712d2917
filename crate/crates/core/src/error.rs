use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A covariance matrix or variance set violates a physicality invariant.
    #[error("non-physical state ({invariant}): {detail}")]
    Physicality {
        invariant: &'static str,
        detail: String,
    },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    /// An interferometer is not at the operating point a measurement needs.
    #[error("interferometer operating point violated: {0}")]
    OperatingPoint(String),

    #[error("sampling error: {0}")]
    Sampling(String),

    #[error("trace too short: {0}")]
    TraceTooShort(String),

    /// The measured quantity is below the instrument floor.
    #[error("measurement failure: {0}")]
    MeasurementFailure(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("I/O error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn param(name: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name: name.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Stable machine-readable tag for the error variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Physicality { .. } => "physicality",
            Error::InvalidParameter { .. } => "invalid_parameter",
            Error::OperatingPoint(_) => "operating_point",
            Error::Sampling(_) => "sampling",
            Error::TraceTooShort(_) => "trace_too_short",
            Error::MeasurementFailure(_) => "measurement_failure",
            Error::ShapeMismatch(_) => "shape_mismatch",
            Error::Config(_) => "config",
            Error::Io { .. } => "io",
            Error::Csv(_) => "csv",
        }
    }
}
