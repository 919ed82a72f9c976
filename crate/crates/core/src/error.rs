use thiserror::Error;

/// Errors raised by the detection library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid series: {0}")]
    InvalidSeries(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid window [{start}, {end}] for series of length {n}")]
    InvalidWindow { start: usize, end: usize, n: usize },

    #[error("grid index {index} out of range for grid of {m} points")]
    GridIndex { index: usize, m: usize },

    #[error("accumulator was built without local-linear moments")]
    MissingLocalLinearMoments,

    #[error("scan range is empty: n = {n} with trim {trim} needs n >= {required}")]
    ScanInfeasible { n: usize, trim: usize, required: usize },

    #[error("degenerate sample: {0}")]
    DegenerateSample(String),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("process is not stationary: {0}")]
    NonStationary(String),

    #[error("replication {index} failed: {source}")]
    Replication {
        index: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::InvalidConfig(msg.into())
    }

    /// Strips replication context to find the underlying failure.
    pub fn root(&self) -> &Error {
        match self {
            Error::Replication { source, .. } => source.root(),
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
