use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter violates the model's domain (e.g. `d < 1 + r < u`).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("horizon {requested} exceeds the supported maximum of {max} periods")]
    HorizonTooLong { requested: usize, max: usize },

    #[error("price path has {actual} prices, expected {expected} (n + 1)")]
    PathLength { expected: usize, actual: usize },

    #[error("hedge simulation failed at period {period} for (u, d) = ({u}, {d}): {reason}")]
    Simulation {
        period: usize,
        u: f64,
        d: f64,
        reason: String,
    },

    #[error("no (u, d) pair on the search grid attains normalized price {c_star}")]
    EmptyContour { c_star: f64 },

    #[error("need at least 2 price records, got {0}")]
    TooFewRecords(usize),

    #[error("jump group `{0}` is empty")]
    EmptyJumpGroup(&'static str),

    #[error("invalid price record at line {line}: {reason}")]
    InvalidRecord { line: usize, reason: String },

    #[error("empty ledger sample")]
    EmptySample,

    #[error("ledger sample mixes model parameters: {0}")]
    MixedLedgers(String),

    #[error("malformed report document: {0}")]
    ReportFormat(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("CSV error in {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

impl Error {
    /// Process exit status for the command-line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::EmptyContour { .. } => 3,
            Error::Simulation { .. }
            | Error::PathLength { .. }
            | Error::EmptySample
            | Error::MixedLedgers(_) => 4,
            Error::Domain(_)
            | Error::HorizonTooLong { .. }
            | Error::TooFewRecords(_)
            | Error::EmptyJumpGroup(_)
            | Error::InvalidRecord { .. }
            | Error::ReportFormat(_)
            | Error::Io { .. }
            | Error::Csv { .. } => 2,
        }
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
