use std::path::PathBuf;

use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument fell outside the domain an operation is defined on.
    #[error("domain error: {0}")]
    Domain(String),

    /// A solver or run was configured inconsistently.
    #[error("configuration error: {0}")]
    Config(String),

    /// A kinetic step violated the accuracy constraint on the time step.
    #[error("step rejected: {0}")]
    StepRejected(String),

    /// Histograms with different binning cannot be combined.
    #[error("schema mismatch: {0}")]
    Schema(String),

    /// A curve had no usable maximum.
    #[error("no peak: {0}")]
    NoPeak(String),

    /// Least-squares fit could not be performed.
    #[error("fit error: {0}")]
    Fit(String),

    /// Config document could not be parsed or validated.
    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
