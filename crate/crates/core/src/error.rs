use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the laboratory.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid configuration or violated precondition.
    #[error("configuration error: {0}")]
    Config(String),

    /// Two fields that must share a grid do not.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A checkpoint or data file failed validation.
    #[error("format error in {path}: {reason}")]
    Format { path: PathBuf, reason: String },

    /// Time step exceeds the advective stability limit.
    #[error("time step {dt:.3e} violates the CFL limit; suggested dt = {suggested:.3e}")]
    CflViolation { dt: f64, suggested: f64 },

    /// Picard iteration stopped contracting.
    #[error(
        "Picard iteration is not contracting: iterate differences grew for {streak} consecutive \
         iterations (last measured ratio {ratio:.3e})"
    )]
    NonContraction { ratio: f64, streak: usize },

    /// Picard iteration hit its iteration cap without reaching the tolerance.
    #[error("Picard iteration did not converge within {iterations} iterations (last difference {last_diff:.3e})")]
    NotConverged { iterations: usize, last_diff: f64 },

    /// Not enough data for a statistical fit.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// The simulation produced a non-finite value.
    #[error("simulation produced non-finite values at t = {t}")]
    NonFinite { t: f64 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn config_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Config(msg.into()))
}
