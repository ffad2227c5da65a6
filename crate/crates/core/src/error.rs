use thiserror::Error;

/// Errors raised by kernel evaluation, solvers and far-field analysis.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("accuracy failure: {what} reached estimate {achieved:.3e} (target {target:.3e})")]
    Accuracy {
        what: String,
        achieved: f64,
        target: f64,
    },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("grid resolution: {0}")]
    Resolution(String),

    #[error("picard iteration did not contract in window {window} [{t0}, {t1}]: {detail}")]
    NonContraction {
        window: usize,
        t0: f64,
        t1: f64,
        detail: String,
    },

    #[error("spectral solver unstable at t = {time}: {detail}")]
    Instability { time: f64, detail: String },

    #[error("smallness gate: {0}")]
    Smallness(String),

    #[error("self-similar rescaling did not converge: {0}")]
    SelfSimilarConvergence(String),

    #[error("fit failure: {0}")]
    Fit(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
