use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("truncation mismatch: {0} vs {1}")]
    TruncationMismatch(usize, usize),

    #[error("coefficient vector of length {0} is not of the form 2P+1")]
    BadLength(usize),

    #[error("non-finite coefficient produced by {0}")]
    NonFinite(&'static str),

    #[error("reality drift {drift:e} exceeds tolerance {tolerance:e}")]
    RealityDrift { drift: f64, tolerance: f64 },

    #[error("eigenvalue classification failed: {0}")]
    Classification(String),

    #[error("near-defective eigenvector pair (|l·r| = {0:e} relative)")]
    NearDefective(f64),

    #[error("QR eigenvalue iteration did not converge")]
    EigenNoConvergence,

    #[error("wave forcing has nonzero mean: max |ĝ0| = {0:e}")]
    NonzeroMeanForcing(f64),

    #[error("time grid mismatch: {0}")]
    GridMismatch(String),

    #[error("Picard iteration did not converge after {iterations} iterations (last relative increment {increment:e})")]
    NoConvergence { iterations: usize, increment: f64 },

    #[error("blow-up detected at t = {time}: norm {norm:e} exceeds ceiling {ceiling:e}")]
    BlowupDetected { time: f64, norm: f64, ceiling: f64 },

    #[error("step size underflow: {0}")]
    StepUnderflow(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
