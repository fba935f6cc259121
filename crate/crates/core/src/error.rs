use thiserror::Error;

/// Errors produced by the simulation library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("basis dimension {size} exceeds the limit of {limit} states")]
    DimensionOverflow { size: usize, limit: usize },

    #[error("invalid basis: {0}")]
    InvalidBasis(String),

    #[error("mode index {mode} out of range for {mode_count} modes")]
    InvalidMode { mode: usize, mode_count: usize },

    #[error("operands live on different bases")]
    BasisMismatch,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid drive: {0}")]
    InvalidDrive(String),

    #[error("phase matching violated for pair {pair}: omega_p - omega_s - Omega = {mismatch:e} rad/s")]
    PhaseMismatch { pair: usize, mismatch: f64 },

    #[error("g*t*sqrt(eta) = {angle} is within {distance:e} of a Wei-Norman coefficient singularity")]
    NearSingularity { angle: f64, distance: f64 },

    #[error("operator exponential series did not converge after {terms} terms (residual {residual:e})")]
    SeriesNotConverged { terms: usize, residual: f64 },

    #[error("numerical instability at step {step}: {detail}")]
    Instability { step: usize, detail: String },

    #[error("truncation budget exceeded: {0}")]
    Truncation(String),

    #[error("heralding event has zero probability")]
    ZeroHeraldProbability,

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("trace has no series")]
    NoSeries,

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True for errors that come from bad input rather than numerics.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::Config(_)
                | Error::InvalidDrive(_)
                | Error::PhaseMismatch { .. }
                | Error::InvalidMode { .. }
                | Error::InvalidBasis(_)
                | Error::Parse { .. }
                | Error::DimensionMismatch { .. }
                | Error::BasisMismatch
        )
    }
}
