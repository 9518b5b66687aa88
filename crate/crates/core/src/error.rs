use thiserror::Error;

use crate::spectrum::DistanceSpectrum;

/// Errors produced by the coding laboratory.
#[derive(Debug, Error)]
pub enum Error {
    #[error("division by the zero polynomial")]
    ZeroDivisor,

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("invalid hex polynomial label {0:?}")]
    InvalidHex(String),

    #[error("CRC degree {0} is outside the supported range 0..=16")]
    CrcDegree(usize),

    #[error("word of {len} bits is too short for a degree-{m} CRC")]
    WordTooShort { len: usize, m: usize },

    #[error("invalid convolutional code: {0}")]
    InvalidCode(String),

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("spectrum does not reach {what} (enumerated up to d = {d_max})")]
    SpectrumTruncated { what: &'static str, d_max: usize },

    #[error("spectrum enumeration needs {required} cell updates, budget is {budget}")]
    BudgetExceeded {
        required: u64,
        budget: u64,
        /// Spectrum at the deepest distance that fits the budget, if any.
        partial: Option<Box<DistanceSpectrum>>,
    },

    #[error("value {value} lies outside the open interval ({lo}, {hi})")]
    OutOfInterval { value: f64, lo: f64, hi: f64 },

    #[error("no frames were simulated")]
    EmptyStats,

    #[error("closed form and direct evaluation disagree: {0}")]
    Inconsistent(String),

    #[error("numerical routine failed to converge: {0}")]
    Convergence(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;
