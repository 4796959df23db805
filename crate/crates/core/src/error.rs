use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("index {index} out of range 0..{len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("time {t} outside waveform support [{lo}, {hi})")]
    OutOfDomain { t: f64, lo: f64, hi: f64 },

    #[error("path delay {delay} is not covered by prefix of duration {cpp}")]
    DelayExceedsCpp { delay: f64, cpp: f64 },

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("config: {0}")]
    Config(String),
}
