use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("series too short: {len} samples, need at least {min}")]
    SeriesTooShort { len: usize, min: usize },

    #[error("invalid cutoff: {cutoff_hz} Hz must lie in (0, {nyquist_hz}) Hz")]
    InvalidCutoff { cutoff_hz: f64, nyquist_hz: f64 },

    #[error("invalid sample rate: {0} Hz")]
    InvalidRate(f64),

    #[error("no common time span between the input streams")]
    NoOverlap,

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("timestamps are not strictly increasing at index {index}")]
    NonMonotonicTime { index: usize },

    #[error("log-domain value {value} exceeds overflow bound {bound}")]
    NumericOverflow { value: f64, bound: f64 },

    #[error("insufficient data: {rule}")]
    InsufficientData { rule: String },

    #[error("rank deficient design matrix: {rule}")]
    RankDeficient { rule: String },

    #[error("objective became non-finite in every restart")]
    NonFiniteLoss,

    #[error("integral of ground-truth fuel is zero")]
    ZeroTruthIntegral,

    #[error("insufficient fuel: {total_l:.6} l recorded, one tank needs {tank_l} l")]
    InsufficientFuel { total_l: f64, tank_l: f64 },

    #[error("segment too short: {len} samples, need at least {min}")]
    SegmentTooShort { len: usize, min: usize },

    #[error("empty input")]
    EmptyInput,

    #[error("no positive labels; true-positive rate is undefined")]
    NoPositives,

    #[error("no predicted positives; positive predictive value is undefined")]
    NoPredictedPositives,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// True for errors caused by too little (or degenerate) data rather than
    /// malformed input.
    pub fn is_data_insufficiency(&self) -> bool {
        matches!(
            self,
            Error::InsufficientData { .. }
                | Error::RankDeficient { .. }
                | Error::InsufficientFuel { .. }
                | Error::ZeroTruthIntegral
                | Error::NonFiniteLoss
                | Error::NoPositives
                | Error::NoPredictedPositives
        )
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            msg: msg.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
