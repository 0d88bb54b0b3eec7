//! Crate-wide error type.

use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("signal is empty")]
    EmptySignal,

    #[error("input sample rate is {got} Hz; analysis requires {required} Hz (resample first)")]
    SampleRateMismatch { got: u32, required: u32 },

    #[error("invalid {what}: {why}")]
    InvalidInput { what: &'static str, why: String },

    #[error("frame of {len} samples is too short for order {order} (need more than {min} samples)")]
    FrameTooShort { len: usize, order: usize, min: usize },

    #[error("weight vector has {got} values but the frame has {expected} samples")]
    WeightLengthMismatch { got: usize, expected: usize },

    #[error("weights must be finite and nonnegative (value {value} at index {index})")]
    BadWeight { index: usize, value: f64 },

    #[error("track grids do not match: {left} frames vs {right} frames")]
    FrameCountMismatch { left: usize, right: usize },

    #[error("track grids do not match: times differ by {delta_s} s at row {row}")]
    GridMismatch { row: usize, delta_s: f64 },

    #[error("no frames selected for evaluation (empty category selection or no valid frames)")]
    EmptySelection,

    #[error("clean signal has zero power; SNR is undefined")]
    ZeroPowerSignal,

    #[error("noise source ({got} samples) is shorter than the clean signal ({need} samples)")]
    NoiseTooShort { need: usize, got: usize },

    #[error("{path}: line {line}: {why}")]
    Parse { path: PathBuf, line: usize, why: String },

    #[error("{path}: unsupported WAV format: {why}")]
    WavFormat { path: PathBuf, why: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(what: &'static str, why: impl Into<String>) -> Self {
        Error::InvalidInput { what, why: why.into() }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, why: impl Into<String>) -> Self {
        Error::Parse { path: path.into(), line, why: why.into() }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
