//! Error type shared across the crate.

use crate::nnls::NnlsSolution;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, SlpError>;

#[derive(Debug, Error)]
pub enum SlpError {
    #[error("constellation order {order} is invalid: must be a power of two >= 4")]
    InvalidOrder { order: usize },

    #[error("APSK ring ratio {ring_ratio} is invalid: must be finite and > 1")]
    InvalidGeometry { ring_ratio: f64 },

    #[error("unknown modulation token `{token}` (expected qpsk, 8psk or 16apsk)")]
    UnknownModulation { token: String },

    #[error("need at least as many transmit as receive antennas (got n_t={n_t}, n_r={n_r})")]
    AntennaCount { n_t: usize, n_r: usize },

    #[error("{context}: expected length {expected}, got {actual}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("channel matrix is numerically singular (condition estimate {cond:.3e})")]
    SingularChannel { cond: f64 },

    #[error("symbol {index} has a zero real or imaginary part; sign extraction is undefined")]
    DegenerateSymbol { index: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("NNLS did not converge within {iterations} iterations")]
    NnlsNonConvergence {
        iterations: usize,
        best: Box<NnlsSolution>,
    },

    #[error("benchmark configuration is unusable: {0}")]
    FatalConfig(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
