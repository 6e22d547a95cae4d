//! One-dimensional signal primitives shared by every kinematic metric.

mod autocorr;
mod diff;
mod peaks;
mod series;
mod smooth;
pub(crate) mod spectrum;

pub use autocorr::{autocorrelate, LagSeries};
pub use diff::{gradient, velocity};
pub use peaks::find_peaks;
pub use series::TimeSeries;
pub use smooth::{smooth_ma, DEFAULT_SMOOTHING_WINDOW};
pub use spectrum::{amplitude_spectrum, dft, Spectrum};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SignalError {
    #[error("time series needs at least {needed} samples, got {got}")]
    TooShort { needed: usize, got: usize },
    #[error("empty input")]
    Empty,
    #[error("sample rate must be positive and finite, got {0}")]
    InvalidRate(f64),
    #[error("non-finite sample at index {0}")]
    NonFinite(usize),
    #[error("smoothing window {window} exceeds signal length {len}")]
    WindowTooLarge { window: usize, len: usize },
    #[error("smoothing window must be odd and positive, got {0}")]
    WindowEven(usize),
    #[error("signal has zero variance")]
    ZeroVariance,
}

pub(crate) fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}
