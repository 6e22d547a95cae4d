use serde::{Deserialize, Serialize};

use super::SignalError;

/// A uniformly sampled scalar signal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    samples: Vec<f64>,
    rate: f64,
    units: String,
}

impl TimeSeries {
    pub fn new(samples: Vec<f64>, rate: f64, units: impl Into<String>) -> Result<Self, SignalError> {
        if !(rate.is_finite() && rate > 0.0) {
            return Err(SignalError::InvalidRate(rate));
        }
        if samples.is_empty() {
            return Err(SignalError::Empty);
        }
        if let Some(i) = samples.iter().position(|v| !v.is_finite()) {
            return Err(SignalError::NonFinite(i));
        }
        Ok(Self {
            samples,
            rate,
            units: units.into(),
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    /// Sample rate in Hz.
    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn units(&self) -> &str {
        &self.units
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.rate
    }

    /// Time of sample `i` relative to the start of the series.
    pub fn time_of(&self, i: usize) -> f64 {
        i as f64 / self.rate
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.time_of(i)).collect()
    }

    pub fn mean(&self) -> f64 {
        super::mean(&self.samples)
    }

    /// Same rate and units, different samples. Samples are expected finite.
    pub(crate) fn with_samples(&self, samples: Vec<f64>) -> Self {
        debug_assert!(!samples.is_empty());
        Self {
            samples,
            rate: self.rate,
            units: self.units.clone(),
        }
    }

    /// Sub-series over `range` (sample indices). Returns `None` for an empty
    /// or out-of-bounds range.
    pub fn slice(&self, range: std::ops::Range<usize>) -> Option<Self> {
        if range.start >= range.end || range.end > self.len() {
            return None;
        }
        Some(self.with_samples(self.samples[range].to_vec()))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        self.with_samples(self.samples.iter().map(|&v| f(v)).collect())
    }
}
