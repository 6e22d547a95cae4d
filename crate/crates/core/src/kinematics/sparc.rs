use serde::{Deserialize, Serialize};

use super::{CycleSegmentation, KinematicsError};
use crate::signal::{spectrum::dft_padded, TimeSeries};

pub const MIN_SPARC_SAMPLES: usize = 4;

/// Parameters of the spectral arc length.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SparcParams {
    /// Upper bound on the adaptive cutoff, rad/s.
    pub omega_c_max: f64,
    /// Normalized-magnitude threshold that defines the adaptive cutoff.
    pub amplitude_threshold: f64,
    /// DFT length is the next power of two >= `pad_factor * len`.
    pub pad_factor: usize,
}

impl Default for SparcParams {
    fn default() -> Self {
        Self {
            omega_c_max: 20.0 * std::f64::consts::PI,
            amplitude_threshold: 0.05,
            pad_factor: 4,
        }
    }
}

impl SparcParams {
    pub fn validate(&self) -> Result<(), KinematicsError> {
        let bad = |m: String| Err(KinematicsError::InvalidParams(m));
        if !(self.omega_c_max.is_finite() && self.omega_c_max > 0.0) {
            return bad(format!("omega_c_max must be positive, got {}", self.omega_c_max));
        }
        if !(self.amplitude_threshold > 0.0 && self.amplitude_threshold < 1.0) {
            return bad(format!(
                "amplitude threshold must lie in (0, 1), got {}",
                self.amplitude_threshold
            ));
        }
        if self.pad_factor == 0 {
            return bad("pad_factor must be at least 1".into());
        }
        Ok(())
    }

    pub fn cutoff_max_hz(&self) -> f64 {
        self.omega_c_max / (2.0 * std::f64::consts::PI)
    }
}

/// Spectral arc length of a speed profile. Always <= -1; values closer to
/// -1 are smoother.
///
/// The magnitude spectrum of the zero-padded profile is normalized by its
/// DC value. The cutoff is where the normalized spectrum last falls below
/// the threshold (linearly interpolated between bins), capped at
/// `omega_c_max`. The arc length of the normalized curve is summed on a
/// frequency axis rescaled to `[0, 1]` by the cutoff.
pub fn sparc(speed: &TimeSeries, params: &SparcParams) -> Result<f64, KinematicsError> {
    params.validate()?;
    let n = speed.len();
    if n < MIN_SPARC_SAMPLES {
        return Err(KinematicsError::SegmentTooShort {
            len: n,
            needed: MIN_SPARC_SAMPLES,
        });
    }
    let nfft = (params.pad_factor * n).next_power_of_two();
    let half = nfft / 2;
    let coeffs = dft_padded(speed.samples(), nfft);
    let dc = coeffs[0].norm();
    if dc.is_nan() || dc <= 0.0 {
        return Err(KinematicsError::ZeroDc);
    }
    let mag: Vec<f64> = coeffs[..=half].iter().map(|c| c.norm() / dc).collect();
    let df = speed.rate() / nfft as f64;
    let threshold = params.amplitude_threshold;

    let last = (0..=half).rev().find(|&k| mag[k] >= threshold).unwrap_or(0);
    let crossing = if last == half {
        half as f64 * df
    } else {
        let (a, b) = (mag[last], mag[last + 1]);
        (last as f64 + (a - threshold) / (a - b)) * df
    };
    let cutoff = crossing.min(params.cutoff_max_hz());

    // Polyline through every bin strictly below the cutoff, closed by the
    // interpolated point at the cutoff itself.
    let mut arc = 0.0;
    let mut prev = (0.0, mag[0]);
    let mut k = 1;
    while k <= half && (k as f64) * df < cutoff {
        let pt = (k as f64 * df, mag[k]);
        arc += ((pt.0 - prev.0) / cutoff).hypot(pt.1 - prev.1);
        prev = pt;
        k += 1;
    }
    if cutoff > prev.0 {
        let j = k - 1;
        let end = if j < half {
            let t = (cutoff - j as f64 * df) / df;
            mag[j] + t * (mag[j + 1] - mag[j])
        } else {
            mag[j]
        };
        arc += ((cutoff - prev.0) / cutoff).hypot(end - prev.1);
    }
    Ok(-arc)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothnessSummary {
    pub mean_sparc: f64,
    pub per_submovement: Vec<f64>,
    /// Submovements whose speed profile could not be scored.
    pub skipped: usize,
}

/// SPARC of |velocity| over each submovement, averaged.
pub fn trial_smoothness(
    seg: &CycleSegmentation,
    vel: &TimeSeries,
    params: &SparcParams,
) -> Result<SmoothnessSummary, KinematicsError> {
    params.validate()?;
    let speed = vel.map(f64::abs);
    let mut per_submovement = Vec::with_capacity(seg.submovements.len());
    let mut skipped = 0;
    for sub in &seg.submovements {
        match speed.slice(sub.start..sub.end).map(|s| sparc(&s, params)) {
            Some(Ok(v)) => per_submovement.push(v),
            _ => skipped += 1,
        }
    }
    if per_submovement.is_empty() {
        return Err(KinematicsError::NoValidSubmovements);
    }
    let mean_sparc = per_submovement.iter().sum::<f64>() / per_submovement.len() as f64;
    Ok(SmoothnessSummary {
        mean_sparc,
        per_submovement,
        skipped,
    })
}
