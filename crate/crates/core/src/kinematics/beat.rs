use serde::{Deserialize, Serialize};

use super::KinematicsError;
use crate::signal::TimeSeries;

/// Beats played before analysis starts, giving the participant time to
/// settle into the tempo. Analysis begins on the next beat.
pub const ACCUSTOMIZATION_BEATS: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeatGrid {
    pub tempo_bpm: f64,
    pub offset_s: f64,
    pub beat_times: Vec<f64>,
}

impl BeatGrid {
    /// Seconds between beats.
    pub fn period_s(&self) -> f64 {
        60.0 / self.tempo_bpm
    }

    /// Time of the first analysed beat.
    pub fn analysis_start_s(&self) -> f64 {
        self.beat_times[ACCUSTOMIZATION_BEATS]
    }
}

pub fn build_beat_grid(tempo_bpm: f64, offset_s: f64, duration_s: f64) -> Result<BeatGrid, KinematicsError> {
    if !(tempo_bpm.is_finite() && tempo_bpm > 0.0) {
        return Err(KinematicsError::InvalidGrid(format!("tempo {tempo_bpm} bpm")));
    }
    if !(offset_s.is_finite() && offset_s >= 0.0) {
        return Err(KinematicsError::InvalidGrid(format!("beat offset {offset_s} s")));
    }
    if !(duration_s.is_finite() && duration_s > offset_s) {
        return Err(KinematicsError::InvalidGrid(format!(
            "duration {duration_s} s does not extend past offset {offset_s} s"
        )));
    }
    let period = 60.0 / tempo_bpm;
    let count = ((duration_s - offset_s) / period + 1e-9).floor() as usize + 1;
    let needed = ACCUSTOMIZATION_BEATS + 1;
    if count < needed {
        return Err(KinematicsError::TooFewBeats { beats: count, needed });
    }
    let beat_times = (0..count)
        .map(|i| (offset_s + i as f64 * period).min(duration_s))
        .collect();
    Ok(BeatGrid {
        tempo_bpm,
        offset_s,
        beat_times,
    })
}

/// Index of the first sample at or after `t` seconds.
pub(crate) fn first_sample_at(t: f64, rate: f64) -> usize {
    // 1e-6 of a sample absorbs rounding in products like 4 * 0.6 * 30.
    (t * rate - 1e-6).ceil().max(0.0) as usize
}

/// The part of `s` from the fifth beat to the end.
pub fn analysis_window(s: &TimeSeries, grid: &BeatGrid) -> Result<TimeSeries, KinematicsError> {
    let Some(&start_s) = grid.beat_times.get(ACCUSTOMIZATION_BEATS) else {
        return Err(KinematicsError::TooFewBeats {
            beats: grid.beat_times.len(),
            needed: ACCUSTOMIZATION_BEATS + 1,
        });
    };
    let start = first_sample_at(start_s, s.rate());
    s.slice(start..s.len()).ok_or(KinematicsError::WindowEmpty {
        start_s,
        end_s: s.duration_s(),
    })
}
