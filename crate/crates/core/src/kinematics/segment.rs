use serde::{Deserialize, Serialize};

use super::{BeatGrid, KinematicsError};
use crate::signal::{find_peaks, TimeSeries};

/// Shortest span, in samples, kept as a submovement.
pub const MIN_SUBMOVEMENT_SAMPLES: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SubMovementKind {
    /// Apex down to the following trough.
    Adduction,
    /// Trough back up to the next apex.
    Abduction,
}

/// Half-open sample span `[start, end)` within the analysis window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubMovement {
    pub start: usize,
    pub end: usize,
    pub kind: SubMovementKind,
}

impl SubMovement {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleSegmentation {
    pub peak_indices: Vec<usize>,
    pub trough_indices: Vec<usize>,
    pub submovements: Vec<SubMovement>,
    /// Spans dropped for being shorter than [`MIN_SUBMOVEMENT_SAMPLES`].
    pub dropped_short: usize,
}

impl CycleSegmentation {
    /// One apex per abduction-adduction cycle.
    pub fn n_cycles(&self) -> usize {
        self.peak_indices.len()
    }
}

/// Split an (already windowed, smoothed) vertical displacement into
/// adduction and abduction half-cycles.
///
/// Apexes must reach the signal mean and be two beats apart (in whole
/// samples, rounded down); the trough between consecutive apexes is the
/// earliest minimum between them.
pub fn segment_cycles(s: &TimeSeries, grid: &BeatGrid) -> Result<CycleSegmentation, KinematicsError> {
    // sampled apexes of a non-integral period P are floor(P) or ceil(P) apart
    let min_distance = ((2.0 * grid.period_s() * s.rate() + 1e-9).floor() as usize).max(1);
    let x = s.samples();
    let peaks = find_peaks(s, s.mean(), min_distance);
    if peaks.len() < 2 {
        return Err(KinematicsError::NoCycles { peaks: peaks.len() });
    }

    let mut troughs = Vec::with_capacity(peaks.len() - 1);
    let mut submovements = Vec::with_capacity(2 * peaks.len());
    let mut dropped_short = 0;
    for pair in peaks.windows(2) {
        let (p, q) = (pair[0], pair[1]);
        let trough = (p + 1..q)
            .min_by(|&a, &b| x[a].total_cmp(&x[b]).then(a.cmp(&b)))
            .expect("distinct peaks have a sample between them");
        troughs.push(trough);
        for (start, end, kind) in [
            (p, trough, SubMovementKind::Adduction),
            (trough, q, SubMovementKind::Abduction),
        ] {
            if end - start >= MIN_SUBMOVEMENT_SAMPLES {
                submovements.push(SubMovement { start, end, kind });
            } else {
                dropped_short += 1;
            }
        }
    }
    Ok(CycleSegmentation {
        peak_indices: peaks,
        trough_indices: troughs,
        submovements,
        dropped_short,
    })
}
