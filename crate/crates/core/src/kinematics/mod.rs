//! Trial-level movement analysis against the music's beat grid.

mod beat;
mod segment;
mod sparc;
mod trial;

pub use beat::{analysis_window, build_beat_grid, BeatGrid, ACCUSTOMIZATION_BEATS};
pub use segment::{segment_cycles, CycleSegmentation, SubMovement, SubMovementKind};
pub use sparc::{sparc, trial_smoothness, SmoothnessSummary, SparcParams};
pub use trial::{
    autocorr_score, compute_trial_metrics, Absence, TrialAnalysis, TrialMetrics, TrialSeries,
};

use thiserror::Error;

use crate::signal::SignalError;
use crate::trc::TrcError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KinematicsError {
    #[error("invalid beat grid: {0}")]
    InvalidGrid(String),
    #[error("only {beats} beats fit in the trial; at least {needed} are required")]
    TooFewBeats { beats: usize, needed: usize },
    #[error("analysis window is empty: fifth beat at {start_s:.3} s, signal ends at {end_s:.3} s")]
    WindowEmpty { start_s: f64, end_s: f64 },
    #[error("fewer than two movement peaks found ({peaks})")]
    NoCycles { peaks: usize },
    #[error("segment has {len} samples; SPARC needs at least {needed}")]
    SegmentTooShort { len: usize, needed: usize },
    #[error("speed profile has zero DC magnitude")]
    ZeroDc,
    #[error("no submovement yielded a valid SPARC value")]
    NoValidSubmovements,
    #[error("invalid SPARC parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Signal(#[from] SignalError),
    #[error(transparent)]
    Capture(#[from] TrcError),
}
