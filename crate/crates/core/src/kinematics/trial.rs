use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{
    analysis_window, build_beat_grid, segment_cycles, trial_smoothness, BeatGrid, KinematicsError,
    SparcParams,
};
use crate::signal::{
    amplitude_spectrum, autocorrelate, smooth_ma, velocity, LagSeries, Spectrum, TimeSeries,
    DEFAULT_SMOOTHING_WINDOW,
};
use crate::store::TrialRecord;
use crate::trc::{Axis, JointId, MotionCapture};

/// Mean of |r_k| over every lag, lag 0 included.
pub fn autocorr_score(lags: &LagSeries) -> f64 {
    if lags.values.is_empty() {
        return 0.0;
    }
    lags.values.iter().map(|v| v.abs()).sum::<f64>() / lags.values.len() as f64
}

/// Why a metric is missing from a trial.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Absence {
    pub code: String,
    pub reason: String,
}

impl Absence {
    fn from_error(e: &KinematicsError) -> Self {
        use crate::signal::SignalError;
        let code = match e {
            KinematicsError::InvalidGrid(_) => "invalid_grid",
            KinematicsError::TooFewBeats { .. } => "too_few_beats",
            KinematicsError::WindowEmpty { .. } => "window_empty",
            KinematicsError::NoCycles { .. } => "no_cycles",
            KinematicsError::SegmentTooShort { .. } => "segment_too_short",
            KinematicsError::ZeroDc => "zero_dc",
            KinematicsError::NoValidSubmovements => "no_valid_submovements",
            KinematicsError::InvalidParams(_) => "invalid_params",
            KinematicsError::Signal(SignalError::ZeroVariance) => "zero_variance",
            KinematicsError::Signal(_) => "signal",
            KinematicsError::Capture(_) => "capture",
        };
        Self {
            code: code.to_string(),
            reason: e.to_string(),
        }
    }
}

/// Per-trial scores. Absent metrics are `None` with a matching entry in
/// `absent`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialMetrics {
    pub trial_id: String,
    pub duration_s: f64,
    pub tempo_bpm: f64,
    pub analysis_start_s: Option<f64>,
    /// Mean |vertical velocity| of the primary joint over the analysis window.
    pub mean_speed_mps: Option<f64>,
    /// Mean SPARC over submovements.
    pub smoothness: Option<f64>,
    pub autocorr_score: Option<f64>,
    pub n_cycles: usize,
    pub per_submovement_sparc: Vec<f64>,
    pub skipped_submovements: usize,
    pub absent: BTreeMap<String, Absence>,
}

impl TrialMetrics {
    fn mark_absent(&mut self, metric: &str, e: &KinematicsError) {
        self.absent.insert(metric.to_string(), Absence::from_error(e));
    }
}

/// Chart-ready series for one trial. Displacements are smoothed, in meters,
/// over the whole recording.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialSeries {
    pub time_s: Vec<f64>,
    pub primary_joint: JointId,
    pub primary_y: Vec<f64>,
    pub shoulder_joint: JointId,
    pub shoulder_y: Option<Vec<f64>>,
    pub hand_z: Option<Vec<f64>>,
    pub velocity: Vec<f64>,
    /// Over the analysis window.
    pub autocorrelation: Option<LagSeries>,
    /// Over the analysis window.
    pub spectrum: Option<Spectrum>,
    pub beat_times: Vec<f64>,
    pub upper_limit_m: f64,
    pub lower_limit_m: f64,
    pub analysis_start_s: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialAnalysis {
    pub metrics: TrialMetrics,
    pub series: TrialSeries,
}

/// Shoulder on the same side as the primary joint.
fn compensation_shoulder(primary: &JointId) -> JointId {
    if primary.name().to_ascii_lowercase().contains("left") {
        JointId::ShoulderLeft
    } else {
        JointId::ShoulderRight
    }
}

fn smoothed(capture: &MotionCapture, joint: &JointId, axis: Axis) -> Result<TimeSeries, KinematicsError> {
    let raw = capture.channel(joint, axis)?;
    let window = DEFAULT_SMOOTHING_WINDOW.min(if raw.len() % 2 == 1 { raw.len() } else { raw.len() - 1 });
    Ok(smooth_ma(&raw, window)?)
}

/// Full trial pipeline. Fails only when the primary joint is unusable;
/// degenerate metrics are reported as absences.
pub fn compute_trial_metrics(
    trial: &TrialRecord,
    capture: &MotionCapture,
    params: &SparcParams,
) -> Result<TrialAnalysis, KinematicsError> {
    params.validate()?;
    let primary = smoothed(capture, &trial.primary_joint, Axis::Y)?;
    let shoulder_joint = compensation_shoulder(&trial.primary_joint);
    let shoulder_y = smoothed(capture, &shoulder_joint, Axis::Y).ok();
    let hand_z = smoothed(capture, &trial.primary_joint, Axis::Z).ok();
    let full_velocity = if primary.len() >= 2 {
        velocity(&primary)?.into_samples()
    } else {
        vec![0.0]
    };

    let duration_s = capture.duration_s();
    let mut metrics = TrialMetrics {
        trial_id: trial.trial_id.clone(),
        duration_s,
        tempo_bpm: trial.tempo_bpm,
        analysis_start_s: None,
        mean_speed_mps: None,
        smoothness: None,
        autocorr_score: None,
        n_cycles: 0,
        per_submovement_sparc: Vec::new(),
        skipped_submovements: 0,
        absent: BTreeMap::new(),
    };
    let grid = build_beat_grid(trial.tempo_bpm, trial.beat_offset_s, duration_s);
    let window = grid
        .as_ref()
        .map_err(Clone::clone)
        .and_then(|g| analysis_window(&primary, g));
    let mut autocorrelation = None;
    let mut spectrum = None;

    match (&grid, &window) {
        (Ok(grid), Ok(window)) => {
            metrics.analysis_start_s = Some(grid.analysis_start_s());
            analyse_window(grid, window, params, &mut metrics, &mut autocorrelation, &mut spectrum);
        }
        (Err(e), _) | (_, Err(e)) => {
            for metric in ["mean_speed_mps", "smoothness", "autocorr_score"] {
                metrics.mark_absent(metric, e);
            }
        }
    }

    let series = TrialSeries {
        time_s: primary.times(),
        primary_joint: trial.primary_joint.clone(),
        primary_y: primary.samples().to_vec(),
        shoulder_joint,
        shoulder_y: shoulder_y.map(TimeSeries::into_samples),
        hand_z: hand_z.map(TimeSeries::into_samples),
        velocity: full_velocity,
        autocorrelation,
        spectrum,
        beat_times: grid.as_ref().map(|g| g.beat_times.clone()).unwrap_or_default(),
        upper_limit_m: trial.upper_limit_m,
        lower_limit_m: trial.lower_limit_m,
        analysis_start_s: metrics.analysis_start_s,
    };
    Ok(TrialAnalysis { metrics, series })
}

fn analyse_window(
    grid: &BeatGrid,
    window: &TimeSeries,
    params: &SparcParams,
    metrics: &mut TrialMetrics,
    autocorrelation: &mut Option<LagSeries>,
    spectrum: &mut Option<Spectrum>,
) {
    let vel = match velocity(window) {
        Ok(v) => {
            metrics.mean_speed_mps = Some(v.samples().iter().map(|x| x.abs()).sum::<f64>() / v.len() as f64);
            Some(v)
        }
        Err(e) => {
            metrics.mark_absent("mean_speed_mps", &e.into());
            None
        }
    };

    let smooth = segment_cycles(window, grid).and_then(|seg| {
        metrics.n_cycles = seg.n_cycles();
        let vel = vel.as_ref().ok_or(KinematicsError::NoValidSubmovements)?;
        trial_smoothness(&seg, vel, params)
    });
    match smooth {
        Ok(s) => {
            metrics.smoothness = Some(s.mean_sparc);
            metrics.per_submovement_sparc = s.per_submovement;
            metrics.skipped_submovements = s.skipped;
        }
        Err(e) => metrics.mark_absent("smoothness", &e),
    }

    match autocorrelate(window) {
        Ok(lags) => {
            metrics.autocorr_score = Some(autocorr_score(&lags));
            *autocorrelation = Some(lags);
        }
        Err(e) => metrics.mark_absent("autocorr_score", &e.into()),
    }
    *spectrum = amplitude_spectrum(window).ok();
}
