use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Duration};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::manifest::{check_id, check_timestamp};
use super::{SessionManifest, StoreError, TrialRecord, MANIFEST_FILE};
use crate::kinematics::build_beat_grid;
use crate::trc::{write_trc, JointId, MarkerTrack, MotionCapture, Units};

/// Parameters of a synthetic shoulder abduction/adduction trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthParams {
    pub tempo_bpm: f64,
    pub duration_s: f64,
    pub rate_hz: f64,
    pub beat_offset_s: f64,
    /// Hand height at the top of each cycle (shoulder level), meters.
    pub upper_limit_m: f64,
    /// Hand height at the bottom of each cycle, meters.
    pub lower_limit_m: f64,
    /// Standard deviation of Gaussian noise on the hand's vertical axis.
    pub noise_sigma: f64,
    /// Peak shoulder elevation during adduction.
    pub shoulder_drift_m: f64,
    pub seed: u64,
}

impl Default for SynthParams {
    fn default() -> Self {
        Self {
            tempo_bpm: 100.0,
            duration_s: 18.0,
            rate_hz: 30.0,
            beat_offset_s: 0.0,
            upper_limit_m: 0.15,
            lower_limit_m: -0.35,
            noise_sigma: 0.0,
            shoulder_drift_m: 0.0,
            seed: 0,
        }
    }
}

impl SynthParams {
    pub fn half_span_m(&self) -> f64 {
        (self.upper_limit_m - self.lower_limit_m) / 2.0
    }

    /// One movement cycle spans two beats.
    pub fn cycle_period_s(&self) -> f64 {
        2.0 * 60.0 / self.tempo_bpm
    }

    pub fn num_frames(&self) -> usize {
        (self.duration_s * self.rate_hz).round() as usize
    }

    fn validate(&self) -> Result<(), StoreError> {
        let bad = |m: String| Err(StoreError::InvalidParams(m));
        if !(self.rate_hz.is_finite() && self.rate_hz > 0.0) {
            return bad(format!("rate {} Hz must be positive", self.rate_hz));
        }
        if !(self.upper_limit_m.is_finite() && self.lower_limit_m.is_finite())
            || self.upper_limit_m <= self.lower_limit_m
        {
            return bad("upper limit must exceed lower limit".into());
        }
        if !(self.noise_sigma.is_finite() && self.noise_sigma >= 0.0) {
            return bad(format!("noise sigma {} must be non-negative", self.noise_sigma));
        }
        if !self.shoulder_drift_m.is_finite() {
            return bad("shoulder drift must be finite".into());
        }
        build_beat_grid(self.tempo_bpm, self.beat_offset_s, self.duration_s)
            .map_err(|e| StoreError::InvalidParams(e.to_string()))?;
        if self.num_frames() < 2 {
            return bad("trial must span at least two frames".into());
        }
        Ok(())
    }
}

/// Standing pose in Kinect camera space (meters, subject ~2 m away).
const POSE: [(JointId, [f64; 3]); 25] = [
    (JointId::SpineBase, [0.0, -0.35, 2.0]),
    (JointId::SpineMid, [0.0, -0.05, 2.0]),
    (JointId::Neck, [0.0, 0.27, 2.0]),
    (JointId::Head, [0.0, 0.42, 2.0]),
    (JointId::ShoulderLeft, [-0.18, 0.17, 2.0]),
    (JointId::ElbowLeft, [-0.22, -0.08, 2.0]),
    (JointId::WristLeft, [-0.24, -0.30, 2.0]),
    (JointId::HandLeft, [-0.24, -0.37, 2.0]),
    (JointId::ShoulderRight, [0.18, 0.17, 2.0]),
    (JointId::ElbowRight, [0.42, 0.15, 2.0]),
    (JointId::WristRight, [0.62, 0.15, 2.0]),
    (JointId::HandRight, [0.68, 0.15, 2.0]),
    (JointId::HipLeft, [-0.09, -0.40, 2.0]),
    (JointId::KneeLeft, [-0.10, -0.85, 2.0]),
    (JointId::AnkleLeft, [-0.10, -1.25, 2.0]),
    (JointId::FootLeft, [-0.10, -1.30, 1.92]),
    (JointId::HipRight, [0.09, -0.40, 2.0]),
    (JointId::KneeRight, [0.10, -0.85, 2.0]),
    (JointId::AnkleRight, [0.10, -1.25, 2.0]),
    (JointId::FootRight, [0.10, -1.30, 1.92]),
    (JointId::SpineShoulder, [0.0, 0.20, 2.0]),
    (JointId::HandTipLeft, [-0.24, -0.45, 2.0]),
    (JointId::ThumbLeft, [-0.21, -0.40, 1.97]),
    (JointId::HandTipRight, [0.76, 0.15, 2.0]),
    (JointId::ThumbRight, [0.70, 0.18, 1.97]),
];

/// Generate one trial.
///
/// The right hand's height follows `mid + half_span * cos(2 pi (t - offset) / T)`
/// with `T` two beats, so it tops out at the upper limit on every other
/// beat. The right shoulder rises by up to `shoulder_drift_m` while the arm
/// comes down. Every other joint holds still. Units on disk are mm.
pub fn synth_trial(p: &SynthParams) -> Result<(MotionCapture, TrialRecord), StoreError> {
    p.validate()?;
    let n = p.num_frames();
    let mid = (p.upper_limit_m + p.lower_limit_m) / 2.0;
    let half = p.half_span_m();
    let period = p.cycle_period_s();
    let phase = |i: usize| 2.0 * PI * (i as f64 / p.rate_hz - p.beat_offset_s) / period;

    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let noise = Normal::new(0.0, p.noise_sigma).map_err(|e| StoreError::InvalidParams(e.to_string()))?;

    let tracks = POSE
        .iter()
        .map(|(joint, [x, y, z])| {
            let mut track = MarkerTrack {
                x: vec![*x; n],
                y: vec![*y; n],
                z: vec![*z; n],
            };
            match joint {
                JointId::HandRight => {
                    track.y = (0..n)
                        .map(|i| mid + half * phase(i).cos() + noise.sample(&mut rng))
                        .collect();
                }
                JointId::ShoulderRight => {
                    track.y = (0..n)
                        .map(|i| y + p.shoulder_drift_m * (-phase(i).cos()).max(0.0))
                        .collect();
                }
                _ => {}
            }
            (joint.name().to_string(), track)
        })
        .collect();
    let capture = MotionCapture::from_tracks("trial1.trc", p.rate_hz, Units::Mm, tracks)
        .map_err(|e| StoreError::InvalidParams(e.to_string()))?;

    let noise_ratio = if half > 0.0 { p.noise_sigma / half } else { 0.0 };
    let record = TrialRecord {
        trial_id: "trial1".into(),
        trc_path: PathBuf::from("trial1.trc"),
        track_name: format!("synthetic {} bpm", p.tempo_bpm),
        tempo_bpm: p.tempo_bpm,
        beat_offset_s: p.beat_offset_s,
        upper_limit_m: p.upper_limit_m,
        lower_limit_m: p.lower_limit_m,
        score: (100.0 * (1.0 - noise_ratio)).round().max(0.0),
        primary_joint: JointId::HandRight,
        started_at: "2024-01-01T10:00:00Z".into(),
    };
    Ok((capture, record))
}

/// A ready-to-ingest synthetic session: manifest plus `.trc` documents.
#[derive(Debug, Clone)]
pub struct SynthSession {
    pub manifest: SessionManifest,
    pub files: Vec<(String, String)>,
}

impl SynthSession {
    /// Write `manifest.json` and the capture files into `dir`.
    pub fn write_to(&self, dir: &Path) -> Result<PathBuf, StoreError> {
        fs::create_dir_all(dir).map_err(StoreError::io(dir))?;
        for (name, text) in &self.files {
            let path = dir.join(name);
            fs::write(&path, text).map_err(StoreError::io(&path))?;
        }
        let path = dir.join(MANIFEST_FILE);
        fs::write(&path, self.manifest.to_json()).map_err(StoreError::io(&path))?;
        Ok(path)
    }
}

/// `trials` trials of the same movement, one minute apart, seeds
/// `seed, seed + 1, ...`.
pub fn synth_session(
    p: &SynthParams,
    trials: usize,
    patient_id: &str,
    session_id: &str,
    started_at: &str,
) -> Result<SynthSession, StoreError> {
    check_id("patient_id", patient_id)?;
    check_id("session_id", session_id)?;
    check_timestamp("started_at", started_at)?;
    if trials == 0 {
        return Err(StoreError::InvalidParams("at least one trial is required".into()));
    }
    let start = DateTime::parse_from_rfc3339(started_at).expect("checked above");
    let mut records = Vec::with_capacity(trials);
    let mut files = Vec::with_capacity(trials);
    for k in 0..trials {
        let params = SynthParams {
            seed: p.seed.wrapping_add(k as u64),
            ..p.clone()
        };
        let (mut capture, mut record) = synth_trial(&params)?;
        let name = format!("trial{}.trc", k + 1);
        capture.header.source_name = name.clone();
        record.trial_id = format!("trial{}", k + 1);
        record.trc_path = PathBuf::from(&name);
        record.started_at = (start + Duration::minutes(k as i64)).to_rfc3339();
        files.push((name, write_trc(&capture)));
        records.push(record);
    }
    Ok(SynthSession {
        manifest: SessionManifest {
            patient_id: patient_id.to_string(),
            display_name: format!("Synthetic patient {patient_id}"),
            session_id: session_id.to_string(),
            started_at: start.to_rfc3339(),
            trials: records,
        },
        files,
    })
}
