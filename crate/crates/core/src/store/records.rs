use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::trc::JointId;

fn default_primary_joint() -> JointId {
    JointId::HandRight
}

fn is_default_joint(j: &JointId) -> bool {
    *j == JointId::HandRight
}

/// One exercise trial as described by its session manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial_id: String,
    /// Capture file, relative to the session directory.
    #[serde(rename = "trc_file")]
    pub trc_path: PathBuf,
    pub track_name: String,
    pub tempo_bpm: f64,
    #[serde(default)]
    pub beat_offset_s: f64,
    pub upper_limit_m: f64,
    pub lower_limit_m: f64,
    /// Game score; stored and averaged, never interpreted.
    pub score: f64,
    #[serde(default = "default_primary_joint", skip_serializing_if = "is_default_joint")]
    pub primary_joint: JointId,
    /// RFC 3339 timestamp.
    pub started_at: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionRecord {
    pub session_id: String,
    pub patient_id: String,
    pub started_at: String,
    pub trials: Vec<TrialRecord>,
}

impl SessionRecord {
    pub fn trial(&self, trial_id: &str) -> Option<&TrialRecord> {
        self.trials.iter().find(|t| t.trial_id == trial_id)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatientRecord {
    pub patient_id: String,
    pub display_name: String,
    /// Session ids ordered by start time.
    pub sessions: Vec<String>,
}
