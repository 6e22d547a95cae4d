//! Patient/session/trial persistence.
//!
//! Layout: `<root>/<patient_id>/<session_id>/manifest.json` plus one
//! `trialN.trc` per trial. Patients are the directories holding at least
//! one committed session; entries starting with `.` are ignored, which is
//! where in-flight ingests live until their final rename.

mod manifest;
mod records;
mod repo;
mod synth;

pub use manifest::{parse_manifest, SessionManifest, MANIFEST_FILE};
pub use records::{PatientRecord, SessionRecord, TrialRecord};
pub use repo::{IngestOptions, Store, TrialHandle};
pub use synth::{synth_session, synth_trial, SynthParams, SynthSession};

use std::path::PathBuf;

use thiserror::Error;

use crate::trc::TrcError;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("schema violation at {field}: {reason}")]
    SchemaViolation { field: String, reason: String },
    #[error("capture file for trial {trial_id} not found: {path}")]
    MissingCapture { trial_id: String, path: PathBuf },
    #[error("capture for trial {trial_id} is unusable: {source}")]
    InvalidCapture {
        trial_id: String,
        #[source]
        source: TrcError,
    },
    #[error("session {session_id} already exists with different content")]
    DuplicateSessionId { session_id: String },
    #[error("{kind} {id} not found")]
    NotFound { kind: &'static str, id: String },
    #[error("invalid synthesis parameters: {0}")]
    InvalidParams(String),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl StoreError {
    pub(crate) fn schema(field: impl Into<String>, reason: impl Into<String>) -> Self {
        StoreError::SchemaViolation {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Self {
        let path = path.into();
        move |source| StoreError::Io { path, source }
    }
}
