use std::collections::HashSet;

use chrono::DateTime;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use super::{SessionRecord, StoreError, TrialRecord};

pub const MANIFEST_FILE: &str = "manifest.json";

const TOP_FIELDS: [&str; 5] = ["patient_id", "display_name", "session_id", "started_at", "trials"];
const TRIAL_FIELDS: [&str; 10] = [
    "trial_id",
    "trc_file",
    "track_name",
    "tempo_bpm",
    "beat_offset_s",
    "upper_limit_m",
    "lower_limit_m",
    "score",
    "primary_joint",
    "started_at",
];

/// A session manifest as written to disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionManifest {
    pub patient_id: String,
    pub display_name: String,
    pub session_id: String,
    pub started_at: String,
    pub trials: Vec<TrialRecord>,
}

impl SessionManifest {
    pub fn to_record(&self) -> SessionRecord {
        SessionRecord {
            session_id: self.session_id.clone(),
            patient_id: self.patient_id.clone(),
            started_at: self.started_at.clone(),
            trials: self.trials.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }
}

/// Identifiers become directory names.
pub(crate) fn check_id(field: &str, id: &str) -> Result<(), StoreError> {
    let ok = !id.is_empty()
        && id.len() <= 128
        && !id.starts_with('.')
        && id.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'));
    if ok {
        Ok(())
    } else {
        Err(StoreError::schema(
            field,
            format!("{id:?} must be 1-128 characters of [A-Za-z0-9._-] not starting with '.'"),
        ))
    }
}

pub(crate) fn check_timestamp(field: &str, ts: &str) -> Result<i64, StoreError> {
    DateTime::parse_from_rfc3339(ts)
        .map(|t| t.timestamp_nanos_opt().unwrap_or(i64::MAX))
        .map_err(|e| StoreError::schema(field, format!("{ts:?} is not RFC 3339: {e}")))
}

fn reject_unknown(obj: &Map<String, Value>, known: &[&str], prefix: &str) -> Result<(), StoreError> {
    match obj.keys().find(|k| !known.contains(&k.as_str())) {
        Some(k) => Err(StoreError::schema(format!("{prefix}{k}"), "unknown field")),
        None => Ok(()),
    }
}

/// Parse and validate a manifest document. Trials come back ordered by
/// `started_at` (manifest order breaks ties).
pub fn parse_manifest(text: &str, lenient: bool) -> Result<SessionManifest, StoreError> {
    let root: Value =
        serde_json::from_str(text).map_err(|e| StoreError::schema("$", format!("invalid JSON: {e}")))?;
    let obj = root
        .as_object()
        .ok_or_else(|| StoreError::schema("$", "manifest must be a JSON object"))?;
    if !lenient {
        reject_unknown(obj, &TOP_FIELDS, "")?;
    }
    let trials_raw = obj
        .get("trials")
        .and_then(Value::as_array)
        .ok_or_else(|| StoreError::schema("trials", "missing or not an array"))?;
    if trials_raw.is_empty() {
        return Err(StoreError::schema("trials", "a session needs at least one trial"));
    }

    let mut trials = Vec::with_capacity(trials_raw.len());
    for (i, raw) in trials_raw.iter().enumerate() {
        let label = raw
            .get("trial_id")
            .and_then(Value::as_str)
            .map_or_else(|| format!("trials[{i}]"), |id| format!("trials[{id}]"));
        let tobj = raw
            .as_object()
            .ok_or_else(|| StoreError::schema(&label, "trial must be an object"))?;
        if !lenient {
            reject_unknown(tobj, &TRIAL_FIELDS, &format!("{label}."))?;
        }
        let known: Map<String, Value> = tobj
            .iter()
            .filter(|(k, _)| TRIAL_FIELDS.contains(&k.as_str()))
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect();
        let trial: TrialRecord = serde_json::from_value(Value::Object(known))
            .map_err(|e| StoreError::schema(&label, e.to_string()))?;
        validate_trial(&trial, &label)?;
        trials.push(trial);
    }

    let text_field = |name: &str| -> Result<String, StoreError> {
        obj.get(name)
            .and_then(Value::as_str)
            .map(str::to_string)
            .ok_or_else(|| StoreError::schema(name, "missing or not a string"))
    };
    let manifest = SessionManifest {
        patient_id: text_field("patient_id")?,
        display_name: text_field("display_name")?,
        session_id: text_field("session_id")?,
        started_at: text_field("started_at")?,
        trials,
    };
    check_id("patient_id", &manifest.patient_id)?;
    check_id("session_id", &manifest.session_id)?;
    if manifest.display_name.trim().is_empty() {
        return Err(StoreError::schema("display_name", "must not be empty"));
    }
    check_timestamp("started_at", &manifest.started_at)?;

    let mut seen = HashSet::new();
    for t in &manifest.trials {
        if !seen.insert(t.trial_id.as_str()) {
            return Err(StoreError::schema(
                format!("trials[{}].trial_id", t.trial_id),
                "duplicate trial id",
            ));
        }
    }

    let mut manifest = manifest;
    let mut keyed: Vec<(i64, TrialRecord)> = manifest
        .trials
        .drain(..)
        .map(|t| (check_timestamp("", &t.started_at).unwrap_or(i64::MAX), t))
        .collect();
    keyed.sort_by_key(|(k, _)| *k);
    manifest.trials = keyed.into_iter().map(|(_, t)| t).collect();
    Ok(manifest)
}

fn validate_trial(t: &TrialRecord, label: &str) -> Result<(), StoreError> {
    let field = |f: &str| format!("{label}.{f}");
    check_id(&field("trial_id"), &t.trial_id)?;
    if t.trc_path.as_os_str().is_empty() {
        return Err(StoreError::schema(field("trc_file"), "must not be empty"));
    }
    if !(t.tempo_bpm.is_finite() && t.tempo_bpm > 0.0) {
        return Err(StoreError::schema(field("tempo_bpm"), "must be a positive number"));
    }
    if !(t.beat_offset_s.is_finite() && t.beat_offset_s >= 0.0) {
        return Err(StoreError::schema(field("beat_offset_s"), "must be a non-negative number"));
    }
    if !(t.upper_limit_m.is_finite() && t.lower_limit_m.is_finite()) {
        return Err(StoreError::schema(field("upper_limit_m"), "limits must be finite"));
    }
    if t.upper_limit_m <= t.lower_limit_m {
        return Err(StoreError::schema(
            field("upper_limit_m"),
            format!(
                "upper limit {} must exceed lower limit {}",
                t.upper_limit_m, t.lower_limit_m
            ),
        ));
    }
    if !t.score.is_finite() {
        return Err(StoreError::schema(field("score"), "must be finite"));
    }
    check_timestamp(&field("started_at"), &t.started_at)?;
    Ok(())
}
