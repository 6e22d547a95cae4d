//! Read-side engine shared by the CLI and the HTTP server.
//!
//! Trial metrics are computed on demand and cached by (capture content
//! hash, SPARC parameters), so a changed capture or parameter set simply
//! misses the cache.

mod charts;
mod http;
pub mod json;

pub use charts::{
    autocorrelation_chart, displacement_chart, engagement_chart, session_overview_chart,
    spectrum_chart, trial_charts, velocity_chart, Annotations, ChartKind, ChartPayload,
    ChartSeries,
};
pub use http::{router, serve, ServeOptions};

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::aggregate::{
    engagement_series, summarize_patient, summarize_session, AggregateError, EngagementBucket,
    Granularity, PatientSummary, SessionSummary,
};
use crate::kinematics::{compute_trial_metrics, KinematicsError, SparcParams, TrialAnalysis, TrialMetrics};
use crate::store::{Store, StoreError};

#[derive(Debug, Error)]
pub enum ApiError {
    #[error("{kind} {id} not found")]
    NotFound { kind: &'static str, id: String },
    #[error(transparent)]
    Store(StoreError),
    #[error("trial {trial_id}: {source}")]
    Analysis {
        trial_id: String,
        #[source]
        source: KinematicsError,
    },
    #[error(transparent)]
    Aggregate(#[from] AggregateError),
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        match e {
            StoreError::NotFound { kind, id } => ApiError::NotFound { kind, id },
            other => ApiError::Store(other),
        }
    }
}

/// Row of the patient list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatientListEntry {
    pub patient_id: String,
    pub display_name: String,
    pub n_sessions: usize,
    pub last_session_at: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct ParamsKey(u64, u64, usize);

impl From<&SparcParams> for ParamsKey {
    fn from(p: &SparcParams) -> Self {
        ParamsKey(p.omega_c_max.to_bits(), p.amplitude_threshold.to_bits(), p.pad_factor)
    }
}

pub struct Engine {
    store: Arc<Store>,
    params: SparcParams,
    cache: Mutex<HashMap<(String, ParamsKey), Arc<TrialAnalysis>>>,
}

impl Engine {
    pub fn new(store: Arc<Store>, params: SparcParams) -> Result<Self, KinematicsError> {
        params.validate()?;
        Ok(Self {
            store,
            params,
            cache: Mutex::default(),
        })
    }

    pub fn store(&self) -> &Store {
        &self.store
    }

    pub fn params(&self) -> &SparcParams {
        &self.params
    }

    pub fn trial_analysis(&self, session_id: &str, trial_id: &str) -> Result<Arc<TrialAnalysis>, ApiError> {
        let handle = self.store.get_trial(session_id, trial_id)?;
        let key = (handle.content_hash.clone(), ParamsKey::from(&self.params));
        if let Some(hit) = self.cache.lock().expect("cache lock").get(&key) {
            return Ok(hit.clone());
        }
        let analysis = compute_trial_metrics(&handle.record, &handle.capture, &self.params)
            .map_err(|source| ApiError::Analysis {
                trial_id: trial_id.to_string(),
                source,
            })?;
        let analysis = Arc::new(analysis);
        self.cache
            .lock()
            .expect("cache lock")
            .insert(key, analysis.clone());
        Ok(analysis)
    }

    pub fn trial_metrics(&self, session_id: &str, trial_id: &str) -> Result<TrialMetrics, ApiError> {
        Ok(self.trial_analysis(session_id, trial_id)?.metrics.clone())
    }

    /// The metric object exactly as served by `/metrics`.
    pub fn trial_metrics_json(&self, session_id: &str, trial_id: &str) -> Result<String, ApiError> {
        Ok(json::to_string(&self.trial_analysis(session_id, trial_id)?.metrics))
    }

    /// All six chart kinds: the four trial charts, then the overview of the
    /// trial's session and the weekly engagement of its patient.
    pub fn trial_charts(&self, session_id: &str, trial_id: &str) -> Result<Vec<ChartPayload>, ApiError> {
        let analysis = self.trial_analysis(session_id, trial_id)?;
        let session = self.session_summary(session_id)?;
        let engagement = self.engagement(&session.patient_id, Granularity::Week)?;
        let mut charts = trial_charts(&analysis.series);
        charts.push(session_overview_chart(&session));
        charts.push(engagement_chart(&engagement, Granularity::Week));
        Ok(charts)
    }

    pub fn session_summary(&self, session_id: &str) -> Result<SessionSummary, ApiError> {
        let session = self.store.get_session(session_id)?;
        let metrics = session
            .trials
            .iter()
            .map(|t| self.trial_metrics(session_id, &t.trial_id))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(summarize_session(&session, &metrics)?)
    }

    pub fn patient_summary(&self, patient_id: &str) -> Result<PatientSummary, ApiError> {
        let patient = self.store.get_patient(patient_id)?;
        let summaries = patient
            .sessions
            .iter()
            .map(|sid| self.session_summary(sid))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(summarize_patient(&patient, &summaries)?)
    }

    pub fn engagement(&self, patient_id: &str, granularity: Granularity) -> Result<Vec<EngagementBucket>, ApiError> {
        let patient = self.store.get_patient(patient_id)?;
        let starts = patient
            .sessions
            .iter()
            .map(|sid| self.store.get_session(sid).map(|s| s.started_at))
            .collect::<Result<Vec<_>, _>>()?;
        let refs: Vec<&str> = starts.iter().map(String::as_str).collect();
        Ok(engagement_series(&refs, granularity)?)
    }

    pub fn patients(&self) -> Result<Vec<PatientListEntry>, ApiError> {
        self.store
            .list_patients()
            .into_iter()
            .map(|p| {
                let last = p
                    .sessions
                    .iter()
                    .map(|sid| self.store.get_session(sid).map(|s| s.started_at))
                    .collect::<Result<Vec<_>, _>>()?
                    .into_iter()
                    .max_by_key(|t| chrono::DateTime::parse_from_rfc3339(t).ok());
                Ok(PatientListEntry {
                    n_sessions: p.sessions.len(),
                    patient_id: p.patient_id,
                    display_name: p.display_name,
                    last_session_at: last,
                })
            })
            .collect()
    }
}
