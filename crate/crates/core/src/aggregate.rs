//! Session and patient roll-ups of per-trial metrics.
//!
//! Absent metrics are left out of both numerator and denominator of every
//! mean; a session whose trials all lack a metric reports it as `None`.

use chrono::{DateTime, Datelike, Duration, FixedOffset, IsoWeek, NaiveDate};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kinematics::TrialMetrics;
use crate::store::{PatientRecord, SessionRecord};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AggregateError {
    #[error("session {0} has no trials")]
    EmptySession(String),
    #[error("no metrics supplied for trial {0}")]
    MissingMetrics(String),
    #[error("unparsable timestamp {0:?}")]
    BadTimestamp(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionRow {
    /// 1-based position within the session.
    pub trial_index: usize,
    pub trial_id: String,
    pub mean_speed_mps: Option<f64>,
    pub smoothness: Option<f64>,
    pub autocorr_score: Option<f64>,
    pub score: f64,
    pub duration_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionSummary {
    pub session_id: String,
    pub patient_id: String,
    pub started_at: String,
    pub rows: Vec<SessionRow>,
    pub mean_speed_mps: Option<f64>,
    pub smoothness: Option<f64>,
    pub autocorr_score: Option<f64>,
    pub mean_score: f64,
    pub total_duration_s: f64,
}

fn mean_present(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let (sum, n) = values.flatten().fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

pub fn summarize_session(
    session: &SessionRecord,
    metrics: &[TrialMetrics],
) -> Result<SessionSummary, AggregateError> {
    if session.trials.is_empty() {
        return Err(AggregateError::EmptySession(session.session_id.clone()));
    }
    let rows = session
        .trials
        .iter()
        .enumerate()
        .map(|(i, trial)| {
            let m = metrics
                .iter()
                .find(|m| m.trial_id == trial.trial_id)
                .ok_or_else(|| AggregateError::MissingMetrics(trial.trial_id.clone()))?;
            Ok(SessionRow {
                trial_index: i + 1,
                trial_id: trial.trial_id.clone(),
                mean_speed_mps: m.mean_speed_mps,
                smoothness: m.smoothness,
                autocorr_score: m.autocorr_score,
                score: trial.score,
                duration_s: m.duration_s,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SessionSummary {
        session_id: session.session_id.clone(),
        patient_id: session.patient_id.clone(),
        started_at: session.started_at.clone(),
        mean_speed_mps: mean_present(rows.iter().map(|r| r.mean_speed_mps)),
        smoothness: mean_present(rows.iter().map(|r| r.smoothness)),
        autocorr_score: mean_present(rows.iter().map(|r| r.autocorr_score)),
        mean_score: rows.iter().map(|r| r.score).sum::<f64>() / rows.len() as f64,
        total_duration_s: rows.iter().map(|r| r.duration_s).sum(),
        rows,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Granularity {
    Week,
    Month,
}

impl std::str::FromStr for Granularity {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "week" => Ok(Granularity::Week),
            "month" => Ok(Granularity::Month),
            other => Err(format!("granularity must be week or month, got {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EngagementBucket {
    /// `YYYY-Www` (ISO week) or `YYYY-MM`.
    pub bucket: String,
    pub count: usize,
}

fn session_date(ts: &str) -> Result<NaiveDate, AggregateError> {
    DateTime::<FixedOffset>::parse_from_rfc3339(ts)
        .map(|t| t.date_naive())
        .map_err(|_| AggregateError::BadTimestamp(ts.to_string()))
}

fn week_label(w: IsoWeek) -> String {
    format!("{}-W{:02}", w.year(), w.week())
}

/// Session counts per calendar bucket, contiguous from the first session's
/// bucket to the last one's; empty buckets are present with count 0.
/// Dates are taken in each timestamp's own UTC offset.
pub fn engagement_series(
    started_at: &[&str],
    granularity: Granularity,
) -> Result<Vec<EngagementBucket>, AggregateError> {
    let mut dates = started_at
        .iter()
        .map(|ts| session_date(ts))
        .collect::<Result<Vec<_>, _>>()?;
    if dates.is_empty() {
        return Ok(Vec::new());
    }
    dates.sort();
    let (first, last) = (dates[0], *dates.last().unwrap());

    let mut buckets: Vec<(String, usize)> = Vec::new();
    match granularity {
        Granularity::Week => {
            let monday = |d: NaiveDate| d - Duration::days(d.weekday().num_days_from_monday() as i64);
            let mut cursor = monday(first);
            while cursor <= last {
                buckets.push((week_label(cursor.iso_week()), 0));
                cursor += Duration::days(7);
            }
            for d in &dates {
                let idx = ((monday(*d) - monday(first)).num_days() / 7) as usize;
                buckets[idx].1 += 1;
            }
        }
        Granularity::Month => {
            let key = |d: NaiveDate| d.year() * 12 + d.month0() as i32;
            for k in key(first)..=key(last) {
                buckets.push((format!("{}-{:02}", k.div_euclid(12), k.rem_euclid(12) + 1), 0));
            }
            for d in &dates {
                buckets[(key(*d) - key(first)) as usize].1 += 1;
            }
        }
    }
    Ok(buckets
        .into_iter()
        .map(|(bucket, count)| EngagementBucket { bucket, count })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatientSessionRow {
    pub session_id: String,
    pub date: String,
    pub n_trials: usize,
    pub mean_speed_mps: Option<f64>,
    pub smoothness: Option<f64>,
    pub autocorr_score: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatientSummary {
    pub patient_id: String,
    pub display_name: String,
    pub n_sessions: usize,
    pub n_trials: usize,
    pub total_exercise_time_s: f64,
    /// Mean game score over every trial of every session.
    pub average_score: f64,
    pub sessions: Vec<PatientSessionRow>,
    /// Weekly session counts.
    pub engagement: Vec<EngagementBucket>,
}

pub fn summarize_patient(
    patient: &PatientRecord,
    summaries: &[SessionSummary],
) -> Result<PatientSummary, AggregateError> {
    let n_trials: usize = summaries.iter().map(|s| s.rows.len()).sum();
    let score_sum: f64 = summaries.iter().flat_map(|s| &s.rows).map(|r| r.score).sum();
    let starts: Vec<&str> = summaries.iter().map(|s| s.started_at.as_str()).collect();
    Ok(PatientSummary {
        patient_id: patient.patient_id.clone(),
        display_name: patient.display_name.clone(),
        n_sessions: summaries.len(),
        n_trials,
        total_exercise_time_s: summaries.iter().map(|s| s.total_duration_s).sum(),
        average_score: if n_trials == 0 { 0.0 } else { score_sum / n_trials as f64 },
        sessions: summaries
            .iter()
            .map(|s| {
                Ok(PatientSessionRow {
                    session_id: s.session_id.clone(),
                    date: session_date(&s.started_at)?.to_string(),
                    n_trials: s.rows.len(),
                    mean_speed_mps: s.mean_speed_mps,
                    smoothness: s.smoothness,
                    autocorr_score: s.autocorr_score,
                })
            })
            .collect::<Result<_, AggregateError>>()?,
        engagement: engagement_series(&starts, Granularity::Week)?,
    })
}
