//! Chart-ready payloads. Every series has one value per x entry; missing
//! values are `None` and render as gaps.

use serde::{Deserialize, Serialize};

use crate::aggregate::{EngagementBucket, Granularity, SessionSummary};
use crate::kinematics::TrialSeries;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChartKind {
    Displacement,
    Velocity,
    Autocorrelation,
    Spectrum,
    SessionOverview,
    Engagement,
}

impl ChartKind {
    pub const ALL: [ChartKind; 6] = [
        ChartKind::Displacement,
        ChartKind::Velocity,
        ChartKind::Autocorrelation,
        ChartKind::Spectrum,
        ChartKind::SessionOverview,
        ChartKind::Engagement,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ChartKind::Displacement => "displacement",
            ChartKind::Velocity => "velocity",
            ChartKind::Autocorrelation => "autocorrelation",
            ChartKind::Spectrum => "spectrum",
            ChartKind::SessionOverview => "session_overview",
            ChartKind::Engagement => "engagement",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartSeries {
    pub name: String,
    pub unit: String,
    pub values: Vec<Option<f64>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Annotations {
    pub upper_limit: Option<f64>,
    pub lower_limit: Option<f64>,
    pub beat_times: Vec<f64>,
    pub analysis_start: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartPayload {
    pub kind: ChartKind,
    pub x: Vec<f64>,
    pub x_unit: String,
    /// Category labels for x, when x is an index.
    pub labels: Option<Vec<String>>,
    pub series: Vec<ChartSeries>,
    pub annotations: Annotations,
}

impl ChartPayload {
    fn new(kind: ChartKind, x: Vec<f64>, x_unit: &str) -> Self {
        Self {
            kind,
            x,
            x_unit: x_unit.to_string(),
            labels: None,
            series: Vec::new(),
            annotations: Annotations::default(),
        }
    }

    fn push(&mut self, name: impl Into<String>, unit: &str, values: Vec<Option<f64>>) {
        debug_assert_eq!(values.len(), self.x.len());
        self.series.push(ChartSeries {
            name: name.into(),
            unit: unit.to_string(),
            values,
        });
    }

    fn push_full(&mut self, name: impl Into<String>, unit: &str, values: &[f64]) {
        self.push(name, unit, values.iter().map(|v| v.is_finite().then_some(*v)).collect());
    }

    /// Series lengths match x, labels match x, annotations are finite.
    pub fn is_consistent(&self) -> bool {
        let n = self.x.len();
        let a = &self.annotations;
        self.series.iter().all(|s| s.values.len() == n)
            && self.labels.as_ref().is_none_or(|l| l.len() == n)
            && a.upper_limit.is_none_or(f64::is_finite)
            && a.lower_limit.is_none_or(f64::is_finite)
            && a.analysis_start.is_none_or(f64::is_finite)
            && a.beat_times.iter().all(|t| t.is_finite())
    }
}

fn finite_or(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

fn beat_annotations(s: &TrialSeries) -> Annotations {
    Annotations {
        upper_limit: None,
        lower_limit: None,
        beat_times: s.beat_times.iter().copied().filter(|t| t.is_finite()).collect(),
        analysis_start: s.analysis_start_s.and_then(finite_or),
    }
}

pub fn displacement_chart(s: &TrialSeries) -> ChartPayload {
    let n = s.time_s.len();
    let mut c = ChartPayload::new(ChartKind::Displacement, s.time_s.clone(), "s");
    c.push_full(format!("{} y", s.primary_joint), "m", &s.primary_y);
    let gaps = vec![None; n];
    let channel = |v: &Option<Vec<f64>>| {
        v.as_ref()
            .map(|v| v.iter().map(|x| finite_or(*x)).collect())
            .unwrap_or_else(|| gaps.clone())
    };
    c.push(format!("{} y", s.shoulder_joint), "m", channel(&s.shoulder_y));
    c.push(format!("{} z", s.primary_joint), "m", channel(&s.hand_z));
    c.annotations = Annotations {
        upper_limit: finite_or(s.upper_limit_m),
        lower_limit: finite_or(s.lower_limit_m),
        ..beat_annotations(s)
    };
    c
}

pub fn velocity_chart(s: &TrialSeries) -> ChartPayload {
    let mut c = ChartPayload::new(ChartKind::Velocity, s.time_s.clone(), "s");
    c.push_full(format!("{} y velocity", s.primary_joint), "m/s", &s.velocity);
    c.annotations = beat_annotations(s);
    c
}

pub fn autocorrelation_chart(s: &TrialSeries) -> ChartPayload {
    match &s.autocorrelation {
        Some(lags) => {
            let mut c = ChartPayload::new(ChartKind::Autocorrelation, lags.lag_seconds(), "s");
            c.push_full("autocorrelation", "1", &lags.values);
            c
        }
        None => ChartPayload::new(ChartKind::Autocorrelation, Vec::new(), "s"),
    }
}

pub fn spectrum_chart(s: &TrialSeries) -> ChartPayload {
    match &s.spectrum {
        Some(sp) => {
            let mut c = ChartPayload::new(ChartKind::Spectrum, sp.frequencies.clone(), "Hz");
            c.push_full("amplitude", "m", &sp.amplitudes);
            c
        }
        None => ChartPayload::new(ChartKind::Spectrum, Vec::new(), "Hz"),
    }
}

/// Smoothness and auto-correlation score against trial index.
pub fn session_overview_chart(summary: &SessionSummary) -> ChartPayload {
    let x = summary.rows.iter().map(|r| r.trial_index as f64).collect();
    let mut c = ChartPayload::new(ChartKind::SessionOverview, x, "trial");
    c.labels = Some(summary.rows.iter().map(|r| r.trial_id.clone()).collect());
    c.push("smoothness", "1", summary.rows.iter().map(|r| r.smoothness).collect());
    c.push("autocorr_score", "1", summary.rows.iter().map(|r| r.autocorr_score).collect());
    c
}

pub fn engagement_chart(buckets: &[EngagementBucket], granularity: Granularity) -> ChartPayload {
    let unit = match granularity {
        Granularity::Week => "week",
        Granularity::Month => "month",
    };
    let x = (0..buckets.len()).map(|i| i as f64).collect();
    let mut c = ChartPayload::new(ChartKind::Engagement, x, unit);
    c.labels = Some(buckets.iter().map(|b| b.bucket.clone()).collect());
    c.push("sessions", "count", buckets.iter().map(|b| Some(b.count as f64)).collect());
    c
}

/// The four per-trial charts, in [`ChartKind::ALL`] order.
pub fn trial_charts(s: &TrialSeries) -> Vec<ChartPayload> {
    vec![
        displacement_chart(s),
        velocity_chart(s),
        autocorrelation_chart(s),
        spectrum_chart(s),
    ]
}
