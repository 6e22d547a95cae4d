//! Reading and writing `.trc` motion-capture files.
//!
//! The layout is the conventional Motion Analysis one: five header lines,
//! an optional blank line, then one tab-separated row per frame. See
//! `docs/trc-format.md` for the byte-level description.

mod joint;
mod parse;
mod write;

pub use joint::{Axis, JointId};
pub use parse::{parse_trc, parse_trc_with_report, ParsedTrc, TrcWarning};
pub use write::write_trc;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::signal::TimeSeries;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TrcError {
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("count mismatch: {0}")]
    CountMismatch(String),
    #[error("time column not strictly increasing at data row {row}")]
    NonMonotonicTime { row: usize },
    #[error("unparsable number {text:?} at line {line}, column {column}")]
    UnparsableNumber {
        line: usize,
        column: usize,
        text: String,
    },
    #[error("marker {marker} axis {axis} has no valid samples")]
    EmptyChannel { marker: String, axis: &'static str },
    #[error("joint {joint} not found; available markers: {available:?}")]
    JointNotFound {
        joint: String,
        available: Vec<String>,
    },
    #[error("invalid capture: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Units {
    Mm,
    Cm,
    M,
}

impl Units {
    pub fn as_str(self) -> &'static str {
        match self {
            Units::Mm => "mm",
            Units::Cm => "cm",
            Units::M => "m",
        }
    }

    fn per_meter(self) -> f64 {
        match self {
            Units::Mm => 1000.0,
            Units::Cm => 100.0,
            Units::M => 1.0,
        }
    }

    /// Convert a value in these units to meters. Division keeps the result
    /// correctly rounded, so 1500 mm is exactly 1.5 m.
    pub fn to_meters(self, v: f64) -> f64 {
        v / self.per_meter()
    }

    pub fn from_meters(self, v: f64) -> f64 {
        v * self.per_meter()
    }
}

impl fmt::Display for Units {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Units {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "mm" => Ok(Units::Mm),
            "cm" => Ok(Units::Cm),
            "m" => Ok(Units::M),
            other => Err(format!("unknown units {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrcHeader {
    /// Name recorded on the `PathFileType` line.
    pub source_name: String,
    pub data_rate: f64,
    pub camera_rate: f64,
    pub num_frames: usize,
    pub num_markers: usize,
    pub units: Units,
    pub orig_data_rate: f64,
    pub orig_data_start_frame: usize,
    pub orig_num_frames: usize,
    pub marker_names: Vec<String>,
}

/// One marker's coordinate columns, each `num_frames` long.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarkerTrack {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub z: Vec<f64>,
}

impl MarkerTrack {
    pub fn axis(&self, axis: Axis) -> &[f64] {
        match axis {
            Axis::X => &self.x,
            Axis::Y => &self.y,
            Axis::Z => &self.z,
        }
    }

    pub(crate) fn axis_mut(&mut self, axis: Axis) -> &mut Vec<f64> {
        match axis {
            Axis::X => &mut self.x,
            Axis::Y => &mut self.y,
            Axis::Z => &mut self.z,
        }
    }
}

/// A parsed recording. Marker order follows the file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MotionCapture {
    pub header: TrcHeader,
    pub time: Vec<f64>,
    pub markers: Vec<MarkerTrack>,
}

impl MotionCapture {
    /// Build a capture from coordinates in meters, converting to `units`.
    /// Time starts at zero and advances by `1 / rate`.
    pub fn from_tracks(
        source_name: impl Into<String>,
        rate: f64,
        units: Units,
        named_tracks: Vec<(String, MarkerTrack)>,
    ) -> Result<Self, TrcError> {
        let num_frames = named_tracks.first().map_or(0, |(_, t)| t.x.len());
        let (marker_names, markers): (Vec<_>, Vec<_>) = named_tracks
            .into_iter()
            .map(|(name, t)| {
                let conv = |v: Vec<f64>| v.into_iter().map(|c| units.from_meters(c)).collect();
                (
                    name,
                    MarkerTrack {
                        x: conv(t.x),
                        y: conv(t.y),
                        z: conv(t.z),
                    },
                )
            })
            .unzip();
        let mc = MotionCapture {
            header: TrcHeader {
                source_name: source_name.into(),
                data_rate: rate,
                camera_rate: rate,
                num_frames,
                num_markers: marker_names.len(),
                units,
                orig_data_rate: rate,
                orig_data_start_frame: 1,
                orig_num_frames: num_frames,
                marker_names,
            },
            time: (0..num_frames).map(|i| i as f64 / rate).collect(),
            markers,
        };
        mc.validate()?;
        Ok(mc)
    }

    pub fn validate(&self) -> Result<(), TrcError> {
        let h = &self.header;
        let bad = |msg: String| Err(TrcError::Invalid(msg));
        if !(h.data_rate.is_finite() && h.data_rate > 0.0) {
            return bad(format!("data rate {} must be positive", h.data_rate));
        }
        if h.num_frames == 0 || h.num_markers == 0 {
            return bad("capture needs at least one frame and one marker".into());
        }
        if h.marker_names.len() != h.num_markers || self.markers.len() != h.num_markers {
            return bad(format!(
                "header declares {} markers, names {}, tracks {}",
                h.num_markers,
                h.marker_names.len(),
                self.markers.len()
            ));
        }
        if self.time.len() != h.num_frames {
            return bad(format!("time has {} samples, expected {}", self.time.len(), h.num_frames));
        }
        for (i, w) in self.time.windows(2).enumerate() {
            if w[1] <= w[0] {
                return Err(TrcError::NonMonotonicTime { row: i + 2 });
            }
            if ((w[1] - w[0]) - 1.0 / h.data_rate).abs() > 1e-6 {
                return bad(format!("time step at frame {} differs from 1/data_rate", i + 2));
            }
        }
        for (name, m) in h.marker_names.iter().zip(&self.markers) {
            for axis in [Axis::X, Axis::Y, Axis::Z] {
                let col = m.axis(axis);
                if col.len() != h.num_frames {
                    return bad(format!("marker {name} {} has {} samples", axis.label(), col.len()));
                }
                if col.iter().any(|v| !v.is_finite()) {
                    return bad(format!("marker {name} {} has non-finite samples", axis.label()));
                }
            }
        }
        Ok(())
    }

    pub fn marker_index(&self, joint: &JointId) -> Option<usize> {
        self.header.marker_names.iter().position(|n| joint.matches(n))
    }

    /// One coordinate column as a time series in meters.
    pub fn channel(&self, joint: &JointId, axis: Axis) -> Result<TimeSeries, TrcError> {
        let idx = self.marker_index(joint).ok_or_else(|| TrcError::JointNotFound {
            joint: joint.to_string(),
            available: self.header.marker_names.clone(),
        })?;
        let units = self.header.units;
        let samples = self.markers[idx]
            .axis(axis)
            .iter()
            .map(|&v| units.to_meters(v))
            .collect();
        TimeSeries::new(samples, self.header.data_rate, "m").map_err(|e| TrcError::Invalid(e.to_string()))
    }

    pub fn duration_s(&self) -> f64 {
        self.header.num_frames as f64 / self.header.data_rate
    }
}
