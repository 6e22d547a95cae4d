use std::fmt;

use super::{Axis, MarkerTrack, MotionCapture, TrcError, TrcHeader, Units};

const HEADER_FIELDS: [&str; 8] = [
    "DataRate",
    "CameraRate",
    "NumFrames",
    "NumMarkers",
    "Units",
    "OrigDataRate",
    "OrigDataStartFrame",
    "OrigNumFrames",
];

/// Non-fatal findings from a parse.
#[derive(Debug, Clone, PartialEq)]
pub enum TrcWarning {
    FrameCountMismatch { declared: usize, actual: usize },
    MarkerCountMismatch { declared: usize, actual: usize },
    UnitsDefaulted,
    /// The time column deviated from the `DataRate` grid by more than 0.1 ms.
    TimeRegridded { max_deviation_s: f64 },
    GapsFilled { marker: String, axis: Axis, count: usize },
}

impl fmt::Display for TrcWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TrcWarning::FrameCountMismatch { declared, actual } => {
                write!(f, "header declares {declared} frames, using {actual}")
            }
            TrcWarning::MarkerCountMismatch { declared, actual } => {
                write!(f, "header declares {declared} markers, using {actual}")
            }
            TrcWarning::UnitsDefaulted => write!(f, "Units missing, assuming mm"),
            TrcWarning::TimeRegridded { max_deviation_s } => write!(
                f,
                "time column deviates from DataRate grid by up to {max_deviation_s:.6} s; regridded"
            ),
            TrcWarning::GapsFilled { marker, axis, count } => {
                write!(f, "{marker} {}: interpolated {count} missing samples", axis.label())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParsedTrc {
    pub capture: MotionCapture,
    pub warnings: Vec<TrcWarning>,
}

impl ParsedTrc {
    /// Per-channel interpolated sample counts, for audit.
    pub fn gap_counts(&self) -> impl Iterator<Item = (&str, Axis, usize)> {
        self.warnings.iter().filter_map(|w| match w {
            TrcWarning::GapsFilled { marker, axis, count } => Some((marker.as_str(), *axis, *count)),
            _ => None,
        })
    }
}

pub fn parse_trc(text: &str) -> Result<MotionCapture, TrcError> {
    parse_trc_with_report(text).map(|p| p.capture)
}

/// Any run of tabs/spaces separates fields. Tab-only splitting is used where
/// empty cells matter (header values, data rows) and is tried first.
fn split_ws(line: &str) -> Vec<&str> {
    line.split([' ', '\t']).filter(|s| !s.is_empty()).collect()
}

fn split_tabs(line: &str) -> Vec<&str> {
    line.split('\t').map(str::trim).collect()
}

fn malformed(msg: impl Into<String>) -> TrcError {
    TrcError::MalformedHeader(msg.into())
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    fn next_line(&mut self) -> Option<(usize, &'a str)> {
        self.inner.next().map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
    }

    fn header_line(&mut self, what: &str) -> Result<(usize, &'a str), TrcError> {
        self.next_line().ok_or_else(|| malformed(format!("missing {what} line")))
    }
}

pub fn parse_trc_with_report(text: &str) -> Result<ParsedTrc, TrcError> {
    let mut lines = Lines {
        inner: text.lines().enumerate(),
    };
    let mut warnings = Vec::new();

    let (_, first) = lines.header_line("PathFileType")?;
    let first_fields = if first.contains('\t') {
        split_tabs(first)
    } else {
        split_ws(first)
    };
    if !first_fields
        .first()
        .is_some_and(|f| f.eq_ignore_ascii_case("PathFileType"))
    {
        return Err(malformed("line 1 must start with PathFileType"));
    }
    let source_name = first_fields.get(3).copied().unwrap_or("").to_string();

    let (_, names_line) = lines.header_line("header field names")?;
    let (values_lineno, values_line) = lines.header_line("header values")?;
    let field_names = split_ws(names_line);
    let values = if values_line.contains('\t') {
        split_tabs(values_line)
    } else {
        split_ws(values_line)
    };
    let mut slots: [Option<&str>; 8] = [None; 8];
    for (col, name) in field_names.iter().enumerate() {
        let slot = HEADER_FIELDS
            .iter()
            .position(|f| f.eq_ignore_ascii_case(name))
            .ok_or_else(|| malformed(format!("unknown header field {name:?}")))?;
        slots[slot] = Some(values.get(col).copied().unwrap_or(""));
    }
    let number = |slot: usize| -> Result<Option<f64>, TrcError> {
        match slots[slot] {
            None | Some("") => Ok(None),
            Some(text) => text.parse::<f64>().map(Some).map_err(|_| TrcError::UnparsableNumber {
                line: values_lineno,
                column: field_names
                    .iter()
                    .position(|n| n.eq_ignore_ascii_case(HEADER_FIELDS[slot]))
                    .map_or(0, |c| c + 1),
                text: text.to_string(),
            }),
        }
    };
    let required = |slot: usize| -> Result<f64, TrcError> {
        number(slot)?.ok_or_else(|| malformed(format!("missing {}", HEADER_FIELDS[slot])))
    };
    let count = |v: f64, name: &str| -> Result<usize, TrcError> {
        if v.fract() == 0.0 && (0.0..1e12).contains(&v) {
            Ok(v as usize)
        } else {
            Err(malformed(format!("{name} must be a non-negative integer, got {v}")))
        }
    };

    let data_rate = required(0)?;
    if !(data_rate.is_finite() && data_rate > 0.0) {
        return Err(malformed(format!("DataRate must be positive, got {data_rate}")));
    }
    let camera_rate = required(1)?;
    let declared_frames = count(required(2)?, "NumFrames")?;
    let declared_markers = count(required(3)?, "NumMarkers")?;
    let units = match slots[4] {
        None | Some("") => {
            warnings.push(TrcWarning::UnitsDefaulted);
            Units::Mm
        }
        Some(u) => u.parse::<Units>().map_err(malformed)?,
    };
    let orig_data_rate = number(5)?.unwrap_or(data_rate);
    let orig_data_start_frame = match number(6)? {
        Some(v) => count(v, "OrigDataStartFrame")?,
        None => 1,
    };
    let orig_num_frames = match number(7)? {
        Some(v) => count(v, "OrigNumFrames")?,
        None => declared_frames,
    };

    let (_, marker_line) = lines.header_line("marker names")?;
    let marker_fields = if marker_line.contains('\t') {
        split_tabs(marker_line)
    } else {
        split_ws(marker_line)
    };
    if marker_fields.len() < 2
        || !marker_fields[0].eq_ignore_ascii_case("Frame#")
        || !marker_fields[1].eq_ignore_ascii_case("Time")
    {
        return Err(malformed("line 4 must start with Frame# and Time"));
    }
    let marker_names: Vec<String> = marker_fields[2..]
        .iter()
        .filter(|s| !s.is_empty())
        .map(|s| s.to_string())
        .collect();
    if marker_names.is_empty() {
        return Err(malformed("no marker names on line 4"));
    }

    let (_, axis_line) = lines.header_line("axis labels")?;
    let axis_labels = split_ws(axis_line);
    if axis_labels.len() != 3 * marker_names.len() {
        return Err(malformed(format!(
            "line 5 has {} axis labels for {} markers",
            axis_labels.len(),
            marker_names.len()
        )));
    }

    let file_markers = marker_names.len();
    let columns = 2 + 3 * file_markers;
    let mut time = Vec::new();
    let mut coords: Vec<Vec<f64>> = vec![Vec::new(); 3 * file_markers];
    while let Some((lineno, line)) = lines.next_line() {
        if line.trim().is_empty() {
            continue;
        }
        let cells = row_cells(line, columns).ok_or_else(|| {
            TrcError::CountMismatch(format!(
                "line {lineno} has {} fields, expected {columns}",
                split_ws(line).len()
            ))
        })?;
        let parse_cell = |col: usize, allow_gap: bool| -> Result<f64, TrcError> {
            let text = cells[col];
            if text.is_empty() && allow_gap {
                return Ok(f64::NAN);
            }
            text.parse::<f64>().map_err(|_| TrcError::UnparsableNumber {
                line: lineno,
                column: col + 1,
                text: text.to_string(),
            })
        };
        parse_cell(0, false)?;
        let t = parse_cell(1, false)?;
        if !t.is_finite() {
            return Err(TrcError::UnparsableNumber {
                line: lineno,
                column: 2,
                text: cells[1].to_string(),
            });
        }
        time.push(t);
        for (c, col) in coords.iter_mut().enumerate() {
            col.push(parse_cell(c + 2, true)?);
        }
    }
    if time.is_empty() {
        return Err(TrcError::CountMismatch("no data rows".into()));
    }

    let num_frames = declared_frames.min(time.len());
    if declared_frames != time.len() {
        warnings.push(TrcWarning::FrameCountMismatch {
            declared: declared_frames,
            actual: num_frames,
        });
    }
    if num_frames == 0 {
        return Err(TrcError::CountMismatch("header declares zero frames".into()));
    }
    let num_markers = declared_markers.min(file_markers);
    if declared_markers != file_markers {
        warnings.push(TrcWarning::MarkerCountMismatch {
            declared: declared_markers,
            actual: num_markers,
        });
    }
    if num_markers == 0 {
        return Err(TrcError::CountMismatch("header declares zero markers".into()));
    }
    time.truncate(num_frames);

    for (i, w) in time.windows(2).enumerate() {
        if w[1] <= w[0] {
            return Err(TrcError::NonMonotonicTime { row: i + 2 });
        }
    }
    let t0 = time[0];
    let grid: Vec<f64> = (0..num_frames).map(|i| t0 + i as f64 / data_rate).collect();
    let max_deviation_s = time
        .iter()
        .zip(&grid)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    if max_deviation_s > 1e-4 {
        warnings.push(TrcWarning::TimeRegridded { max_deviation_s });
    }

    let marker_names: Vec<String> = marker_names.into_iter().take(num_markers).collect();
    let mut markers = Vec::with_capacity(num_markers);
    let mut columns_iter = coords.into_iter();
    for name in &marker_names {
        let mut track = MarkerTrack {
            x: Vec::new(),
            y: Vec::new(),
            z: Vec::new(),
        };
        for axis in [Axis::X, Axis::Y, Axis::Z] {
            let mut col = columns_iter.next().expect("three columns per marker");
            col.truncate(num_frames);
            let filled = fill_gaps(&mut col);
            if filled == num_frames {
                return Err(TrcError::EmptyChannel {
                    marker: name.clone(),
                    axis: axis.label(),
                });
            }
            if filled > 0 {
                warnings.push(TrcWarning::GapsFilled {
                    marker: name.clone(),
                    axis,
                    count: filled,
                });
            }
            *track.axis_mut(axis) = col;
        }
        markers.push(track);
    }

    let capture = MotionCapture {
        header: TrcHeader {
            source_name,
            data_rate,
            camera_rate,
            num_frames,
            num_markers,
            units,
            orig_data_rate,
            orig_data_start_frame,
            orig_num_frames,
            marker_names,
        },
        time: grid,
        markers,
    };
    Ok(ParsedTrc { capture, warnings })
}

/// Split a data row into exactly `columns` cells. Tab splitting keeps empty
/// cells (dropouts); if that does not line up, fall back to treating any
/// whitespace run as one delimiter.
fn row_cells(line: &str, columns: usize) -> Option<Vec<&str>> {
    if line.contains('\t') {
        let mut cells = split_tabs(line);
        while cells.len() > columns && cells.last() == Some(&"") {
            cells.pop();
        }
        if cells.len() == columns && !cells[0].is_empty() {
            return Some(cells);
        }
    }
    let cells = split_ws(line);
    (cells.len() == columns).then_some(cells)
}

/// Replace non-finite samples by linear interpolation between the nearest
/// finite neighbours, extending the nearest value at the edges. Returns the
/// number of samples replaced; if nothing is finite the column is untouched.
pub(crate) fn fill_gaps(col: &mut [f64]) -> usize {
    let valid: Vec<usize> = (0..col.len()).filter(|&i| col[i].is_finite()).collect();
    let missing = col.len() - valid.len();
    if missing == 0 || valid.is_empty() {
        return missing;
    }
    let (first, last) = (valid[0], *valid.last().unwrap());
    let (head, tail) = (col[first], col[last]);
    col[..first].iter_mut().for_each(|v| *v = head);
    col[last + 1..].iter_mut().for_each(|v| *v = tail);
    for pair in valid.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        if b - a > 1 {
            let (va, vb) = (col[a], col[b]);
            for (i, v) in col.iter_mut().enumerate().take(b).skip(a + 1) {
                let t = (i - a) as f64 / (b - a) as f64;
                *v = va + t * (vb - va);
            }
        }
    }
    missing
}
