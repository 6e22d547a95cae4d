use std::fmt::Write;

use super::MotionCapture;

/// Header rates: two decimals when that is exact, shortest round-trip form
/// otherwise.
fn format_rate(v: f64) -> String {
    let two = format!("{v:.2}");
    if two.parse::<f64>() == Ok(v) {
        two
    } else {
        format!("{v}")
    }
}

/// Serialize a capture. Output is tab-separated with 6-decimal fixed
/// numbers and `\n` line endings.
pub fn write_trc(mc: &MotionCapture) -> String {
    let h = &mc.header;
    let mut out = String::with_capacity(64 + h.num_frames * (16 + h.num_markers * 30));
    let _ = writeln!(out, "PathFileType\t4\t(X/Y/Z)\t{}", h.source_name);
    out.push_str(
        "DataRate\tCameraRate\tNumFrames\tNumMarkers\tUnits\tOrigDataRate\tOrigDataStartFrame\tOrigNumFrames\n",
    );
    let _ = writeln!(
        out,
        "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
        format_rate(h.data_rate),
        format_rate(h.camera_rate),
        h.num_frames,
        h.num_markers,
        h.units,
        format_rate(h.orig_data_rate),
        h.orig_data_start_frame,
        h.orig_num_frames
    );
    out.push_str("Frame#\tTime");
    for name in &h.marker_names {
        let _ = write!(out, "\t{name}\t\t");
    }
    out.push('\n');
    out.push('\t');
    for i in 1..=h.num_markers {
        let _ = write!(out, "\tX{i}\tY{i}\tZ{i}");
    }
    out.push_str("\n\n");
    for frame in 0..h.num_frames {
        let _ = write!(out, "{}\t{:.6}", frame + 1, mc.time[frame]);
        for m in &mc.markers {
            let _ = write!(out, "\t{:.6}\t{:.6}\t{:.6}", m.x[frame], m.y[frame], m.z[frame]);
        }
        out.push('\n');
    }
    out
}
