use super::{SignalError, TimeSeries};

pub const DEFAULT_SMOOTHING_WINDOW: usize = 5;

/// Centered moving average, i.e. a Savitzky-Golay filter of polynomial
/// order 0. Edges are handled by replicating the first/last sample.
pub fn smooth_ma(s: &TimeSeries, window: usize) -> Result<TimeSeries, SignalError> {
    if window == 0 || window.is_multiple_of(2) {
        return Err(SignalError::WindowEven(window));
    }
    let x = s.samples();
    let n = x.len();
    if window > n {
        return Err(SignalError::WindowTooLarge { window, len: n });
    }
    let half = window / 2;
    let at = |j: isize| -> f64 { x[j.clamp(0, n as isize - 1) as usize] };

    let out: Vec<f64> = (0..n as isize)
        .map(|i| (i - half as isize..=i + half as isize).map(at).sum::<f64>() / window as f64)
        .collect();
    let mut out = out;
    // Summation can be off by an ulp for constants; keep them exact.
    if x.iter().all(|&v| v == x[0]) {
        out.iter_mut().for_each(|v| *v = x[0]);
    }
    Ok(s.with_samples(out))
}
