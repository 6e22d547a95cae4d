use super::{SignalError, TimeSeries};

/// Per-sample gradient: central differences in the interior, one-sided
/// first differences at both ends.
pub fn gradient(s: &TimeSeries) -> Result<Vec<f64>, SignalError> {
    let x = s.samples();
    let n = x.len();
    if n < 2 {
        return Err(SignalError::TooShort { needed: 2, got: n });
    }
    let mut g = Vec::with_capacity(n);
    g.push(x[1] - x[0]);
    g.extend(x.windows(3).map(|w| (w[2] - w[0]) / 2.0));
    g.push(x[n - 1] - x[n - 2]);
    Ok(g)
}

/// Gradient scaled by the frame rate, in `<units>/s`.
pub fn velocity(s: &TimeSeries) -> Result<TimeSeries, SignalError> {
    let rate = s.rate();
    let samples = gradient(s)?.into_iter().map(|g| g * rate).collect();
    TimeSeries::new(samples, rate, format!("{}/s", s.units()))
}
