use serde::{Deserialize, Serialize};

use super::{mean, SignalError, TimeSeries};

/// Normalized auto-correlation over non-negative lags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LagSeries {
    pub lags: Vec<usize>,
    pub values: Vec<f64>,
    pub rate: f64,
}

impl LagSeries {
    pub fn lag_seconds(&self) -> Vec<f64> {
        self.lags.iter().map(|&k| k as f64 / self.rate).collect()
    }
}

/// Mean-removed self-correlation `r[k] = sum_n x[n + k] x[n]` for
/// `k = 0..n`, divided by `r[0]`.
///
/// Computed by zero-padded FFT (length >= 2n, so no circular wrap-around).
pub fn autocorrelate(s: &TimeSeries) -> Result<LagSeries, SignalError> {
    let n = s.len();
    if n < 2 {
        return Err(SignalError::TooShort { needed: 2, got: n });
    }
    let m = mean(s.samples());
    let centered: Vec<f64> = s.samples().iter().map(|v| v - m).collect();
    let energy: f64 = centered.iter().map(|v| v * v).sum();
    let scale = s.samples().iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    // Relative test: a constant signal leaves only rounding residue.
    if energy <= (scale * scale) * n as f64 * 1e-24 || energy == 0.0 {
        return Err(SignalError::ZeroVariance);
    }

    let raw = if n <= 64 {
        direct(&centered)
    } else {
        via_fft(&centered)
    };
    let r0 = raw[0];
    let mut values: Vec<f64> = raw.iter().map(|r| (r / r0).clamp(-1.0, 1.0)).collect();
    values[0] = 1.0;
    Ok(LagSeries {
        lags: (0..n).collect(),
        values,
        rate: s.rate(),
    })
}

fn direct(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    (0..n)
        .map(|k| (0..n - k).map(|i| x[i + k] * x[i]).sum())
        .collect()
}

fn via_fft(x: &[f64]) -> Vec<f64> {
    use rustfft::num_complex::Complex64;
    use rustfft::FftPlanner;

    let n = x.len();
    let size = (2 * n).next_power_of_two();
    let mut buf = super::spectrum::dft_padded(x, size);
    for c in buf.iter_mut() {
        *c = Complex64::new(c.norm_sqr(), 0.0);
    }
    FftPlanner::new().plan_fft_inverse(size).process(&mut buf);
    buf[..n].iter().map(|c| c.re / size as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_example() {
        let s = TimeSeries::new(vec![1.0, 2.0, 3.0], 30.0, "m").unwrap();
        let ac = autocorrelate(&s).unwrap();
        assert_eq!(ac.values, vec![1.0, 0.0, -0.5]);
        assert_eq!(ac.lags, vec![0, 1, 2]);
    }

    #[test]
    fn constant_is_zero_variance() {
        let s = TimeSeries::new(vec![0.7; 100], 30.0, "m").unwrap();
        assert_eq!(autocorrelate(&s), Err(SignalError::ZeroVariance));
    }

    #[test]
    fn fft_path_matches_direct() {
        let x: Vec<f64> = (0..300).map(|i| ((i * 37 % 101) as f64).sin()).collect();
        let a = direct(&x);
        let b = via_fft(&x);
        for (p, q) in a.iter().zip(&b) {
            assert!((p - q).abs() < 1e-9 * a[0]);
        }
    }
}
