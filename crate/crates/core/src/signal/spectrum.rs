use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::{SignalError, TimeSeries};

/// Full complex DFT, `A_k = sum_m a_m exp(-2 pi i m k / n)`, no scaling.
pub fn dft(samples: &[f64]) -> Result<Vec<Complex64>, SignalError> {
    if samples.is_empty() {
        return Err(SignalError::Empty);
    }
    Ok(dft_padded(samples, samples.len()))
}

/// DFT of `samples` zero-padded to `n` points.
pub(crate) fn dft_padded(samples: &[f64], n: usize) -> Vec<Complex64> {
    debug_assert!(n >= samples.len());
    let mut buf: Vec<Complex64> = samples
        .iter()
        .map(|&v| Complex64::new(v, 0.0))
        .chain(std::iter::repeat(Complex64::new(0.0, 0.0)))
        .take(n)
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    buf
}

/// One-sided amplitude spectrum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub frequencies: Vec<f64>,
    pub amplitudes: Vec<f64>,
    pub n_input: usize,
}

impl Spectrum {
    /// Index of the largest non-DC amplitude.
    pub fn peak_bin(&self) -> Option<usize> {
        (1..self.amplitudes.len()).max_by(|&a, &b| self.amplitudes[a].total_cmp(&self.amplitudes[b]))
    }
}

/// Amplitude spectrum in signal units. Paired bins are doubled to fold the
/// negative frequencies in; DC and the even-length Nyquist bin are not.
pub fn amplitude_spectrum(s: &TimeSeries) -> Result<Spectrum, SignalError> {
    let n = s.len();
    if n < 2 {
        return Err(SignalError::TooShort { needed: 2, got: n });
    }
    let coeffs = dft(s.samples())?;
    let bins = n / 2 + 1;
    let nf = n as f64;
    let amplitudes = (0..bins)
        .map(|k| {
            let unpaired = k == 0 || (n.is_multiple_of(2) && k == n / 2);
            let scale = if unpaired { 1.0 } else { 2.0 };
            scale * coeffs[k].norm() / nf
        })
        .collect();
    let frequencies = (0..bins).map(|k| k as f64 * s.rate() / nf).collect();
    Ok(Spectrum {
        frequencies,
        amplitudes,
        n_input: n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Complex64, re: f64, im: f64) -> bool {
        (a.re - re).abs() < 1e-12 && (a.im - im).abs() < 1e-12
    }

    #[test]
    fn constant_goes_to_dc() {
        let a = dft(&[1.0; 4]).unwrap();
        assert!(close(a[0], 4.0, 0.0));
        assert!(a[1..].iter().all(|c| close(*c, 0.0, 0.0)));
    }

    #[test]
    fn alternating_quarter_wave() {
        let a = dft(&[1.0, 0.0, -1.0, 0.0]).unwrap();
        assert!(close(a[0], 0.0, 0.0));
        assert!(close(a[1], 2.0, 0.0));
        assert!(close(a[2], 0.0, 0.0));
        assert!(close(a[3], 2.0, 0.0));
    }

    #[test]
    fn empty_dft_is_an_error() {
        assert_eq!(dft(&[]), Err(SignalError::Empty));
    }

    #[test]
    fn dc_only_spectrum() {
        let s = TimeSeries::new(vec![5.0; 64], 30.0, "m").unwrap();
        let sp = amplitude_spectrum(&s).unwrap();
        assert!((sp.amplitudes[0] - 5.0).abs() < 1e-12);
        assert!(sp.amplitudes[1..].iter().all(|&a| a < 1e-12));
        assert_eq!(sp.amplitudes.len(), 33);
    }

    #[test]
    fn nyquist_not_doubled() {
        // alternating +-1 puts everything in the Nyquist bin
        let s = TimeSeries::new((0..8).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect(), 8.0, "m")
            .unwrap();
        let sp = amplitude_spectrum(&s).unwrap();
        assert!((sp.amplitudes[4] - 1.0).abs() < 1e-12);
        assert_eq!(sp.frequencies[4], 4.0);
    }

    #[test]
    fn odd_length_bins() {
        let s = TimeSeries::new(vec![1.0; 7], 7.0, "m").unwrap();
        let sp = amplitude_spectrum(&s).unwrap();
        assert_eq!(sp.frequencies, vec![0.0, 1.0, 2.0, 3.0]);
    }
}
