//! Independent oracles shared by the integration tests. None of these call
//! into the library's numeric code.

#![allow(dead_code)]

use std::f64::consts::PI;

use rehab_core::signal::TimeSeries;

/// Frozen output of `oracles/sparc_reference.py` for [`gaussian_profile`]
/// at default parameters.
pub const GAUSSIAN_SPARC_GOLDEN: f64 = -1.417397314272838;

pub fn ts(samples: Vec<f64>, rate: f64) -> TimeSeries {
    TimeSeries::new(samples, rate, "m").unwrap()
}

/// O(n²) direct summation of A_k = Σ a_m e^{−2πi mk/n}, as (re, im).
pub fn naive_dft(x: &[f64]) -> Vec<(f64, f64)> {
    let n = x.len();
    (0..n)
        .map(|k| {
            x.iter().enumerate().fold((0.0, 0.0), |(re, im), (m, &a)| {
                // reduce mk mod n first so the angle stays small and exact
                let ang = -2.0 * PI * ((m * k) % n) as f64 / n as f64;
                (re + a * ang.cos(), im + a * ang.sin())
            })
        })
        .collect()
}

/// Windowed mean with an explicitly replicated-edge copy of the signal.
pub fn brute_smooth(x: &[f64], window: usize) -> Vec<f64> {
    let h = window / 2;
    let mut padded = vec![x[0]; h];
    padded.extend_from_slice(x);
    padded.extend(std::iter::repeat_n(*x.last().unwrap(), h));
    (0..x.len())
        .map(|i| padded[i..i + window].iter().sum::<f64>() / window as f64)
        .collect()
}

/// Peaks characterised rather than constructed: among all subsets of the
/// candidate maxima, the answer is the unique one that is pairwise
/// `min_distance` apart and in which every excluded candidate lies within
/// `min_distance` of a retained candidate of higher priority (taller, or
/// equal and earlier).
pub fn peaks_oracle(x: &[f64], min_height: f64, min_distance: usize) -> Vec<usize> {
    let n = x.len();
    let mut candidates = Vec::new();
    for i in 1..n.saturating_sub(1) {
        if x[i - 1] >= x[i] {
            continue;
        }
        // walk the plateau starting at i
        let mut j = i;
        while j + 1 < n && x[j + 1] == x[i] {
            j += 1;
        }
        if j + 1 < n && x[j + 1] < x[i] && x[i] >= min_height {
            candidates.push(i);
        }
    }
    let outranks = |a: usize, b: usize| x[a] > x[b] || (x[a] == x[b] && a < b);
    let close = |a: usize, b: usize| a.abs_diff(b) < min_distance.max(1);

    let mut found: Option<Vec<usize>> = None;
    for mask in 0u32..(1 << candidates.len()) {
        let chosen: Vec<usize> = (0..candidates.len())
            .filter(|b| mask >> b & 1 == 1)
            .map(|b| candidates[b])
            .collect();
        let independent = chosen
            .iter()
            .enumerate()
            .all(|(i, &a)| chosen[i + 1..].iter().all(|&b| !close(a, b)));
        let dominated = candidates
            .iter()
            .filter(|c| !chosen.contains(c))
            .all(|&c| chosen.iter().any(|&s| close(s, c) && outranks(s, c)));
        if independent && dominated {
            assert!(found.is_none(), "oracle characterisation is not unique");
            found = Some(chosen);
        }
    }
    found.expect("some subset always qualifies")
}

/// Every length-`n` sequence over `alphabet`.
pub fn all_sequences(n: usize, alphabet: &[f64]) -> Vec<Vec<f64>> {
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|s| {
                alphabet.iter().map(move |&a| {
                    let mut t = s.clone();
                    t.push(a);
                    t
                })
            })
            .collect();
    }
    out
}

/// Port of `oracles/sparc_reference.py`: spectrum bins by explicit sums.
pub fn sparc_direct(speed: &[f64], rate: f64, omega_c_max: f64, threshold: f64, pad_factor: usize) -> f64 {
    let mut nfft = 1;
    while nfft < pad_factor * speed.len() {
        nfft *= 2;
    }
    let half = nfft / 2;
    let mags: Vec<f64> = (0..=half)
        .map(|k| {
            let (re, im) = speed.iter().enumerate().fold((0.0, 0.0), |(re, im), (m, &v)| {
                let ang = -2.0 * PI * (m * k) as f64 / nfft as f64;
                (re + v * ang.cos(), im + v * ang.sin())
            });
            re.hypot(im)
        })
        .collect();
    let vhat: Vec<f64> = mags.iter().map(|m| m / mags[0]).collect();
    let df = rate / nfft as f64;
    let freqs: Vec<f64> = (0..=half).map(|k| k as f64 * df).collect();

    let last = (0..=half).filter(|&k| vhat[k] >= threshold).max().unwrap();
    let crossing = if last == half {
        freqs[half]
    } else {
        let (a, b) = (vhat[last], vhat[last + 1]);
        freqs[last] + (a - threshold) / (a - b) * df
    };
    let fc = (omega_c_max / (2.0 * PI)).min(crossing);

    let mut pts: Vec<(f64, f64)> = (0..=half).filter(|&k| freqs[k] < fc).map(|k| (freqs[k], vhat[k])).collect();
    let j = pts.len() - 1;
    let end = if j < half {
        let t = (fc - freqs[j]) / df;
        vhat[j] + t * (vhat[j + 1] - vhat[j])
    } else {
        vhat[j]
    };
    if fc > pts[j].0 {
        pts.push((fc, end));
    }
    -pts.windows(2)
        .map(|w| (((w[1].0 - w[0].0) / fc).powi(2) + (w[1].1 - w[0].1).powi(2)).sqrt())
        .sum::<f64>()
}

/// Sampled Gaussian bell, σ = duration / 6, centred in the window.
pub fn gaussian_profile(duration: f64, rate: f64) -> Vec<f64> {
    let n = (duration * rate).floor() as usize + 1;
    let mu = (n - 1) as f64 / (2.0 * rate);
    let sigma = duration / 6.0;
    (0..n)
        .map(|i| {
            let t = i as f64 / rate;
            (-(t - mu).powi(2) / (2.0 * sigma * sigma)).exp()
        })
        .collect()
}

/// Mean and (normalized, non-negative-lag) auto-correlation by the
/// textbook double loop.
pub fn autocorr_oracle(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mean = x.iter().sum::<f64>() / n as f64;
    let d: Vec<f64> = x.iter().map(|v| v - mean).collect();
    let r: Vec<f64> = (0..n).map(|k| (0..n - k).map(|m| d[m] * d[m + k]).sum()).collect();
    r.iter().map(|v| v / r[0]).collect()
}

/// Simple deterministic generator so oracles stay independent of the
/// library's own RNG choices.
pub struct SplitMix(pub u64);

impl SplitMix {
    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    /// Uniform in [-1, 1).
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
    }

    pub fn vec(&mut self, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.uniform()).collect()
    }

    pub fn below(&mut self, n: usize) -> usize {
        (self.next_u64() % n as u64) as usize
    }
}
