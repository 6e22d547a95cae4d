//! One PASS/FAIL line per acceptance criterion. Run with
//! `cargo test -p rehab-core --test acceptance -- --nocapture`.

mod common;
mod support;

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use common::*;
use rehab_core::kinematics::*;
use rehab_core::signal::*;
use rehab_core::store::{synth_trial, SynthParams};
use rehab_core::trc::{parse_trc, write_trc, Axis, JointId};
use support::*;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn analyse(p: &SynthParams, params: &SparcParams) -> TrialAnalysis {
    let (capture, record) = synth_trial(p).unwrap();
    compute_trial_metrics(&record, &capture, params).unwrap()
}

fn dft_oracle() -> Check {
    let mut rng = SplitMix(1001);
    let mut worst = 0.0f64;
    let mut worst_dc = 0.0f64;
    for k in 0..50 {
        let n = [16, 100, 257, 1024, 4096][k % 5];
        let x = rng.vec(n);
        let fast = dft(&x).map_err(|e| e.to_string())?;
        let slow = naive_dft(&x);
        let scale = slow.iter().map(|(r, i)| r.hypot(*i)).fold(f64::MIN_POSITIVE, f64::max);
        for (c, (re, im)) in fast.iter().zip(&slow) {
            worst = worst.max((c.re - re).hypot(c.im - im) / scale);
        }
        let sum: f64 = x.iter().sum();
        worst_dc = worst_dc.max((fast[0].re - sum).abs()).max(fast[0].im.abs());
    }
    ensure(worst < 1e-9, format!("max relative error {worst:e}"))?;
    ensure(worst_dc < 1e-12, format!("A0 differs from the sum by {worst_dc:e}"))?;
    Ok(format!("max relative error {worst:.1e}, A0 error {worst_dc:.1e}"))
}

fn amplitude_recovery() -> Check {
    let (n, rate, bin) = (300, 30.0, 25);
    let x: Vec<f64> = (0..n).map(|i| 0.3 * (2.0 * PI * bin as f64 * i as f64 / n as f64).sin()).collect();
    let spec = amplitude_spectrum(&ts(x, rate)).map_err(|e| e.to_string())?;
    let peak = spec.peak_bin().ok_or("no peak")?;
    ensure(peak == bin, format!("peak at bin {peak}, expected {bin}"))?;
    let err = (spec.amplitudes[bin] - 0.3).abs();
    ensure(err < 1e-6, format!("peak amplitude off by {err:e}"))?;
    let dc = amplitude_spectrum(&ts(vec![0.7; 64], rate)).map_err(|e| e.to_string())?;
    let dc_err = (dc.amplitudes[0] - 0.7).abs();
    ensure(dc_err < 1e-12, format!("DC amplitude {} (expected 0.7)", dc.amplitudes[0]))?;
    ensure(dc.amplitudes[1..].iter().all(|a| a.abs() < 1e-12), "energy outside DC")?;
    Ok(format!("peak error {err:.1e}, DC not doubled"))
}

fn velocity_correctness() -> Check {
    let (slope, rate) = (0.125, 30.0);
    let ramp: Vec<f64> = (0..50).map(|i| slope * i as f64).collect();
    let v = velocity(&ts(ramp, rate)).map_err(|e| e.to_string())?;
    ensure(v.samples().iter().all(|&x| x == slope * rate), "ramp velocity not exactly s*r")?;
    let mut worst = 0.0f64;
    for f in [0.1, 0.25, 0.5, 0.75, 1.0] {
        let amp = 0.25;
        let x: Vec<f64> = (0..900).map(|i| amp * (2.0 * PI * f * i as f64 / rate).sin()).collect();
        let v = velocity(&ts(x, rate)).map_err(|e| e.to_string())?;
        let inner = &v.samples()[1..v.len() - 1];
        let peak = inner.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let want = 2.0 * PI * f * amp;
        worst = worst.max((peak - want).abs() / want);
    }
    ensure(worst < 0.01, format!("sinusoid amplitude off by {:.2}%", worst * 100.0))?;
    Ok(format!("ramp exact, sinusoid within {:.3}%", worst * 100.0))
}

fn smoothing() -> Check {
    let mut rng = SplitMix(1004);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let n = 1 + rng.below(300);
        let x: Vec<f64> = rng.vec(n).into_iter().map(|v| 10.0 * v).collect();
        let window = if n >= 5 { 5 } else if n % 2 == 1 { n } else { n - 1 };
        let got = smooth_ma(&ts(x.clone(), 30.0), window).map_err(|e| e.to_string())?;
        for (a, b) in got.samples().iter().zip(brute_smooth(&x, window)) {
            worst = worst.max((a - b).abs());
        }
    }
    ensure(worst < 1e-12, format!("max abs diff {worst:e}"))?;
    Ok(format!("max abs diff {worst:.1e}"))
}

fn peak_finding() -> Check {
    let mut checked = 0usize;
    for n in 0..=12 {
        for x in all_sequences(n, &[0.0, 1.0, 2.0]) {
            let s = (!x.is_empty()).then(|| ts(x.clone(), 1.0));
            // every other height or distance behaves like one of these
            for min_height in [0.0, 1.0, 2.0, 3.0] {
                for min_distance in 1..=n.max(1) {
                    let got = s.as_ref().map(|s| find_peaks(s, min_height, min_distance)).unwrap_or_default();
                    let want = peaks_oracle(&x, min_height, min_distance);
                    if got != want {
                        return Err(format!("x={x:?} h={min_height} d={min_distance}: {got:?} vs {want:?}"));
                    }
                    checked += 1;
                }
            }
        }
    }
    Ok(format!("{checked} cases identical"))
}

fn segmentation() -> Check {
    let p = SynthParams::default();
    let (capture, record) = synth_trial(&p).unwrap();
    let raw = capture.channel(&JointId::HandRight, Axis::Y).map_err(|e| e.to_string())?;
    let y = smooth_ma(&raw, 5).map_err(|e| e.to_string())?;
    let grid = build_beat_grid(p.tempo_bpm, p.beat_offset_s, capture.duration_s()).map_err(|e| e.to_string())?;
    let window = analysis_window(&y, &grid).map_err(|e| e.to_string())?;
    let start = y.len() - window.len();
    ensure(start == 72, format!("window starts at sample {start}"))?;
    let seg = segment_cycles(&window, &grid).map_err(|e| e.to_string())?;
    // apexes of cos(2 pi t / 1.2 s) at 30 Hz fall on every 36th sample
    let apexes: Vec<usize> = (1..).map(|k| 36 * k).take_while(|&i| i < y.len() - 1).filter(|&i| i > start).collect();
    ensure(seg.peak_indices.len() == apexes.len(), format!("{} peaks vs {} apexes", seg.peak_indices.len(), apexes.len()))?;
    for (got, want) in seg.peak_indices.iter().zip(&apexes) {
        ensure((got + start).abs_diff(*want) <= 1, format!("peak at {} vs apex {want}", got + start))?;
    }
    let n = compute_trial_metrics(&record, &capture, &SparcParams::default()).map_err(|e| e.to_string())?.metrics.n_cycles;
    ensure(n.abs_diff(12) <= 1, format!("n_cycles {n}"))?;
    Ok(format!("{} peaks on apexes, n_cycles {n}, window start 72", apexes.len()))
}

fn sparc_properties() -> Check {
    let params = SparcParams::default();
    let mut failures = Vec::new();

    let mut rng = SplitMix(1007);
    let mut scale_err = 0.0f64;
    for _ in 0..50 {
        let n = 4 + rng.below(80);
        let v: Vec<f64> = rng.vec(n).into_iter().map(|x| x.abs() + 1e-3).collect();
        let c = 10f64.powf(3.0 * rng.uniform());
        let a = sparc(&ts(v.clone(), 30.0), &params).map_err(|e| e.to_string())?;
        let b = sparc(&ts(v.iter().map(|x| c * x).collect(), 30.0), &params).map_err(|e| e.to_string())?;
        scale_err = scale_err.max((a - b).abs());
    }
    if scale_err >= 1e-9 {
        failures.push(format!("scale invariance {scale_err:e}"));
    }

    let mut rng = SplitMix(5);
    let mut ripple_wins = 0;
    for _ in 0..20 {
        let duration = 0.6 + 0.6 * (rng.uniform() + 1.0) / 2.0;
        let phase = PI * rng.uniform();
        let clean = gaussian_profile(duration, 30.0);
        let rippled: Vec<f64> = clean
            .iter()
            .enumerate()
            .map(|(i, v)| (v + 0.1 * (2.0 * PI * 5.0 * i as f64 / 30.0 + phase).sin()).abs())
            .collect();
        let a = sparc(&ts(clean, 30.0), &params).map_err(|e| e.to_string())?;
        let b = sparc(&ts(rippled, 30.0), &params).map_err(|e| e.to_string())?;
        ripple_wins += usize::from(b < a);
    }
    if ripple_wins != 20 {
        failures.push(format!("ripple more negative in {ripple_wins}/20"));
    }

    // every submovement of clean and noisy synthetic trials
    let fine = SparcParams { pad_factor: 8, ..params };
    let mut pad_diff = 0.0f64;
    let mut scored = 0;
    for seed in 0..4 {
        for noise in [0.0, 0.01, 0.05] {
            let p = SynthParams { seed, noise_sigma: noise, ..SynthParams::default() };
            let a = analyse(&p, &params).metrics;
            let b = analyse(&p, &fine).metrics;
            for (x, y) in a.per_submovement_sparc.iter().zip(&b.per_submovement_sparc) {
                pad_diff = pad_diff.max((x - y).abs());
                scored += 1;
            }
        }
    }
    let g = gaussian_profile(0.75, 30.0);
    let gauss_diff = (sparc(&ts(g.clone(), 30.0), &params).unwrap() - sparc(&ts(g.clone(), 30.0), &fine).unwrap()).abs();
    if pad_diff >= 1e-3 {
        failures.push(format!(
            "pad 4->8 changes synthetic submovement SPARC by up to {pad_diff:.3e} over {scored} submovements (Gaussian profile: {gauss_diff:.1e})"
        ));
    }

    let golden = sparc(&ts(g, 30.0), &params).map_err(|e| e.to_string())?;
    let golden_err = (golden - GAUSSIAN_SPARC_GOLDEN).abs();
    if golden_err >= 1e-6 {
        failures.push(format!("golden value off by {golden_err:e}"));
    }

    let summary = format!(
        "scale {scale_err:.1e}, ripple {ripple_wins}/20, pad 4->8 {pad_diff:.1e}, golden {golden_err:.1e}"
    );
    if failures.is_empty() {
        Ok(summary)
    } else {
        Err(format!("{}; {summary}", failures.join("; ")))
    }
}

fn autocorrelation() -> Check {
    let r = autocorrelate(&ts(vec![1.0, 2.0, 3.0], 1.0)).map_err(|e| e.to_string())?;
    ensure(r.values == [1.0, 0.0, -0.5], format!("[1,2,3] gave {:?}", r.values))?;

    let x: Vec<f64> = (0..468).map(|i| (2.0 * PI * i as f64 / 36.0).cos()).collect();
    let periodic = autocorr_score(&autocorrelate(&ts(x.clone(), 30.0)).unwrap());
    let mut wins = 0;
    for seed in 0..20 {
        let mut rng = SplitMix(seed);
        let mut y = x.clone();
        for i in (1..y.len()).rev() {
            y.swap(i, rng.below(i + 1));
        }
        wins += usize::from(periodic > autocorr_score(&autocorrelate(&ts(y, 30.0)).unwrap()));
    }
    ensure(wins == 20, format!("periodic beat shuffled in {wins}/20"))?;

    let mut rng = SplitMix(1008);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let n = 10 + rng.below(300);
        let x = rng.vec(n);
        let (offset, scale) = (100.0 * rng.uniform(), 10f64.powf(3.0 * rng.uniform()));
        let a = autocorrelate(&ts(x.clone(), 30.0)).unwrap();
        let b = autocorrelate(&ts(x.iter().map(|v| scale * v + offset).collect(), 30.0)).unwrap();
        for (p, q) in a.values.iter().zip(&b.values) {
            worst = worst.max((p - q).abs());
        }
    }
    ensure(worst < 1e-9, format!("offset/scale changes lags by {worst:e}"))?;
    Ok(format!("example exact, periodic {wins}/20, invariance {worst:.1e}"))
}

fn noise_monotonicity() -> Check {
    let p = SynthParams::default();
    let sigma = 0.2 * p.half_span_m();
    let params = SparcParams::default();
    let (mut periodic, mut smooth) = (0, 0);
    for seed in 0..20 {
        let clean = analyse(&SynthParams { seed, ..p.clone() }, &params).metrics;
        let noisy = analyse(&SynthParams { seed, noise_sigma: sigma, ..p.clone() }, &params).metrics;
        let lower = |a: Option<f64>, b: Option<f64>| matches!((a, b), (Some(a), Some(b)) if b < a);
        periodic += usize::from(lower(clean.autocorr_score, noisy.autocorr_score));
        smooth += usize::from(lower(clean.smoothness, noisy.smoothness));
    }
    ensure(periodic >= 19 && smooth >= 19, format!("autocorr lower in {periodic}/20, smoothness lower in {smooth}/20"))?;
    Ok(format!("sigma {sigma} m: autocorr lower {periodic}/20, smoothness lower {smooth}/20"))
}

fn end_to_end() -> Check {
    let began = Instant::now();
    let tmp = tempfile::TempDir::new().unwrap();
    let dir = tmp.path();
    for (out, session, started, noise) in [("a", "S001", "2024-03-04T09:00:00Z", "0.0"), ("b", "S002", "2024-03-12T09:30:00+01:00", "0.03")] {
        let o = rehab(
            &["synth", "--out", out, "--trials", "4", "--session", session, "--started-at", started, "--noise", noise, "--seed", "7"],
            dir,
        );
        ensure(code(&o) == 0, format!("synth: {}", stderr(&o)))?;
        let o = rehab(&["ingest", &format!("{out}/manifest.json"), "--store", "st"], dir);
        ensure(code(&o) == 0, format!("ingest: {}", stderr(&o)))?;
    }

    let raw = std::fs::read_to_string(dir.join("a/trial1.trc")).map_err(|e| e.to_string())?;
    let once = write_trc(&parse_trc(&raw).map_err(|e| e.to_string())?);
    let twice = write_trc(&parse_trc(&once).map_err(|e| e.to_string())?);
    ensure(once == twice, ".trc not byte-stable after one normalization")?;

    let server = Server::start(&dir.join("st"), &[]);
    let patient = server.get("/api/patients/P001").json();
    let mut total = 0.0;
    let mut worst = 0.0f64;
    for s in patient["sessions"].as_array().ok_or("no sessions")? {
        let sid = s["session_id"].as_str().unwrap();
        let session = server.get(&format!("/api/sessions/{sid}")).json();
        let mut metrics = Vec::new();
        for row in session["rows"].as_array().unwrap() {
            let tid = row["trial_id"].as_str().unwrap();
            let m = server.get(&format!("/api/sessions/{sid}/trials/{tid}/metrics")).json();
            total += m["duration_s"].as_f64().unwrap();
            metrics.push(m);
        }
        for key in ["mean_speed_mps", "smoothness", "autocorr_score"] {
            let present: Vec<f64> = metrics.iter().filter_map(|m| m[key].as_f64()).collect();
            let mean = present.iter().sum::<f64>() / present.len() as f64;
            worst = worst.max((session[key].as_f64().unwrap() - mean).abs());
        }
        let charts = server.get(&format!("/api/sessions/{sid}/trials/trial1/charts")).json();
        ensure(charts.as_array().map(Vec::len) == Some(6), "trial charts incomplete")?;
    }
    let reported = patient["total_exercise_time_s"].as_f64().unwrap();
    ensure((reported - total).abs() < 1e-6, format!("total time {reported} vs sum {total}"))?;
    ensure(worst < 1e-6, format!("session mean differs by {worst:e}"))?;
    ensure(patient["n_sessions"] == 2, "expected two sessions")?;
    drop(server);

    let elapsed = began.elapsed().as_secs_f64();
    ensure(elapsed < 10.0, format!("pipeline took {elapsed:.1} s"))?;
    Ok(format!("roll-ups within {worst:.1e}, .trc stable, {elapsed:.2} s"))
}

#[test]
fn acceptance() {
    let criteria: [Criterion; 10] = [
        ("DFT oracle equivalence", dft_oracle),
        ("amplitude recovery", amplitude_recovery),
        ("velocity correctness", velocity_correctness),
        ("smoothing", smoothing),
        ("peak finding", peak_finding),
        ("segmentation ground truth", segmentation),
        ("SPARC properties", sparc_properties),
        ("auto-correlation", autocorrelation),
        ("noise monotonicity", noise_monotonicity),
        ("end-to-end", end_to_end),
    ];
    let mut failed = Vec::new();
    for (i, (name, run)) in criteria.iter().enumerate() {
        let started = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|_| Err("panicked".into()));
        let secs = started.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} ({secs:.1} s)", i + 1),
            Err(detail) => {
                println!("FAIL {:>2} {name}: {detail} ({secs:.1} s)", i + 1);
                failed.push(i + 1);
            }
        }
    }
    assert!(failed.is_empty(), "failing criteria: {failed:?}");
}
