//! C ABI over `rehab-core`.
//!
//! Every fallible function returns an [`RkStatus`]; on failure a message is
//! available from [`rk_last_error`] until the next call on the same thread.
//! Handles are opaque and must be released with their `_free` function.
//! Absent metrics are reported as NaN.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;
use std::sync::Arc;

use rehab_core::api::{json, ApiError, Engine};
use rehab_core::kinematics::{autocorr_score, compute_trial_metrics, sparc, SparcParams};
use rehab_core::signal::{autocorrelate, TimeSeries};
use rehab_core::store::{Store, StoreError, TrialRecord};
use rehab_core::trc::{parse_trc, Axis, JointId, MotionCapture};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RkStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidArgument = 3,
    Parse = 4,
    NotFound = 5,
    Schema = 6,
    Io = 7,
    Analysis = 8,
    BufferTooSmall = 9,
    Panic = 10,
}

/// SPARC parameters; `omega_c_max` in rad/s.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct RkSparcParams {
    pub omega_c_max: f64,
    pub amplitude_threshold: f64,
    pub pad_factor: usize,
}

impl From<RkSparcParams> for SparcParams {
    fn from(p: RkSparcParams) -> Self {
        SparcParams {
            omega_c_max: p.omega_c_max,
            amplitude_threshold: p.amplitude_threshold,
            pad_factor: p.pad_factor,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct RkTrialMetrics {
    pub duration_s: f64,
    pub analysis_start_s: f64,
    pub mean_speed_mps: f64,
    pub smoothness: f64,
    pub autocorr_score: f64,
    pub n_cycles: usize,
    pub n_submovements: usize,
    pub skipped_submovements: usize,
}

/// Parsed motion capture.
pub struct RkCapture {
    inner: MotionCapture,
}

/// Read-only view of a session store.
pub struct RkStore {
    engine: Engine,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl std::fmt::Display) {
    let text = CString::new(msg.to_string().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = text);
}

type FfiResult<T> = Result<T, (RkStatus, String)>;

fn guard(f: impl FnOnce() -> FfiResult<()>) -> RkStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            RkStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            RkStatus::Panic
        }
    }
}

fn null() -> (RkStatus, String) {
    (RkStatus::NullPointer, "null pointer argument".into())
}

unsafe fn str_arg<'a>(p: *const c_char) -> FfiResult<&'a str> {
    if p.is_null() {
        return Err(null());
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| (RkStatus::InvalidUtf8, e.to_string()))
}

unsafe fn slice_arg<'a>(p: *const f64, n: usize) -> FfiResult<&'a [f64]> {
    if p.is_null() {
        return Err(null());
    }
    Ok(std::slice::from_raw_parts(p, n))
}

unsafe fn out_arg<'a, T>(p: *mut T) -> FfiResult<&'a mut T> {
    p.as_mut().ok_or_else(null)
}

unsafe fn params_arg(p: *const RkSparcParams) -> SparcParams {
    p.as_ref().map(|p| (*p).into()).unwrap_or_default()
}

fn series(samples: &[f64], rate: f64) -> FfiResult<TimeSeries> {
    TimeSeries::new(samples.to_vec(), rate, "m/s").map_err(|e| (RkStatus::InvalidArgument, e.to_string()))
}

fn store_status(e: &StoreError) -> RkStatus {
    match e {
        StoreError::SchemaViolation { .. } | StoreError::InvalidParams(_) | StoreError::DuplicateSessionId { .. } => {
            RkStatus::Schema
        }
        StoreError::MissingCapture { .. } | StoreError::InvalidCapture { .. } => RkStatus::Parse,
        StoreError::Io { .. } => RkStatus::Io,
        StoreError::NotFound { .. } => RkStatus::NotFound,
    }
}

fn api_status(e: ApiError) -> (RkStatus, String) {
    let status = match &e {
        ApiError::NotFound { .. } => RkStatus::NotFound,
        ApiError::Store(s) => store_status(s),
        ApiError::Analysis { .. } | ApiError::Aggregate(_) => RkStatus::Analysis,
    };
    (status, e.to_string())
}

/// Message for the last failed call on this thread; empty after success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn rk_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

#[no_mangle]
pub extern "C" fn rk_sparc_params_default() -> RkSparcParams {
    let d = SparcParams::default();
    RkSparcParams {
        omega_c_max: d.omega_c_max,
        amplitude_threshold: d.amplitude_threshold,
        pad_factor: d.pad_factor,
    }
}

/// Parse `.trc` text.
#[no_mangle]
pub unsafe extern "C" fn rk_capture_parse(text: *const c_char, out: *mut *mut RkCapture) -> RkStatus {
    guard(|| {
        let out = out_arg(out)?;
        *out = ptr::null_mut();
        let capture = parse_trc(str_arg(text)?).map_err(|e| (RkStatus::Parse, e.to_string()))?;
        *out = Box::into_raw(Box::new(RkCapture { inner: capture }));
        Ok(())
    })
}

/// Parse a `.trc` file.
#[no_mangle]
pub unsafe extern "C" fn rk_capture_parse_file(path: *const c_char, out: *mut *mut RkCapture) -> RkStatus {
    guard(|| {
        let path = str_arg(path)?;
        let text = std::fs::read_to_string(path).map_err(|e| (RkStatus::Io, format!("{path}: {e}")))?;
        let text = CString::new(text).map_err(|e| (RkStatus::Parse, e.to_string()))?;
        match rk_capture_parse(text.as_ptr(), out) {
            RkStatus::Ok => Ok(()),
            status => Err((status, LAST_ERROR.with(|e| e.borrow().to_string_lossy().into_owned()))),
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn rk_capture_free(capture: *mut RkCapture) {
    if !capture.is_null() {
        drop(Box::from_raw(capture));
    }
}

#[no_mangle]
pub unsafe extern "C" fn rk_capture_num_frames(capture: *const RkCapture) -> usize {
    capture.as_ref().map_or(0, |c| c.inner.time.len())
}

#[no_mangle]
pub unsafe extern "C" fn rk_capture_num_markers(capture: *const RkCapture) -> usize {
    capture.as_ref().map_or(0, |c| c.inner.markers.len())
}

#[no_mangle]
pub unsafe extern "C" fn rk_capture_rate(capture: *const RkCapture) -> f64 {
    capture.as_ref().map_or(f64::NAN, |c| c.inner.header.data_rate)
}

/// Copy one coordinate channel, in meters, into `buf`.
///
/// `axis` is 0, 1 or 2 for x, y, z. `*out_len` receives the channel length;
/// when it exceeds `len` nothing is copied and `BufferTooSmall` is returned,
/// so a call with `len = 0` queries the size.
#[no_mangle]
pub unsafe extern "C" fn rk_capture_channel(
    capture: *const RkCapture,
    joint: *const c_char,
    axis: u32,
    buf: *mut f64,
    len: usize,
    out_len: *mut usize,
) -> RkStatus {
    guard(|| {
        let capture = capture.as_ref().ok_or_else(null)?;
        let out_len = out_arg(out_len)?;
        let joint: JointId = str_arg(joint)?.parse().map_err(|e| (RkStatus::InvalidArgument, format!("{e}")))?;
        let axis = match axis {
            0 => Axis::X,
            1 => Axis::Y,
            2 => Axis::Z,
            _ => return Err((RkStatus::InvalidArgument, format!("axis {axis} is not 0, 1 or 2"))),
        };
        let channel = capture.inner.channel(&joint, axis).map_err(|e| (RkStatus::NotFound, e.to_string()))?;
        *out_len = channel.len();
        if channel.len() > len {
            return Err((RkStatus::BufferTooSmall, format!("channel has {} samples", channel.len())));
        }
        if buf.is_null() {
            return Err(null());
        }
        std::slice::from_raw_parts_mut(buf, channel.len()).copy_from_slice(channel.samples());
        Ok(())
    })
}

/// SPARC of a speed profile. `params` may be null for defaults.
#[no_mangle]
pub unsafe extern "C" fn rk_sparc(
    speed: *const f64,
    n: usize,
    rate: f64,
    params: *const RkSparcParams,
    out: *mut f64,
) -> RkStatus {
    guard(|| {
        let out = out_arg(out)?;
        let s = series(slice_arg(speed, n)?, rate)?;
        *out = sparc(&s, &params_arg(params)).map_err(|e| (RkStatus::Analysis, e.to_string()))?;
        Ok(())
    })
}

/// Mean absolute normalized auto-correlation over all lags.
#[no_mangle]
pub unsafe extern "C" fn rk_autocorr_score(samples: *const f64, n: usize, rate: f64, out: *mut f64) -> RkStatus {
    guard(|| {
        let out = out_arg(out)?;
        let s = series(slice_arg(samples, n)?, rate)?;
        let lags = autocorrelate(&s).map_err(|e| (RkStatus::Analysis, e.to_string()))?;
        *out = autocorr_score(&lags);
        Ok(())
    })
}

/// Run the trial pipeline on a capture. `joint` may be null for HandRight;
/// `params` may be null for defaults.
#[no_mangle]
pub unsafe extern "C" fn rk_analyze_capture(
    capture: *const RkCapture,
    tempo_bpm: f64,
    beat_offset_s: f64,
    joint: *const c_char,
    params: *const RkSparcParams,
    out: *mut RkTrialMetrics,
) -> RkStatus {
    guard(|| {
        let capture = capture.as_ref().ok_or_else(null)?;
        let out = out_arg(out)?;
        let primary_joint = if joint.is_null() {
            JointId::HandRight
        } else {
            str_arg(joint)?.parse().map_err(|e| (RkStatus::InvalidArgument, format!("{e}")))?
        };
        let record = TrialRecord {
            trial_id: "trial".into(),
            trc_path: PathBuf::new(),
            track_name: String::new(),
            tempo_bpm,
            beat_offset_s,
            upper_limit_m: 0.0,
            lower_limit_m: 0.0,
            score: 0.0,
            primary_joint,
            started_at: String::new(),
        };
        let analysis = compute_trial_metrics(&record, &capture.inner, &params_arg(params))
            .map_err(|e| (RkStatus::Analysis, e.to_string()))?;
        let m = analysis.metrics;
        *out = RkTrialMetrics {
            duration_s: m.duration_s,
            analysis_start_s: m.analysis_start_s.unwrap_or(f64::NAN),
            mean_speed_mps: m.mean_speed_mps.unwrap_or(f64::NAN),
            smoothness: m.smoothness.unwrap_or(f64::NAN),
            autocorr_score: m.autocorr_score.unwrap_or(f64::NAN),
            n_cycles: m.n_cycles,
            n_submovements: m.per_submovement_sparc.len(),
            skipped_submovements: m.skipped_submovements,
        };
        Ok(())
    })
}

/// Open a store directory for reading with default SPARC parameters.
#[no_mangle]
pub unsafe extern "C" fn rk_store_open(root: *const c_char, out: *mut *mut RkStore) -> RkStatus {
    guard(|| {
        let out = out_arg(out)?;
        *out = ptr::null_mut();
        let store = Store::open(str_arg(root)?).map_err(|e| (store_status(&e), e.to_string()))?;
        let engine = Engine::new(Arc::new(store), SparcParams::default())
            .map_err(|e| (RkStatus::InvalidArgument, e.to_string()))?;
        *out = Box::into_raw(Box::new(RkStore { engine }));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn rk_store_free(store: *mut RkStore) {
    if !store.is_null() {
        drop(Box::from_raw(store));
    }
}

unsafe fn json_out(
    store: *const RkStore,
    session_id: *const c_char,
    trial_id: *const c_char,
    out: *mut *mut c_char,
    f: impl FnOnce(&Engine, &str, &str) -> Result<String, ApiError>,
) -> RkStatus {
    guard(|| {
        let out = out_arg(out)?;
        *out = ptr::null_mut();
        let store = store.as_ref().ok_or_else(null)?;
        let text = f(&store.engine, str_arg(session_id)?, str_arg(trial_id)?).map_err(api_status)?;
        *out = CString::new(text).expect("JSON has no NUL").into_raw();
        Ok(())
    })
}

/// Trial metrics as JSON, identical to the HTTP `/metrics` body. Release
/// with [`rk_string_free`].
#[no_mangle]
pub unsafe extern "C" fn rk_store_trial_metrics_json(
    store: *const RkStore,
    session_id: *const c_char,
    trial_id: *const c_char,
    out: *mut *mut c_char,
) -> RkStatus {
    json_out(store, session_id, trial_id, out, |e, s, t| e.trial_metrics_json(s, t))
}

/// All chart payloads of a trial as a JSON array. Release with
/// [`rk_string_free`].
#[no_mangle]
pub unsafe extern "C" fn rk_store_trial_charts_json(
    store: *const RkStore,
    session_id: *const c_char,
    trial_id: *const c_char,
    out: *mut *mut c_char,
) -> RkStatus {
    json_out(store, session_id, trial_id, out, |e, s, t| {
        e.trial_charts(s, t).map(|c| json::to_string(&c))
    })
}

#[no_mangle]
pub unsafe extern "C" fn rk_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
