//! The `rehab` command line.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};

use crate::api::{json, ApiError, ChartPayload, Engine, ServeOptions};
use crate::kinematics::SparcParams;
use crate::store::{synth_session, IngestOptions, Store, StoreError, SynthParams};

/// Environment variable naming the store directory. When set it takes
/// precedence over `--store`.
pub const STORE_ENV: &str = "MOMU_STORE";
const DEFAULT_STORE: &str = "store";

pub mod exit {
    pub const OK: u8 = 0;
    pub const FAILURE: u8 = 1;
    pub const SCHEMA: u8 = 2;
    pub const CAPTURE: u8 = 3;
    pub const IO: u8 = 4;
    pub const NOT_FOUND: u8 = 5;
}

#[derive(Debug, Parser)]
#[command(name = "rehab", version, about = "Kinematic analytics for music-cued rehabilitation trials")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate a session manifest and its captures and commit them to the store.
    Ingest {
        manifest: PathBuf,
        #[arg(long)]
        store: Option<PathBuf>,
        /// Ignore unknown manifest fields.
        #[arg(long)]
        lenient: bool,
    },
    /// Compute metrics and charts.
    Analyze {
        #[command(subcommand)]
        target: AnalyzeTarget,
    },
    /// Write a synthetic session (manifest plus captures).
    Synth(SynthArgs),
    /// Serve the JSON API.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        addr: String,
        #[arg(long)]
        store: Option<PathBuf>,
        /// Origin allowed to make cross-site requests.
        #[arg(long)]
        cors_origin: Option<String>,
        #[command(flatten)]
        sparc: SparcArgs,
    },
}

#[derive(Debug, Subcommand)]
pub enum AnalyzeTarget {
    Trial {
        session_id: String,
        trial_id: String,
        #[arg(long, conflicts_with = "csv")]
        json: bool,
        #[arg(long)]
        csv: bool,
        #[arg(long)]
        store: Option<PathBuf>,
        #[command(flatten)]
        sparc: SparcArgs,
    },
}

#[derive(Debug, Clone, Args)]
pub struct SparcArgs {
    /// Upper bound of the adaptive SPARC cutoff, in Hz.
    #[arg(long, value_name = "HZ", default_value_t = 10.0)]
    pub sparc_omega_max: f64,
    /// Normalized amplitude threshold for the SPARC cutoff.
    #[arg(long, value_name = "V", default_value_t = 0.05)]
    pub sparc_threshold: f64,
    /// Zero-padding factor for the SPARC spectrum.
    #[arg(long, value_name = "N", default_value_t = 4)]
    pub pad_factor: usize,
}

impl SparcArgs {
    pub fn params(&self) -> SparcParams {
        SparcParams {
            omega_c_max: 2.0 * std::f64::consts::PI * self.sparc_omega_max,
            amplitude_threshold: self.sparc_threshold,
            pad_factor: self.pad_factor,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 100.0)]
    pub tempo: f64,
    #[arg(long, default_value_t = 18.0)]
    pub duration: f64,
    /// Standard deviation of vertical hand noise, meters.
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    /// Peak shoulder elevation, meters.
    #[arg(long, default_value_t = 0.0)]
    pub drift: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 30.0)]
    pub rate: f64,
    #[arg(long, default_value_t = 0.0)]
    pub beat_offset: f64,
    #[arg(long, default_value_t = 1)]
    pub trials: usize,
    #[arg(long, default_value = "synth")]
    pub out: PathBuf,
    #[arg(long, default_value = "P001")]
    pub patient: String,
    #[arg(long, default_value = "S001")]
    pub session: String,
    #[arg(long, default_value = "2024-01-01T10:00:00Z")]
    pub started_at: String,
}

/// `MOMU_STORE` if set and non-empty, then `--store`, then `./store`.
pub fn resolve_store(flag: Option<PathBuf>) -> PathBuf {
    std::env::var_os(STORE_ENV)
        .filter(|v| !v.is_empty())
        .map(PathBuf::from)
        .or(flag)
        .unwrap_or_else(|| PathBuf::from(DEFAULT_STORE))
}

pub fn store_exit_code(e: &StoreError) -> u8 {
    match e {
        StoreError::SchemaViolation { .. }
        | StoreError::InvalidParams(_)
        | StoreError::DuplicateSessionId { .. } => exit::SCHEMA,
        StoreError::MissingCapture { .. } | StoreError::InvalidCapture { .. } => exit::CAPTURE,
        StoreError::Io { .. } => exit::IO,
        StoreError::NotFound { .. } => exit::NOT_FOUND,
    }
}

pub fn api_exit_code(e: &ApiError) -> u8 {
    match e {
        ApiError::NotFound { .. } => exit::NOT_FOUND,
        ApiError::Store(s) => store_exit_code(s),
        ApiError::Analysis { .. } => exit::CAPTURE,
        ApiError::Aggregate(_) => exit::FAILURE,
    }
}

/// Execute `cli`, writing results to `out` and diagnostics to `err`.
/// Returns the process exit code.
pub fn run(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> u8 {
    let result = match cli.command {
        Command::Ingest { manifest, store, lenient } => ingest(&manifest, resolve_store(store), lenient, out),
        Command::Analyze {
            target:
                AnalyzeTarget::Trial {
                    session_id,
                    trial_id,
                    csv,
                    store,
                    sparc,
                    ..
                },
        } => analyze(resolve_store(store), &sparc, &session_id, &trial_id, csv, out),
        Command::Synth(args) => synth(&args, out),
        Command::Serve {
            addr,
            store,
            cors_origin,
            sparc,
        } => serve(&addr, resolve_store(store), cors_origin, &sparc, err),
    };
    match result {
        Ok(()) => exit::OK,
        Err((code, msg)) => {
            let _ = writeln!(err, "error: {msg}");
            code
        }
    }
}

type CmdResult = Result<(), (u8, String)>;

fn store_err(e: StoreError) -> (u8, String) {
    (store_exit_code(&e), e.to_string())
}

fn api_err(e: ApiError) -> (u8, String) {
    (api_exit_code(&e), e.to_string())
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> (u8, String) + '_ {
    move |e| (exit::IO, format!("{}: {e}", path.display()))
}

fn ingest(manifest: &Path, store: PathBuf, lenient: bool, out: &mut dyn Write) -> CmdResult {
    let text = std::fs::read_to_string(manifest).map_err(io_err(manifest))?;
    let base = manifest.parent().unwrap_or(Path::new("."));
    let store = Store::open(store).map_err(store_err)?;
    let session = store
        .ingest_session(&text, base, IngestOptions { lenient })
        .map_err(store_err)?;
    writeln!(out, "{}", session.session_id).map_err(io_err(Path::new("stdout")))
}

fn engine(store: PathBuf, sparc: &SparcArgs) -> Result<Engine, (u8, String)> {
    let store = Store::open(store).map_err(store_err)?;
    Engine::new(Arc::new(store), sparc.params()).map_err(|e| (exit::SCHEMA, e.to_string()))
}

fn analyze(store: PathBuf, sparc: &SparcArgs, sid: &str, tid: &str, csv: bool, out: &mut dyn Write) -> CmdResult {
    let engine = engine(store, sparc)?;
    let metrics = engine.trial_metrics_json(sid, tid).map_err(api_err)?;
    let charts = engine.trial_charts(sid, tid).map_err(api_err)?;
    let text = if csv {
        charts_csv(&charts)
    } else {
        format!("{{\"metrics\":{metrics},\"charts\":{}}}\n", json::to_string(&charts))
    };
    out.write_all(text.as_bytes()).map_err(io_err(Path::new("stdout")))
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn csv_number(v: Option<f64>) -> String {
    v.and_then(json::round_sig).map(|v| v.to_string()).unwrap_or_default()
}

/// Long format: one row per (chart, series, sample).
pub fn charts_csv(charts: &[ChartPayload]) -> String {
    let mut s = String::from("kind,series,unit,x,x_unit,label,value\n");
    for c in charts {
        for series in &c.series {
            for (i, v) in series.values.iter().enumerate() {
                let label = c.labels.as_ref().map(|l| l[i].as_str()).unwrap_or("");
                s.push_str(&format!(
                    "{},{},{},{},{},{},{}\n",
                    c.kind.as_str(),
                    csv_field(&series.name),
                    csv_field(&series.unit),
                    csv_number(Some(c.x[i])),
                    csv_field(&c.x_unit),
                    csv_field(label),
                    csv_number(*v),
                ));
            }
        }
    }
    s
}

fn synth(a: &SynthArgs, out: &mut dyn Write) -> CmdResult {
    let params = SynthParams {
        tempo_bpm: a.tempo,
        duration_s: a.duration,
        rate_hz: a.rate,
        beat_offset_s: a.beat_offset,
        noise_sigma: a.noise,
        shoulder_drift_m: a.drift,
        seed: a.seed,
        ..SynthParams::default()
    };
    let session = synth_session(&params, a.trials, &a.patient, &a.session, &a.started_at).map_err(store_err)?;
    let path = session.write_to(&a.out).map_err(store_err)?;
    writeln!(out, "{}", path.display()).map_err(io_err(Path::new("stdout")))
}

fn serve(addr: &str, store: PathBuf, cors_origin: Option<String>, sparc: &SparcArgs, err: &mut dyn Write) -> CmdResult {
    let engine = Arc::new(engine(store, sparc)?);
    let runtime = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(|e| (exit::FAILURE, e.to_string()))?;
    runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind(addr)
            .await
            .map_err(|e| (exit::IO, format!("cannot bind {addr}: {e}")))?;
        let local = listener.local_addr().map_err(|e| (exit::IO, e.to_string()))?;
        let _ = writeln!(err, "listening on http://{local}");
        let _ = err.flush();
        let shutdown = async {
            let _ = tokio::signal::ctrl_c().await;
        };
        crate::api::serve(listener, engine, ServeOptions { cors_origin }, shutdown)
            .await
            .map_err(|e| (exit::IO, e.to_string()))
    })
}
