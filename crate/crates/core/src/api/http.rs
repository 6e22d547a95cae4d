use std::collections::HashMap;
use std::sync::Arc;

use axum::extract::{Path, Query, Request, State};
use axum::http::{header, HeaderMap, HeaderValue, Method, StatusCode, Uri};
use axum::middleware::{self, Next};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::Router;
use serde::Serialize;
use serde_json::json;
use sha2::{Digest, Sha256};
use tokio::net::TcpListener;

use super::{json, ApiError, Engine};
use crate::aggregate::Granularity;

#[derive(Debug, Clone, Default)]
pub struct ServeOptions {
    /// Origin allowed to call the API cross-site; `None` keeps the browser
    /// same-origin default.
    pub cors_origin: Option<String>,
}

type Shared = Arc<Engine>;

fn json_response(status: StatusCode, body: String, headers: &HeaderMap) -> Response {
    let etag = format!("\"{}\"", hex::encode(Sha256::digest(body.as_bytes())));
    let matches = headers
        .get(header::IF_NONE_MATCH)
        .and_then(|v| v.to_str().ok())
        .is_some_and(|v| v.split(',').any(|t| t.trim() == etag || t.trim() == "*"));
    let etag_header = (header::ETAG, HeaderValue::from_str(&etag).expect("hex etag"));
    if status == StatusCode::OK && matches {
        return (StatusCode::NOT_MODIFIED, [etag_header]).into_response();
    }
    (
        status,
        [
            (header::CONTENT_TYPE, HeaderValue::from_static("application/json")),
            etag_header,
        ],
        body,
    )
        .into_response()
}

fn error_response(status: StatusCode, error: &str, id: &str) -> Response {
    let body = json!({ "error": error, "id": id }).to_string();
    json_response(status, body, &HeaderMap::new())
}

fn api_error(e: ApiError) -> Response {
    match &e {
        ApiError::NotFound { id, .. } => error_response(StatusCode::NOT_FOUND, &e.to_string(), id),
        _ => error_response(StatusCode::INTERNAL_SERVER_ERROR, &e.to_string(), ""),
    }
}

/// Run `f` on the blocking pool and render its result.
async fn respond<T, F>(engine: Shared, headers: HeaderMap, f: F) -> Response
where
    T: Serialize + Send + 'static,
    F: FnOnce(&Engine) -> Result<T, ApiError> + Send + 'static,
{
    let out = tokio::task::spawn_blocking(move || f(&engine).map(|v| json::to_string(&v))).await;
    match out {
        Ok(Ok(body)) => json_response(StatusCode::OK, body, &headers),
        Ok(Err(e)) => api_error(e),
        Err(e) => error_response(StatusCode::INTERNAL_SERVER_ERROR, &e.to_string(), ""),
    }
}

async fn patients(State(engine): State<Shared>, headers: HeaderMap) -> Response {
    respond(engine, headers, |e| e.patients()).await
}

async fn patient(State(engine): State<Shared>, Path(id): Path<String>, headers: HeaderMap) -> Response {
    respond(engine, headers, move |e| e.patient_summary(&id)).await
}

async fn engagement(
    State(engine): State<Shared>,
    Path(id): Path<String>,
    Query(query): Query<HashMap<String, String>>,
    headers: HeaderMap,
) -> Response {
    let granularity = match query.get("granularity").map(|g| g.parse::<Granularity>()) {
        None => Granularity::Week,
        Some(Ok(g)) => g,
        Some(Err(msg)) => return error_response(StatusCode::UNPROCESSABLE_ENTITY, &msg, "granularity"),
    };
    respond(engine, headers, move |e| e.engagement(&id, granularity)).await
}

async fn session(State(engine): State<Shared>, Path(id): Path<String>, headers: HeaderMap) -> Response {
    respond(engine, headers, move |e| e.session_summary(&id)).await
}

async fn trial_metrics(
    State(engine): State<Shared>,
    Path((sid, tid)): Path<(String, String)>,
    headers: HeaderMap,
) -> Response {
    let out = tokio::task::spawn_blocking(move || engine.trial_metrics_json(&sid, &tid)).await;
    match out {
        Ok(Ok(body)) => json_response(StatusCode::OK, body, &headers),
        Ok(Err(e)) => api_error(e),
        Err(e) => error_response(StatusCode::INTERNAL_SERVER_ERROR, &e.to_string(), ""),
    }
}

async fn trial_charts(
    State(engine): State<Shared>,
    Path((sid, tid)): Path<(String, String)>,
    headers: HeaderMap,
) -> Response {
    respond(engine, headers, move |e| e.trial_charts(&sid, &tid)).await
}

async fn fallback(uri: Uri) -> Response {
    error_response(StatusCode::NOT_FOUND, "no such route", uri.path())
}

async fn cors(origin: Arc<Option<HeaderValue>>, req: Request, next: Next) -> Response {
    let Some(origin) = origin.as_ref().clone() else {
        return next.run(req).await;
    };
    let mut resp = if req.method() == Method::OPTIONS {
        let mut r = StatusCode::NO_CONTENT.into_response();
        let h = r.headers_mut();
        h.insert(header::ACCESS_CONTROL_ALLOW_METHODS, HeaderValue::from_static("GET, OPTIONS"));
        h.insert(header::ACCESS_CONTROL_ALLOW_HEADERS, HeaderValue::from_static("if-none-match"));
        r
    } else {
        next.run(req).await
    };
    let h = resp.headers_mut();
    h.insert(header::ACCESS_CONTROL_ALLOW_ORIGIN, origin);
    h.insert(header::ACCESS_CONTROL_EXPOSE_HEADERS, HeaderValue::from_static("etag"));
    h.insert(header::VARY, HeaderValue::from_static("origin"));
    resp
}

/// Read-only JSON routes over `engine`.
pub fn router(engine: Arc<Engine>, opts: &ServeOptions) -> Router {
    let origin = Arc::new(
        opts.cors_origin
            .as_deref()
            .and_then(|o| HeaderValue::from_str(o).ok()),
    );
    Router::new()
        .route("/api/patients", get(patients))
        .route("/api/patients/{id}", get(patient))
        .route("/api/patients/{id}/engagement", get(engagement))
        .route("/api/sessions/{id}", get(session))
        .route("/api/sessions/{id}/trials/{tid}/metrics", get(trial_metrics))
        .route("/api/sessions/{id}/trials/{tid}/charts", get(trial_charts))
        .fallback(fallback)
        .layer(middleware::from_fn(move |req, next| cors(origin.clone(), req, next)))
        .with_state(engine)
}

/// Serve until `shutdown` resolves.
pub async fn serve(
    listener: TcpListener,
    engine: Arc<Engine>,
    opts: ServeOptions,
    shutdown: impl std::future::Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    axum::serve(listener, router(engine, &opts)).with_graceful_shutdown(shutdown).await
}
