//! HTTP API: question answering with optional NDJSON streaming, coverage,
//! topic trends and health.
//!
//! Logs carry a hash of the question, never its text.

use std::convert::Infallible;
use std::sync::{Arc, RwLock};
use std::time::Instant;

use axum::body::{Body, Bytes};
use axum::extract::{Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use chrono::{Datelike, NaiveDate};
use falm_core::engine::{text_chunks, Engine, Prepared};
use falm_core::respond::Answer;
use falm_core::sha256_hex;
use falm_core::trends::{summarize_trend, topic_series_with, TrendOptions, TrendScale};
use futures::channel::mpsc;
use futures::{SinkExt, StreamExt};
use serde::{Deserialize, Serialize};
use serde_json::json;
use tokio::sync::Semaphore;

use crate::clock::WallClock;
use crate::config::ServiceConfig;

pub const NDJSON: &str = "application/x-ndjson";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QueryRequest {
    pub query: String,
    #[serde(default)]
    pub ref_date: Option<NaiveDate>,
    #[serde(default)]
    pub stream: bool,
}

/// One line of a streamed answer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum StreamEvent {
    Chunk { text: String },
    Chart { spec: falm_core::exec::ChartSpec },
    References { hits: Vec<falm_core::reference::ReferenceHit> },
    /// Carries the complete answer, citations included.
    Done { answer: Box<Answer> },
}

/// Shared service state. The engine is absent until loading finishes.
#[derive(Debug, Default)]
pub struct AppState {
    engine: RwLock<Option<Arc<Engine>>>,
    ref_date: Option<NaiveDate>,
    /// When set, streamed answers wait for a permit before retrieval.
    retrieval_gate: Option<Arc<Semaphore>>,
}

impl AppState {
    pub fn new(ref_date: Option<NaiveDate>) -> AppState {
        AppState { engine: RwLock::new(None), ref_date, retrieval_gate: None }
    }

    pub fn with_retrieval_gate(mut self, gate: Arc<Semaphore>) -> AppState {
        self.retrieval_gate = Some(gate);
        self
    }

    pub fn install(&self, engine: Engine) {
        *self.engine.write().expect("engine lock") = Some(Arc::new(engine));
    }

    pub fn engine(&self) -> Option<Arc<Engine>> {
        self.engine.read().expect("engine lock").clone()
    }

    fn today(&self) -> NaiveDate {
        self.ref_date.unwrap_or_else(|| chrono::Utc::now().date_naive())
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/v1/query", post(query))
        .route("/v1/coverage", get(coverage))
        .route("/v1/trends", get(trends))
        .route("/health", get(health))
        .with_state(state)
}

fn error(status: StatusCode, message: impl Into<String>) -> Response {
    (status, Json(json!({ "error": message.into() }))).into_response()
}

fn unavailable() -> Response {
    error(StatusCode::SERVICE_UNAVAILABLE, "the dataset is still loading")
}

/// Short stable identifier for a question.
pub fn query_hash(query: &str) -> String {
    sha256_hex(query.as_bytes())[..16].to_string()
}

fn kind_name(answer: &Answer) -> String {
    serde_json::to_value(answer.kind).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default()
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> T + Send + 'static) -> T {
    tokio::task::spawn_blocking(f).await.expect("engine task panicked")
}

fn ndjson_line(event: &StreamEvent) -> Bytes {
    let mut line = serde_json::to_vec(event).expect("events serialize");
    line.push(b'\n');
    Bytes::from(line)
}

async fn query(State(state): State<Arc<AppState>>, body: Bytes) -> Response {
    let Some(engine) = state.engine() else {
        return unavailable();
    };
    // Error messages give positions only; serde messages can quote the input.
    let req: QueryRequest = match serde_json::from_slice(&body) {
        Ok(r) => r,
        Err(e) => {
            return error(
                StatusCode::BAD_REQUEST,
                format!("malformed request body at line {} column {}", e.line(), e.column()),
            )
        }
    };
    if req.query.trim().is_empty() {
        return error(StatusCode::BAD_REQUEST, "query must not be empty");
    }
    let started = Instant::now();
    let hash = query_hash(&req.query);
    let ref_date = req.ref_date.unwrap_or_else(|| state.today());
    let prepared = {
        let engine = engine.clone();
        let q = req.query.clone();
        blocking(move || engine.prepare(&q, ref_date, &WallClock::start())).await
    };
    if prepared.input_rejected {
        tracing::info!(query = %hash, kind = "rejection", status = 422, "input gate refused question");
        return (StatusCode::UNPROCESSABLE_ENTITY, Json(prepared.answer)).into_response();
    }
    if !req.stream {
        let answer = blocking(move || engine.finish(&prepared)).await;
        tracing::info!(query = %hash, kind = %kind_name(&answer), ms = started.elapsed().as_millis() as u64, "answered");
        return Json(answer).into_response();
    }
    let (mut tx, rx) = mpsc::channel::<Bytes>(16);
    let gate = state.retrieval_gate.clone();
    tokio::spawn(async move {
        stream_answer(&mut tx, engine, prepared, gate).await;
        tracing::info!(query = %hash, ms = started.elapsed().as_millis() as u64, "streamed");
    });
    Response::builder()
        .status(StatusCode::OK)
        .header(header::CONTENT_TYPE, NDJSON)
        .body(Body::from_stream(rx.map(Ok::<_, Infallible>)))
        .expect("valid response")
}

/// Chunks, then the chart, then references, then the full answer. A send
/// fails only when the client went away, which ends the stream early.
async fn stream_answer(
    tx: &mut mpsc::Sender<Bytes>,
    engine: Arc<Engine>,
    prepared: Prepared,
    gate: Option<Arc<Semaphore>>,
) {
    for chunk in text_chunks(&prepared.answer.text) {
        if tx.send(ndjson_line(&StreamEvent::Chunk { text: chunk.to_string() })).await.is_err() {
            return;
        }
    }
    if let Some(spec) = prepared.answer.payload.as_ref().and_then(|p| p.chart.clone()) {
        if tx.send(ndjson_line(&StreamEvent::Chart { spec })).await.is_err() {
            return;
        }
    }
    if let Some(gate) = gate {
        let _permit = gate.acquire().await;
    }
    let wants_references = prepared.wants_references();
    let answer = blocking(move || engine.finish(&prepared)).await;
    if wants_references {
        let hits = answer.citations.clone();
        if tx.send(ndjson_line(&StreamEvent::References { hits })).await.is_err() {
            return;
        }
    }
    let _ = tx.send(ndjson_line(&StreamEvent::Done { answer: Box::new(answer) })).await;
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ListCoverage {
    pub list_id: String,
    pub display_name: String,
    pub years: Vec<i32>,
    pub cutoff_year: i32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverageResponse {
    pub dataset_fingerprint: String,
    pub lists: Vec<ListCoverage>,
    pub companies: usize,
    pub metrics: Vec<String>,
}

pub fn coverage_of(engine: &Engine) -> CoverageResponse {
    let ds = engine.dataset();
    let catalog = ds.catalog();
    CoverageResponse {
        dataset_fingerprint: ds.fingerprint().to_string(),
        lists: catalog
            .lists
            .iter()
            .map(|(id, info)| ListCoverage {
                list_id: id.clone(),
                display_name: info.display_name.clone(),
                years: info.years.clone(),
                cutoff_year: info.cutoff_year(),
            })
            .collect(),
        companies: catalog.companies.len(),
        metrics: catalog.metrics.iter().map(|m| m.id().to_string()).collect(),
    }
}

async fn coverage(State(state): State<Arc<AppState>>) -> Response {
    match state.engine() {
        Some(engine) => Json(coverage_of(&engine)).into_response(),
        None => unavailable(),
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
pub struct TrendParams {
    pub topic: Option<String>,
    pub scale: Option<String>,
    pub from: Option<String>,
    pub to: Option<String>,
    pub window: Option<u32>,
}

fn parse_date(field: &str, value: &str) -> Result<NaiveDate, String> {
    NaiveDate::parse_from_str(value, "%Y-%m-%d").map_err(|_| format!("{field} must be a YYYY-MM-DD date"))
}

/// Topic terms, scale, range and options of a trend query.
pub type TrendRequest = (Vec<String>, TrendScale, NaiveDate, NaiveDate, TrendOptions);

/// Resolve query parameters against `today`. Without `from`, the range
/// starts five calendar years back.
pub fn trend_request(p: &TrendParams, today: NaiveDate) -> Result<TrendRequest, String> {
    let topic = p.topic.as_deref().unwrap_or("").trim();
    if topic.is_empty() {
        return Err("topic is required".into());
    }
    let terms: Vec<String> = topic.split(',').map(|t| t.trim().to_lowercase()).filter(|t| !t.is_empty()).collect();
    let scale = match p.scale.as_deref() {
        None => TrendScale::Year,
        Some(s) => TrendScale::from_str(s).ok_or_else(|| format!("unknown scale {s:?}"))?,
    };
    let to = p.to.as_deref().map(|v| parse_date("to", v)).transpose()?.unwrap_or(today);
    let from = match p.from.as_deref() {
        Some(v) => parse_date("from", v)?,
        None => NaiveDate::from_ymd_opt(to.year() - 4, 1, 1).ok_or("to is out of range")?,
    };
    if from > to {
        return Err("from must not be after to".into());
    }
    let options = TrendOptions { window_years: p.window.unwrap_or(TrendOptions::default().window_years), ..TrendOptions::default() };
    Ok((terms, scale, from, to, options))
}

async fn trends(State(state): State<Arc<AppState>>, Query(params): Query<TrendParams>) -> Response {
    let Some(engine) = state.engine() else {
        return unavailable();
    };
    let (terms, scale, from, to, options) = match trend_request(&params, state.today()) {
        Ok(r) => r,
        Err(m) => return error(StatusCode::BAD_REQUEST, m),
    };
    match topic_series_with(engine.index(), &terms, scale, from, to, options) {
        Ok(series) => {
            let summary = summarize_trend(&series).ok();
            Json(json!({
                "series": series,
                "summary": summary,
                "index_fingerprint": engine.index().fingerprint,
            }))
            .into_response()
        }
        Err(e) => error(StatusCode::BAD_REQUEST, e.to_string()),
    }
}

async fn health(State(state): State<Arc<AppState>>) -> Response {
    match state.engine() {
        Some(engine) => Json(json!({
            "status": "ok",
            "dataset_fingerprint": engine.dataset().fingerprint(),
            "index_fingerprint": engine.index().fingerprint,
        }))
        .into_response(),
        None => (
            StatusCode::SERVICE_UNAVAILABLE,
            Json(json!({ "status": "loading", "dataset_fingerprint": null, "index_fingerprint": null })),
        )
            .into_response(),
    }
}

async fn shutdown_signal() {
    let _ = tokio::signal::ctrl_c().await;
}

/// Bind, load in the background and serve until interrupted. Requests
/// before loading finishes get 503.
pub async fn serve(cfg: ServiceConfig) -> anyhow::Result<()> {
    cfg.validate()?;
    let state = Arc::new(AppState::new(cfg.ref_date));
    let listener = tokio::net::TcpListener::bind((cfg.bind.as_str(), cfg.port)).await?;
    tracing::info!(addr = %listener.local_addr()?, "listening");
    let app = router(state.clone());
    let server = tokio::spawn(async move {
        axum::serve(listener, app).with_graceful_shutdown(shutdown_signal()).await
    });
    let loaded = tokio::task::spawn_blocking(move || cfg.build_engine()).await?;
    match loaded {
        Ok(engine) => {
            tracing::info!(
                dataset = engine.dataset().fingerprint(),
                index = %engine.index().fingerprint,
                records = engine.dataset().len(),
                documents = engine.index().doc_count(),
                "loaded"
            );
            state.install(engine);
        }
        Err(e) => {
            server.abort();
            return Err(e.context("loading failed"));
        }
    }
    server.await??;
    Ok(())
}
