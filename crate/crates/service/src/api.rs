//! HTTP resources. Request and response bodies are the engine's JSON documents.

use std::convert::Infallible;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::UNIX_EPOCH;

use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::sse::{Event, KeepAlive, Sse};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use futures::StreamExt;
use serde::Deserialize;
use serde_json::{json, Value};
use tokio::sync::RwLock;

use qgraph_core::discovery::{validate_config, Task};
use qgraph_core::io::{
    cancellation_doc, decode_graph, decode_search_template, encode_graph, encode_search_template, encode_state,
    layout_doc, library_delete, library_list, library_load, library_load_document, library_save, matchings_doc,
    render_report, search_config_from_graph, search_summary_doc, GraphFile, StateDocument,
};
use qgraph_core::layout::{kamada_kawai_3d, LayoutSettings};
use qgraph_core::{
    compute_state, enumerate_perfect_matchings, find_cancellations, normalize_state, parse_target, validate_graph,
    ColoredGraph, Ket, QuantumState, TargetState,
};

use crate::error::ApiError;
use crate::jobs::{Job, JobManager, JobSnapshot};

#[derive(Clone)]
pub struct AppState {
    pub library: PathBuf,
    pub jobs: Arc<JobManager>,
    /// Readers share the library; a write excludes everyone for its duration.
    store: Arc<RwLock<()>>,
}

impl AppState {
    pub fn new(library: PathBuf, jobs: Arc<JobManager>) -> Self {
        AppState { library, jobs, store: Arc::new(RwLock::new(())) }
    }
}

type ApiResult<T = Response> = Result<T, ApiError>;

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/graphs", get(list_graphs))
        .route("/graphs/{name}", get(get_graph).put(put_graph).delete(delete_graph))
        .route("/graphs/{name}/state", get(stored_state))
        .route("/graphs/{name}/matchings", get(stored_matchings))
        .route("/graphs/{name}/layout", get(stored_layout))
        .route("/graphs/{name}/template", get(stored_template))
        .route("/state", post(inline_state))
        .route("/matchings", post(inline_matchings))
        .route("/layout", post(inline_layout))
        .route("/jobs", get(list_jobs).post(submit_job))
        .route("/jobs/{id}", get(job_status))
        .route("/jobs/{id}/events", get(job_events))
        .route("/jobs/{id}/result", get(job_result))
        .route("/jobs/{id}/cancel", post(cancel_job))
        .with_state(state)
}

fn document(status: StatusCode, text: String) -> Response {
    (status, [(header::CONTENT_TYPE, "application/json")], text).into_response()
}

/// Runs CPU or file work off the async executor.
async fn blocking<T: Send + 'static>(f: impl FnOnce() -> ApiResult<T> + Send + 'static) -> ApiResult<T> {
    tokio::task::spawn_blocking(f).await.map_err(ApiError::internal)?
}

async fn health(State(state): State<AppState>) -> Json<Value> {
    Json(json!({ "status": "ok", "workers": state.jobs.workers() }))
}

// ----- graph library -------------------------------------------------------

async fn list_graphs(State(state): State<AppState>) -> ApiResult<Json<Value>> {
    let _read = state.store.read().await;
    let dir = state.library.clone();
    let names = blocking(move || Ok(library_list(&dir)?)).await?;
    Ok(Json(json!({ "graphs": names })))
}

async fn get_graph(State(state): State<AppState>, Path(name): Path<String>) -> ApiResult {
    let _read = state.store.read().await;
    let dir = state.library.clone();
    let text = blocking(move || Ok(library_load_document(&dir, &name)?)).await?;
    Ok(document(StatusCode::OK, text))
}

/// Validates, canonicalizes and stores; responds with the stored document.
async fn put_graph(State(state): State<AppState>, Path(name): Path<String>, body: String) -> ApiResult {
    let file = decode_graph(&body)?;
    let report = validate_graph(&file.graph);
    if !report.is_ok() {
        return Err(ApiError::invalid_graph(&report));
    }
    let _write = state.store.write().await;
    let dir = state.library.clone();
    let text = blocking(move || Ok(library_save(&dir, &name, &file)?)).await?;
    Ok(document(StatusCode::OK, text))
}

async fn delete_graph(State(state): State<AppState>, Path(name): Path<String>) -> ApiResult<StatusCode> {
    let _write = state.store.write().await;
    let dir = state.library.clone();
    blocking(move || Ok(library_delete(&dir, &name)?)).await?;
    Ok(StatusCode::NO_CONTENT)
}

async fn load_stored(state: &AppState, name: String) -> ApiResult<GraphFile> {
    let _read = state.store.read().await;
    let dir = state.library.clone();
    blocking(move || Ok(library_load(&dir, &name)?)).await
}

fn parse_inline(body: &str) -> ApiResult<GraphFile> {
    let file = decode_graph(body)?;
    let report = validate_graph(&file.graph);
    if !report.is_ok() {
        return Err(ApiError::invalid_graph(&report));
    }
    Ok(file)
}

// ----- computations --------------------------------------------------------

fn state_response(mut g: ColoredGraph) -> ApiResult {
    g.canonicalize();
    let raw = compute_state(&g)?;
    let norm = raw.norm();
    let state = if norm > 0.0 { normalize_state(&raw)? } else { QuantumState::new(raw.dims().to_vec()) };
    Ok(document(StatusCode::OK, encode_state(&StateDocument { state, norm })?))
}

#[derive(Debug, Deserialize)]
struct MatchingsQuery {
    ket: Option<String>,
}

fn matchings_response(mut g: ColoredGraph, ket: Option<String>) -> ApiResult {
    g.canonicalize();
    let text = match ket {
        Some(k) => {
            let ket: Ket = k.parse().map_err(|e| ApiError::bad_request(format!("{e}")))?;
            render_report(&cancellation_doc(&g, &find_cancellations(&g, &ket)?))?
        }
        None => render_report(&matchings_doc(&g, &enumerate_perfect_matchings(&g)))?,
    };
    Ok(document(StatusCode::OK, text))
}

#[derive(Debug, Deserialize)]
struct LayoutQuery {
    seed: Option<u64>,
    max_iters: Option<usize>,
}

fn layout_response(g: ColoredGraph, q: LayoutQuery) -> ApiResult {
    let defaults = LayoutSettings::default();
    let settings = LayoutSettings {
        seed: q.seed.unwrap_or(defaults.seed),
        max_iters: q.max_iters.unwrap_or(defaults.max_iters),
        ..defaults
    };
    let layout = kamada_kawai_3d(&g, &settings);
    Ok(document(StatusCode::OK, render_report(&layout_doc(&layout))?))
}

async fn stored_state(State(state): State<AppState>, Path(name): Path<String>) -> ApiResult {
    let file = load_stored(&state, name).await?;
    blocking(move || state_response(file.graph)).await
}

async fn inline_state(body: String) -> ApiResult {
    blocking(move || state_response(parse_inline(&body)?.graph)).await
}

async fn stored_matchings(
    State(state): State<AppState>,
    Path(name): Path<String>,
    Query(q): Query<MatchingsQuery>,
) -> ApiResult {
    let file = load_stored(&state, name).await?;
    blocking(move || matchings_response(file.graph, q.ket)).await
}

async fn inline_matchings(Query(q): Query<MatchingsQuery>, body: String) -> ApiResult {
    blocking(move || matchings_response(parse_inline(&body)?.graph, q.ket)).await
}

async fn stored_layout(
    State(state): State<AppState>,
    Path(name): Path<String>,
    Query(q): Query<LayoutQuery>,
) -> ApiResult {
    let file = load_stored(&state, name).await?;
    blocking(move || layout_response(file.graph, q)).await
}

async fn inline_layout(Query(q): Query<LayoutQuery>, body: String) -> ApiResult {
    blocking(move || layout_response(parse_inline(&body)?.graph, q)).await
}

// ----- templates -----------------------------------------------------------

#[derive(Debug, Deserialize)]
struct TemplateQuery {
    /// `ghz:n,d`, `bell:d` or `swap:n,d`; defaults to the target stored with the graph.
    target: Option<String>,
    task: Option<String>,
    seed: Option<u64>,
    tau: Option<f64>,
    restarts: Option<usize>,
}

fn stored_target(file: &GraphFile, task: Task) -> ApiResult<TargetState> {
    let terms = file.target.clone().ok_or_else(|| ApiError::bad_request("target required"))?;
    let dims = task.site_dims(&file.graph.vertices);
    let state = QuantumState::from_terms(dims, terms)?;
    Ok(TargetState::new("stored target", &state)?)
}

async fn stored_template(
    State(state): State<AppState>,
    Path(name): Path<String>,
    Query(q): Query<TemplateQuery>,
) -> ApiResult {
    let file = load_stored(&state, name).await?;
    let task: Task = q.task.as_deref().unwrap_or("generation").parse()?;
    let target = match &q.target {
        Some(text) => parse_target(text)?,
        None => stored_target(&file, task)?,
    };
    let mut config = search_config_from_graph(&file.graph, target, task);
    if let Some(seed) = q.seed {
        config.seed = seed;
    }
    if let Some(tau) = q.tau {
        config.pruning.threshold = tau;
    }
    if let Some(restarts) = q.restarts {
        config.optimizer.restarts = restarts;
    }
    validate_config(&config)?;
    Ok(document(StatusCode::OK, encode_search_template(&config)?))
}

// ----- jobs ----------------------------------------------------------------

fn status_json(snap: &JobSnapshot) -> ApiResult<Value> {
    let result = match &snap.result {
        Some(r) => {
            let graph: Value =
                serde_json::from_str(&encode_graph(&GraphFile::new(r.graph.clone()))?).map_err(ApiError::internal)?;
            let mut summary = serde_json::to_value(search_summary_doc(r)).map_err(ApiError::internal)?;
            summary["graph"] = graph;
            summary
        }
        None => Value::Null,
    };
    let submitted = snap.submitted_at.duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0);
    Ok(json!({
        "id": snap.id,
        "name": snap.name,
        "state": snap.state,
        "submitted_at": submitted,
        "progress": snap.progress,
        "event_count": snap.event_count,
        "error": snap.error,
        "result": result,
    }))
}

fn find_job(state: &AppState, id: &str) -> ApiResult<Arc<Job>> {
    state.jobs.get(id).ok_or_else(|| ApiError::not_found(format!("job {id:?} not found")))
}

async fn submit_job(State(state): State<AppState>, body: String) -> ApiResult {
    let config = decode_search_template(&body)?;
    validate_config(&config)?;
    let job = state.jobs.submit(config);
    let body = json!({ "id": job.id(), "state": job.snapshot().state });
    Ok((StatusCode::ACCEPTED, [(header::LOCATION, format!("/jobs/{}", job.id()))], Json(body)).into_response())
}

async fn list_jobs(State(state): State<AppState>) -> ApiResult<Json<Value>> {
    let jobs: Vec<Value> = state
        .jobs
        .list()
        .iter()
        .map(|j| {
            let s = j.snapshot();
            json!({ "id": s.id, "name": s.name, "state": s.state, "progress": s.progress })
        })
        .collect();
    Ok(Json(json!({ "jobs": jobs })))
}

async fn job_status(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    Ok(Json(status_json(&find_job(&state, &id)?.snapshot())?))
}

async fn job_result(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult {
    let snap = find_job(&state, &id)?.snapshot();
    let result =
        snap.result.ok_or_else(|| ApiError::conflict(format!("job {id:?} has no result ({:?})", snap.state)))?;
    Ok(document(StatusCode::OK, encode_graph(&GraphFile::new(result.graph.clone()))?))
}

async fn cancel_job(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    let job_state = state.jobs.cancel(&id).ok_or_else(|| ApiError::not_found(format!("job {id:?} not found")))?;
    Ok(Json(json!({ "id": id, "state": job_state, "acknowledged": true })))
}

#[derive(Debug, Deserialize)]
struct EventsQuery {
    /// First sequence number to deliver.
    from: Option<usize>,
}

/// Server-sent events, replayed from the job history. `Last-Event-ID`
/// resumes after the given sequence number.
async fn job_events(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Query(q): Query<EventsQuery>,
    headers: HeaderMap,
) -> ApiResult {
    let job = find_job(&state, &id)?;
    let resume = headers
        .get("last-event-id")
        .and_then(|v| v.to_str().ok())
        .and_then(|v| v.trim().parse::<usize>().ok())
        .map(|last| last + 1);
    let from = resume.or(q.from).unwrap_or(0);
    let stream = job.events(from).map(|event| {
        let data = serde_json::to_string(&event).unwrap_or_else(|_| "{}".into());
        Ok::<_, Infallible>(Event::default().event(event.kind.name()).id(event.seq.to_string()).data(data))
    });
    Ok(Sse::new(stream).keep_alive(KeepAlive::default()).into_response())
}
