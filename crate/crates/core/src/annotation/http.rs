//! HTTP/1.1 JSON API over an [`AnnotationService`].
//!
//! | method | path | success |
//! |---|---|---|
//! | GET | `/api/tasks/next?annotator=ID` | 200 task, 204 when done |
//! | POST | `/api/labels` | 200 acknowledgement |
//! | GET | `/api/progress` | 200 |
//! | GET | `/api/agreement` | 200 [`AgreementReport`] |
//! | GET | `/api/disagreements` | 200 pending list |
//! | POST | `/api/adjudications` | 200 acknowledgement |
//! | POST | `/api/finalize` | 200, 409 when unresolved |
//! | GET | `/api/export?format=tsv\|jsonl` | 200 corpus text |
//!
//! Errors are 4xx/5xx with a `{code, message, details}` body.

use std::collections::HashMap;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};

use axum::body::Bytes;
use axum::extract::{Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{AnnotationError, AnnotationService};
use crate::candidates::PosTag;
use crate::corpus::{export_corpus, write_corpus_file, CorpusError, CorpusFormat, EntityRecord};

/// Where `POST /api/finalize` writes `corpus.tsv` and `corpus.jsonl`.
#[derive(Debug, Clone, Default)]
pub struct ServerOptions {
    pub corpus_dir: Option<PathBuf>,
}

#[derive(Clone)]
struct AppState {
    service: Arc<Mutex<AnnotationService>>,
    options: Arc<ServerOptions>,
}

#[derive(Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct TaskPayload {
    pub entity_id: String,
    pub surface: String,
    pub tokens: Vec<String>,
    pub tags: Vec<PosTag>,
    pub wordtypes: Vec<String>,
    pub provenance: Vec<(String, String)>,
}

impl From<&EntityRecord> for TaskPayload {
    fn from(e: &EntityRecord) -> Self {
        let (tokens, tags, wordtypes) = match &e.candidate {
            Some(c) => (
                c.tokens.iter().map(|t| t.text.clone()).collect(),
                c.tags(),
                c.wordtypes.clone(),
            ),
            None => (Vec::new(), Vec::new(), Vec::new()),
        };
        TaskPayload {
            entity_id: e.id.clone(),
            surface: e.surface.clone(),
            tokens,
            tags,
            wordtypes,
            provenance: e.provenance.clone(),
        }
    }
}

#[derive(Deserialize)]
struct LabelBody {
    entity_id: String,
    annotator: String,
    label: String,
}

#[derive(Deserialize)]
struct AdjudicationBody {
    entity_id: String,
    label: String,
}

/// API error rendered as `{code, message, details}`.
#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    code: &'static str,
    message: String,
    details: Value,
}

impl ApiError {
    fn bad_request(message: impl Into<String>) -> Self {
        ApiError {
            status: StatusCode::BAD_REQUEST,
            code: "BadRequest",
            message: message.into(),
            details: Value::Null,
        }
    }
}

impl From<AnnotationError> for ApiError {
    fn from(e: AnnotationError) -> Self {
        let status = match &e {
            AnnotationError::UnknownAnnotator(_) | AnnotationError::UnknownEntity(_) => {
                StatusCode::NOT_FOUND
            }
            AnnotationError::InvalidLabel(_) => StatusCode::UNPROCESSABLE_ENTITY,
            AnnotationError::NotEnoughAnnotators(_)
            | AnnotationError::NotDisagreed(_)
            | AnnotationError::Unresolved(_) => StatusCode::CONFLICT,
            AnnotationError::DuplicateAnnotator(_) => StatusCode::BAD_REQUEST,
            AnnotationError::Journal { .. } | AnnotationError::Io(_) => {
                StatusCode::INTERNAL_SERVER_ERROR
            }
        };
        let details = match &e {
            AnnotationError::Unresolved(ids) => json!({ "unresolved": ids }),
            AnnotationError::UnknownAnnotator(id) => json!({ "annotator": id }),
            AnnotationError::UnknownEntity(id)
            | AnnotationError::NotDisagreed(id) => json!({ "entity_id": id }),
            AnnotationError::InvalidLabel(l) => {
                json!({ "label": l, "allowed": ["PER", "LOC", "ORG", "MISC"] })
            }
            _ => Value::Null,
        };
        ApiError {
            status,
            code: e.code(),
            message: e.to_string(),
            details,
        }
    }
}

impl From<CorpusError> for ApiError {
    fn from(e: CorpusError) -> Self {
        ApiError {
            status: StatusCode::INTERNAL_SERVER_ERROR,
            code: "Internal",
            message: e.to_string(),
            details: Value::Null,
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = json!({ "code": self.code, "message": self.message, "details": self.details });
        (self.status, Json(body)).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

fn parse_body<T: serde::de::DeserializeOwned>(body: &Bytes) -> ApiResult<T> {
    serde_json::from_slice(body).map_err(|e| ApiError::bad_request(format!("malformed body: {e}")))
}

pub fn router(service: Arc<Mutex<AnnotationService>>, options: ServerOptions) -> Router {
    let state = AppState {
        service,
        options: Arc::new(options),
    };
    Router::new()
        .route("/api/tasks/next", get(next_task))
        .route("/api/labels", post(submit_label))
        .route("/api/progress", get(progress))
        .route("/api/agreement", get(agreement))
        .route("/api/disagreements", get(disagreements))
        .route("/api/adjudications", post(adjudicate))
        .route("/api/finalize", post(finalize))
        .route("/api/export", get(export))
        .fallback(|| async {
            ApiError {
                status: StatusCode::NOT_FOUND,
                code: "NotFound",
                message: "no such endpoint".into(),
                details: Value::Null,
            }
        })
        .with_state(state)
}

fn lock(state: &AppState) -> std::sync::MutexGuard<'_, AnnotationService> {
    state.service.lock().unwrap_or_else(|p| p.into_inner())
}

async fn next_task(
    State(state): State<AppState>,
    Query(q): Query<HashMap<String, String>>,
) -> ApiResult<Response> {
    let annotator = q
        .get("annotator")
        .ok_or_else(|| ApiError::bad_request("missing query parameter `annotator`"))?;
    let svc = lock(&state);
    Ok(match svc.next_task(annotator)? {
        Some(e) => Json(TaskPayload::from(e)).into_response(),
        None => StatusCode::NO_CONTENT.into_response(),
    })
}

async fn submit_label(State(state): State<AppState>, body: Bytes) -> ApiResult<Response> {
    let b: LabelBody = parse_body(&body)?;
    let ack = lock(&state).submit_label(&b.annotator, &b.entity_id, &b.label)?;
    Ok(Json(ack).into_response())
}

async fn progress(State(state): State<AppState>) -> ApiResult<Response> {
    Ok(Json(lock(&state).progress()).into_response())
}

async fn agreement(State(state): State<AppState>) -> ApiResult<Response> {
    Ok(Json(lock(&state).agreement()?).into_response())
}

async fn disagreements(State(state): State<AppState>) -> ApiResult<Response> {
    Ok(Json(lock(&state).pending_disagreements()?).into_response())
}

async fn adjudicate(State(state): State<AppState>, body: Bytes) -> ApiResult<Response> {
    let b: AdjudicationBody = parse_body(&body)?;
    let ack = lock(&state).adjudicate(&b.entity_id, &b.label)?;
    Ok(Json(ack).into_response())
}

// the body is ignored but still read, so the connection stays reusable
async fn finalize(State(state): State<AppState>, _body: Bytes) -> ApiResult<Response> {
    let records = lock(&state).finalize()?;
    let mut written = Vec::new();
    if let Some(dir) = &state.options.corpus_dir {
        for (name, fmt) in [("corpus.tsv", CorpusFormat::Tsv), ("corpus.jsonl", CorpusFormat::Jsonl)] {
            let path = dir.join(name);
            write_corpus_file(&path, &records, fmt)?;
            written.push(path.display().to_string());
        }
    }
    Ok(Json(json!({ "records": records.len(), "written": written })).into_response())
}

async fn export(
    State(state): State<AppState>,
    Query(q): Query<HashMap<String, String>>,
) -> ApiResult<Response> {
    let format: CorpusFormat = q
        .get("format")
        .map(String::as_str)
        .unwrap_or("tsv")
        .parse()
        .map_err(ApiError::bad_request)?;
    let records = lock(&state).finalize()?;
    let text = export_corpus(&records, format)?;
    let mime = match format {
        CorpusFormat::Tsv => "text/tab-separated-values; charset=utf-8",
        CorpusFormat::Jsonl => "application/x-ndjson; charset=utf-8",
    };
    Ok(([(header::CONTENT_TYPE, mime)], text).into_response())
}

/// A server running on a background thread with its own runtime.
pub struct ServerHandle {
    addr: SocketAddr,
    shutdown: Option<tokio::sync::oneshot::Sender<()>>,
    thread: Option<std::thread::JoinHandle<std::io::Result<()>>>,
}

impl ServerHandle {
    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn base_url(&self) -> String {
        format!("http://{}", self.addr)
    }

    pub fn stop(mut self) -> std::io::Result<()> {
        self.stop_inner()
    }

    fn stop_inner(&mut self) -> std::io::Result<()> {
        if let Some(tx) = self.shutdown.take() {
            let _ = tx.send(());
        }
        match self.thread.take() {
            Some(t) => t.join().unwrap_or_else(|_| Err(std::io::Error::other("server thread panicked"))),
            None => Ok(()),
        }
    }
}

impl Drop for ServerHandle {
    fn drop(&mut self) {
        let _ = self.stop_inner();
    }
}

/// Binds `addr` (port 0 picks a free port) and serves until stopped.
pub fn spawn_server(
    addr: SocketAddr,
    service: Arc<Mutex<AnnotationService>>,
    options: ServerOptions,
) -> std::io::Result<ServerHandle> {
    let std_listener = std::net::TcpListener::bind(addr)?;
    std_listener.set_nonblocking(true)?;
    let local = std_listener.local_addr()?;
    let (tx, rx) = tokio::sync::oneshot::channel::<()>();
    let app = router(service, options);
    let thread = std::thread::spawn(move || {
        let rt = tokio::runtime::Builder::new_multi_thread()
            .worker_threads(2)
            .enable_all()
            .build()?;
        rt.block_on(async move {
            let listener = tokio::net::TcpListener::from_std(std_listener)?;
            axum::serve(listener, app)
                .with_graceful_shutdown(async {
                    let _ = rx.await;
                })
                .await
        })
    });
    Ok(ServerHandle {
        addr: local,
        shutdown: Some(tx),
        thread: Some(thread),
    })
}

/// Serves in the foreground until Ctrl-C.
pub fn serve_blocking(
    addr: SocketAddr,
    service: Arc<Mutex<AnnotationService>>,
    options: ServerOptions,
) -> std::io::Result<()> {
    let rt = tokio::runtime::Builder::new_multi_thread().enable_all().build()?;
    rt.block_on(async move {
        let listener = tokio::net::TcpListener::bind(addr).await?;
        log::info!("annotation service listening on http://{}", listener.local_addr()?);
        axum::serve(listener, router(service, options))
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await
    })
}
