//! JSON API for the annotation workflow.
//!
//! Writes to one session are serialized through that session's mutex and
//! appended to its log before the response is sent. During labeling no
//! response carries another annotator's labels; kappa and the estimate stay
//! unavailable until labeling ends.

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::Arc;

use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Deserialize;
use serde_json::{json, Value};
use tokio::sync::Mutex;
use tower_http::services::ServeDir;
use tweetscope_core::annotate::{AnnotateError, AnnotationSession, SessionEvent, SessionStatus};

use crate::store::{SessionStore, StoreError};

pub struct AppState {
    store: SessionStore,
    sessions: Mutex<HashMap<String, Arc<Mutex<AnnotationSession>>>>,
}

impl AppState {
    pub fn new(store: SessionStore) -> Arc<Self> {
        Arc::new(AppState { store, sessions: Mutex::new(HashMap::new()) })
    }

    async fn session(&self, id: &str) -> Result<Arc<Mutex<AnnotationSession>>, ApiError> {
        let mut map = self.sessions.lock().await;
        if let Some(s) = map.get(id) {
            return Ok(s.clone());
        }
        let s = Arc::new(Mutex::new(self.store.load(id)?));
        map.insert(id.to_string(), s.clone());
        Ok(s)
    }
}

pub struct ApiError(StatusCode, Value);

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, Json(self.1)).into_response()
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        let status = match &e {
            StoreError::NotFound(_) => StatusCode::NOT_FOUND,
            StoreError::BadId(_) => StatusCode::BAD_REQUEST,
            StoreError::Annotate(a) => return a.clone().into(),
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        ApiError(status, json!({ "error": e.to_string() }))
    }
}

impl From<AnnotateError> for ApiError {
    fn from(e: AnnotateError) -> Self {
        let status = match &e {
            AnnotateError::WrongState { .. }
            | AnnotateError::LabelingIncomplete(_)
            | AnnotateError::NotDisagreed(_) => StatusCode::CONFLICT,
            AnnotateError::UnknownTweet(_) => StatusCode::NOT_FOUND,
            _ => StatusCode::BAD_REQUEST,
        };
        let mut body = json!({ "error": e.to_string() });
        if let AnnotateError::LabelingIncomplete(m) = &e {
            body["missing"] = m.iter().map(|(a, n)| (a.clone(), json!(n))).collect::<serde_json::Map<_, _>>().into();
        }
        ApiError(status, body)
    }
}

type ApiResult = Result<Json<Value>, ApiError>;

fn conflict(msg: &str, status: SessionStatus) -> ApiError {
    ApiError(StatusCode::CONFLICT, json!({ "error": msg, "phase": status }))
}

pub fn router(state: Arc<AppState>, static_dir: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/session/{id}", get(overview))
        .route("/session/{id}/next", get(next))
        .route("/session/{id}/label", post(label))
        .route("/session/{id}/disagreements", get(disagreements))
        .route("/session/{id}/adjudicate", post(adjudicate))
        .route("/session/{id}/kappa", get(kappa))
        .route("/session/{id}/estimate", get(estimate))
        .with_state(state);
    match static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api,
    }
}

async fn overview(State(st): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult {
    let s = st.session(&id).await?;
    let s = s.lock().await;
    Ok(Json(json!({
        "session_id": s.session_id(),
        "phase": s.status(),
        "total": s.items().len(),
        "labels": s.label_set().labels(),
    })))
}

#[derive(Deserialize)]
struct AnnotatorQuery {
    annotator: String,
}

async fn next(State(st): State<Arc<AppState>>, Path(id): Path<String>, Query(q): Query<AnnotatorQuery>) -> ApiResult {
    let s = st.session(&id).await?;
    let s = s.lock().await;
    Ok(Json(serde_json::to_value(s.annotator_view(&q.annotator)?).unwrap()))
}

#[derive(Deserialize)]
struct LabelBody {
    annotator: String,
    tweet_id: String,
    label: String,
}

async fn label(State(st): State<Arc<AppState>>, Path(id): Path<String>, Json(b): Json<LabelBody>) -> ApiResult {
    let s = st.session(&id).await?;
    let mut s = s.lock().await;
    let annotator = b.annotator.clone();
    st.store.commit(&mut s, SessionEvent::Label { annotator: b.annotator, tweet_id: b.tweet_id, label: b.label })?;
    Ok(Json(serde_json::to_value(s.annotator_view(&annotator)?).unwrap()))
}

/// Ends labeling on first call once both annotators are done; the queue
/// shows each disputed tweet's two labels as a sorted, unattributed pair.
async fn disagreements(State(st): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult {
    let s = st.session(&id).await?;
    let mut s = s.lock().await;
    if s.status() == SessionStatus::Labeling {
        st.store.commit(&mut s, SessionEvent::OpenAdjudication)?;
    }
    Ok(Json(json!({ "phase": s.status(), "queue": s.disagreement_queue()? })))
}

#[derive(Deserialize)]
struct AdjudicateBody {
    tweet_id: String,
    label: String,
}

async fn adjudicate(
    State(st): State<Arc<AppState>>,
    Path(id): Path<String>,
    Json(b): Json<AdjudicateBody>,
) -> ApiResult {
    let s = st.session(&id).await?;
    let mut s = s.lock().await;
    st.store.commit(&mut s, SessionEvent::Adjudicate { tweet_id: b.tweet_id, label: b.label })?;
    Ok(Json(json!({ "phase": s.status(), "remaining": s.disagreement_queue()?.len() })))
}

async fn kappa(State(st): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult {
    let s = st.session(&id).await?;
    let s = s.lock().await;
    if s.status() == SessionStatus::Labeling {
        return Err(conflict("agreement is hidden until labeling ends", s.status()));
    }
    Ok(Json(serde_json::to_value(s.cohen_kappa()?).unwrap()))
}

async fn estimate(State(st): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult {
    let s = st.session(&id).await?;
    let s = s.lock().await;
    if s.status() != SessionStatus::Closed {
        return Err(conflict("estimate needs a closed session", s.status()));
    }
    Ok(Json(serde_json::to_value(s.weighted_category_estimate()?).unwrap()))
}

pub async fn serve(store: SessionStore, bind: &str, static_dir: Option<PathBuf>) -> anyhow::Result<()> {
    let app = router(AppState::new(store), static_dir);
    let listener = tokio::net::TcpListener::bind(bind).await?;
    log::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, app).await?;
    Ok(())
}
