//! HTTP/JSON curation service over one review session.
//!
//! Reads run concurrently; mutations are serialized behind a write lock,
//! applied to a copy, persisted atomically, and only then published. A stale
//! `version` in a mutation is answered with 409.

use std::path::PathBuf;
use std::sync::Arc;

use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post, put};
use axum::{Json, Router};
use rulelens_core::curation::{
    CurationSession, CurationStats, ExportSummary, ItemPut, ItemView, RulePage, RulePatch, RuleQuery,
    RuleView, WeightsPut, WeightsView,
};
use rulelens_core::Error;
use serde::{Deserialize, Serialize};
use tokio::sync::RwLock;

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    /// The session document, rewritten after every accepted mutation.
    pub session_path: PathBuf,
    /// Where `POST /export` writes the classifier.
    pub export_path: PathBuf,
}

pub struct AppState {
    session: RwLock<CurationSession>,
    config: ServiceConfig,
}

impl AppState {
    pub fn new(session: CurationSession, config: ServiceConfig) -> Arc<Self> {
        Arc::new(AppState { session: RwLock::new(session), config })
    }

    /// Opens the session document at `config.session_path`.
    pub fn open(config: ServiceConfig) -> rulelens_core::Result<Arc<Self>> {
        let session = CurationSession::load(&config.session_path)?;
        Ok(Self::new(session, config))
    }
}

/// Error body: `{"kind", "error"}`, plus `key`, `expected`, `current` on conflicts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub kind: String,
    pub error: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub key: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub current: Option<u64>,
}

pub struct ApiError(Error);

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        ApiError(e)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let mut body = ErrorBody {
            kind: String::new(),
            error: self.0.to_string(),
            key: None,
            expected: None,
            current: None,
        };
        let status = match &self.0 {
            Error::NotFound(_) => StatusCode::NOT_FOUND,
            Error::Conflict { key, expected, current } => {
                body.key = Some(key.clone());
                body.expected = Some(*expected);
                body.current = Some(*current);
                StatusCode::CONFLICT
            }
            Error::Invalid(_) | Error::Config(_) | Error::Schema(_) | Error::Parse { .. } => {
                StatusCode::UNPROCESSABLE_ENTITY
            }
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        body.kind = match status {
            StatusCode::NOT_FOUND => "not_found",
            StatusCode::CONFLICT => "conflict",
            StatusCode::UNPROCESSABLE_ENTITY => "invalid",
            _ => "internal",
        }
        .into();
        (status, Json(body)).into_response()
    }
}

type ApiResult<T> = Result<Json<T>, ApiError>;

async fn persist(state: &AppState, next: &CurationSession) -> Result<(), ApiError> {
    let snapshot = next.clone();
    let path = state.config.session_path.clone();
    tokio::task::spawn_blocking(move || snapshot.save(path))
        .await
        .map_err(|e| ApiError(Error::Invalid(format!("persist task failed: {e}"))))??;
    Ok(())
}

/// Applies `f` to a copy of the session, saves it, then publishes it.
async fn mutate<T>(
    state: &AppState,
    f: impl FnOnce(&mut CurationSession) -> rulelens_core::Result<T>,
) -> Result<T, ApiError> {
    let mut guard = state.session.write().await;
    let mut next = guard.clone();
    let out = f(&mut next)?;
    persist(state, &next).await?;
    *guard = next;
    Ok(out)
}

async fn list_rules(State(state): State<Arc<AppState>>, Query(query): Query<RuleQuery>) -> ApiResult<RulePage> {
    Ok(Json(state.session.read().await.list_rules(&query)?))
}

async fn get_rule(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<RuleView> {
    Ok(Json(state.session.read().await.rule_view(&id)?))
}

async fn patch_rule(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    Json(patch): Json<RulePatch>,
) -> ApiResult<RuleView> {
    Ok(Json(mutate(&state, |s| s.patch_rule(&id, patch)).await?))
}

async fn list_items(State(state): State<Arc<AppState>>) -> Json<Vec<ItemView>> {
    Json(state.session.read().await.item_views())
}

async fn put_item(
    State(state): State<Arc<AppState>>,
    Path(item_id): Path<String>,
    Json(body): Json<ItemPut>,
) -> ApiResult<ItemView> {
    Ok(Json(mutate(&state, |s| s.put_item(&item_id, body)).await?))
}

async fn get_weights(State(state): State<Arc<AppState>>) -> Json<WeightsView> {
    Json(state.session.read().await.weights())
}

async fn put_weights(State(state): State<Arc<AppState>>, Json(body): Json<WeightsPut>) -> ApiResult<WeightsView> {
    Ok(Json(mutate(&state, |s| s.put_weights(body)).await?))
}

async fn stats(State(state): State<Arc<AppState>>) -> Json<CurationStats> {
    Json(state.session.read().await.stats())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExportResponse {
    pub path: String,
    #[serde(flatten)]
    pub summary: ExportSummary,
}

async fn export(State(state): State<Arc<AppState>>) -> ApiResult<ExportResponse> {
    let (classifier, summary) = state.session.read().await.export()?;
    let path = state.config.export_path.clone();
    let target = path.clone();
    tokio::task::spawn_blocking(move || classifier.save(target))
        .await
        .map_err(|e| ApiError(Error::Invalid(format!("export task failed: {e}"))))??;
    Ok(Json(ExportResponse { path: path.display().to_string(), summary }))
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/rules", get(list_rules))
        .route("/rules/{id}", get(get_rule).patch(patch_rule))
        .route("/items", get(list_items))
        .route("/items/{item_id}", put(put_item))
        .route("/category-weights", get(get_weights).put(put_weights))
        .route("/stats", get(stats))
        .route("/export", post(export))
        .with_state(state)
}

/// Serves until `shutdown` resolves.
pub async fn serve(
    listener: tokio::net::TcpListener,
    state: Arc<AppState>,
    shutdown: impl std::future::Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    axum::serve(listener, router(state))
        .with_graceful_shutdown(shutdown)
        .await
}
