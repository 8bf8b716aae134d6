//! HTTP API for interactive boards.
//!
//! Routes, all under `/api/v1`:
//!
//! | method | path                   | body                              | reply      |
//! |--------|------------------------|-----------------------------------|------------|
//! | POST   | `/games`               | `{mode, shape, seed?}` or `{mode, pattern}` | game |
//! | GET    | `/games/{id}`          |                                   | game       |
//! | POST   | `/games/{id}/moves`    | `{kind: flip\|rotate, axis, index, angle?}` | game |
//! | POST   | `/games/{id}/assist`   |                                   | assist     |
//! | POST   | `/games/{id}/reset`    |                                   | game       |
//! | GET    | `/games/{id}/snapshot` |                                   | snapshot   |
//! | POST   | `/snapshots`           | snapshot                          | game       |
//!
//! Axis and index numbers are 1-based. Failures reply with
//! `{"code": ..., "message": ...}`: 400 for unreadable bodies, 404 for
//! unknown games, 422 for well-formed requests that cannot be applied.

use std::net::SocketAddr;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use gbswitch_core::game::{Assist, GameMode, GameRegistry, GameState, Move, PatternSource, Snapshot};
use gbswitch_core::{Error, Shape, Tensor, DEFAULT_SEED};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub code: String,
    pub message: String,
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    body: ErrorBody,
}

impl ApiError {
    fn new(status: StatusCode, code: &str, message: impl Into<String>) -> Self {
        Self { status, body: ErrorBody { code: code.into(), message: message.into() } }
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let (status, code) = match &e {
            Error::Parse(_) => (StatusCode::BAD_REQUEST, "parse"),
            Error::UnknownGame(_) => (StatusCode::NOT_FOUND, "not_found"),
            Error::Dimension(_) => (StatusCode::UNPROCESSABLE_ENTITY, "dimension"),
            Error::InvalidValue(_) => (StatusCode::UNPROCESSABLE_ENTITY, "invalid_value"),
            Error::Capacity(_) => (StatusCode::UNPROCESSABLE_ENTITY, "capacity"),
            Error::ModeMismatch(_) => (StatusCode::UNPROCESSABLE_ENTITY, "mode_mismatch"),
            Error::Unsupported(_) => (StatusCode::UNPROCESSABLE_ENTITY, "unsupported"),
        };
        Self::new(status, code, e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

fn parse_body<T: for<'de> Deserialize<'de>>(body: &[u8]) -> ApiResult<T> {
    serde_json::from_slice(body).map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, "parse", e.to_string()))
}

/// Body of `POST /games`. Give either `seed` (random board, needs `shape`)
/// or `pattern`; with neither, a random board with the default seed.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CreateRequest {
    pub mode: GameMode,
    #[serde(default)]
    pub shape: Option<Shape>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub pattern: Option<Tensor>,
}

type Shared = Arc<GameRegistry>;

async fn create_game(State(reg): State<Shared>, body: Bytes) -> ApiResult<(StatusCode, Json<GameState>)> {
    let req: CreateRequest = parse_body(&body)?;
    let source = match (req.seed, req.pattern) {
        (Some(_), Some(_)) => {
            return Err(Error::InvalidValue("give either a seed or a pattern, not both".into()).into())
        }
        (_, Some(p)) => PatternSource::Provided(p),
        (seed, None) => PatternSource::Random { seed: seed.unwrap_or(DEFAULT_SEED) },
    };
    let game = reg.create(req.mode, req.shape, source)?;
    Ok((StatusCode::CREATED, Json(game)))
}

async fn get_game(State(reg): State<Shared>, Path(id): Path<String>) -> ApiResult<Json<GameState>> {
    Ok(Json(reg.get(&id)?))
}

async fn apply_move(State(reg): State<Shared>, Path(id): Path<String>, body: Bytes) -> ApiResult<Json<GameState>> {
    let mv: Move = parse_body(&body)?;
    Ok(Json(reg.apply_move(&id, mv)?))
}

async fn assist(State(reg): State<Shared>, Path(id): Path<String>) -> ApiResult<Json<Assist>> {
    // the registry hands the solver a copy of the board, so moves keep flowing
    let out = tokio::task::spawn_blocking(move || reg.assist(&id))
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()))??;
    Ok(Json(out))
}

async fn reset(State(reg): State<Shared>, Path(id): Path<String>) -> ApiResult<Json<GameState>> {
    Ok(Json(reg.reset(&id)?))
}

async fn snapshot(State(reg): State<Shared>, Path(id): Path<String>) -> ApiResult<Json<Snapshot>> {
    Ok(Json(reg.snapshot(&id)?))
}

async fn restore(State(reg): State<Shared>, body: Bytes) -> ApiResult<(StatusCode, Json<GameState>)> {
    let snap: Snapshot = parse_body(&body)?;
    Ok((StatusCode::CREATED, Json(reg.restore(&snap)?)))
}

async fn fallback() -> ApiError {
    ApiError::new(StatusCode::NOT_FOUND, "not_found", "no such route")
}

pub fn router(registry: Arc<GameRegistry>) -> Router {
    let api = Router::new()
        .route("/games", post(create_game))
        .route("/games/{id}", get(get_game))
        .route("/games/{id}/moves", post(apply_move))
        .route("/games/{id}/assist", post(assist))
        .route("/games/{id}/reset", post(reset))
        .route("/games/{id}/snapshot", get(snapshot))
        .route("/snapshots", post(restore));
    Router::new().nest("/api/v1", api).fallback(fallback).with_state(registry)
}

/// Serves a fresh registry until the process is stopped.
pub async fn serve(addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router(Arc::new(GameRegistry::new()))).await
}

/// [`serve`] on a fresh multi-threaded runtime, for synchronous callers.
pub fn serve_blocking(addr: SocketAddr) -> std::io::Result<()> {
    tokio::runtime::Runtime::new()?.block_on(serve(addr))
}
