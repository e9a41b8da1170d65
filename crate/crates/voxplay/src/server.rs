//! HTTP API and live WebSocket endpoint.
//!
//! * `POST /api/v1/sessions` with an [`UploadEnvelope`]: 201 created,
//!   200 duplicate, 409 conflict, 400 malformed, checksum mismatch or
//!   failed integrity check.
//! * `GET /api/v1/patients/{id}/progress`: the progress report, or 404.
//! * `GET /ws/live`: the streaming protocol in [`crate::protocol`].
//!
//! When a bearer token is configured every route requires
//! `Authorization: Bearer <token>`; browsers, which cannot set headers on
//! WebSocket requests, may pass `?access_token=<token>` instead.

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::{Path, Request, State};
use axum::http::{header, StatusCode};
use axum::middleware::{self, Next};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;
use sha2::{Digest, Sha256};
use uuid::Uuid;
use voxplay_core::analytics::RuleTable;
use voxplay_core::session::SessionRecord;

use crate::protocol::{decode_frames, encode_frame, ClientMessage, LiveSession, ProtocolError, ServerMessage};
use crate::store::{checksum, SaveOutcome, SessionStore, StoreError};

pub const API_VERSION: u32 = 1;

/// Upload body. `client_checksum` is the lowercase hex SHA-256 of the exact
/// bytes of the `session` value as sent.
#[derive(Debug, Serialize, Deserialize)]
pub struct UploadEnvelope {
    pub api_version: u32,
    pub client_checksum: String,
    pub session: Box<RawValue>,
}

impl UploadEnvelope {
    pub fn new(session: &SessionRecord) -> Self {
        let raw = serde_json::value::to_raw_value(session).expect("session records always serialize");
        Self {
            api_version: API_VERSION,
            client_checksum: hex::encode(Sha256::digest(raw.get().as_bytes())),
            session: raw,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UploadReceipt {
    pub session_id: Uuid,
    pub checksum: String,
    pub duplicate: bool,
}

#[derive(Debug, Clone)]
pub struct ServerConfig {
    pub data_dir: PathBuf,
    pub bind: SocketAddr,
    pub token: Option<String>,
    pub rules: RuleTable,
}

#[derive(Debug, Clone)]
pub struct AppState {
    pub store: Arc<SessionStore>,
    pub token: Option<Arc<str>>,
    pub rules: Arc<RuleTable>,
}

impl AppState {
    pub fn new(store: SessionStore, token: Option<String>, rules: RuleTable) -> Self {
        Self {
            store: Arc::new(store),
            token: token.filter(|t| !t.is_empty()).map(Into::into),
            rules: Arc::new(rules),
        }
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/api/v1/sessions", post(upload))
        .route("/api/v1/patients/{id}/progress", get(progress))
        .route("/ws/live", get(live))
        .layer(middleware::from_fn_with_state(state.clone(), authorize))
        .with_state(state)
}

/// Serves until `shutdown` resolves.
pub async fn serve(
    listener: tokio::net::TcpListener,
    state: AppState,
    shutdown: impl std::future::Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    axum::serve(listener, router(state)).with_graceful_shutdown(shutdown).await
}

fn error(status: StatusCode, message: impl Into<String>) -> Response {
    (status, Json(serde_json::json!({ "error": message.into() }))).into_response()
}

async fn authorize(State(state): State<AppState>, req: Request, next: Next) -> Response {
    let Some(token) = state.token.as_deref() else {
        return next.run(req).await;
    };
    let from_header = req
        .headers()
        .get(header::AUTHORIZATION)
        .and_then(|v| v.to_str().ok())
        .and_then(|v| v.strip_prefix("Bearer "));
    let from_query = req
        .uri()
        .query()
        .into_iter()
        .flat_map(|q| q.split('&'))
        .find_map(|kv| kv.strip_prefix("access_token="));
    if from_header.or(from_query) == Some(token) {
        next.run(req).await
    } else {
        error(StatusCode::UNAUTHORIZED, "missing or wrong bearer token")
    }
}

async fn upload(State(state): State<AppState>, body: Bytes) -> Response {
    let env: UploadEnvelope = match serde_json::from_slice(&body) {
        Ok(env) => env,
        Err(e) => return error(StatusCode::BAD_REQUEST, format!("malformed envelope: {e}")),
    };
    if env.api_version != API_VERSION {
        return error(
            StatusCode::BAD_REQUEST,
            format!("unsupported api_version {}", env.api_version),
        );
    }
    let sent = hex::encode(Sha256::digest(env.session.get().as_bytes()));
    if !sent.eq_ignore_ascii_case(&env.client_checksum) {
        return error(StatusCode::BAD_REQUEST, "client_checksum does not match session");
    }
    let rec: SessionRecord = match serde_json::from_str(env.session.get()) {
        Ok(rec) => rec,
        Err(e) => return error(StatusCode::BAD_REQUEST, format!("malformed session: {e}")),
    };
    let session_id = rec.session_id;
    let sum = checksum(&rec);
    let store = state.store.clone();
    match tokio::task::spawn_blocking(move || store.save(&rec)).await {
        Ok(Ok(outcome)) => {
            let duplicate = outcome == SaveOutcome::Unchanged;
            let status = if duplicate { StatusCode::OK } else { StatusCode::CREATED };
            let receipt = UploadReceipt {
                session_id,
                checksum: sum,
                duplicate,
            };
            (status, Json(receipt)).into_response()
        }
        Ok(Err(e @ StoreError::Conflict { .. })) => error(StatusCode::CONFLICT, e.to_string()),
        Ok(Err(e @ StoreError::Invalid(_))) => error(StatusCode::BAD_REQUEST, e.to_string()),
        Ok(Err(e)) => {
            tracing::error!(error = %e, "storing upload failed");
            error(StatusCode::INTERNAL_SERVER_ERROR, e.to_string())
        }
        Err(e) => error(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()),
    }
}

async fn progress(State(state): State<AppState>, Path(patient): Path<String>) -> Response {
    let store = state.store.clone();
    let rules = state.rules.clone();
    match tokio::task::spawn_blocking(move || store.progress(&patient, &rules)).await {
        Ok(Ok(report)) => Json(report).into_response(),
        Ok(Err(e @ StoreError::NotFound(_))) => error(StatusCode::NOT_FOUND, e.to_string()),
        Ok(Err(e)) => {
            tracing::error!(error = %e, "progress query failed");
            error(StatusCode::INTERNAL_SERVER_ERROR, e.to_string())
        }
        Err(e) => error(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()),
    }
}

async fn live(State(state): State<AppState>, ws: WebSocketUpgrade) -> Response {
    ws.on_upgrade(move |socket| run_live(socket, state.store))
}

async fn send(socket: &mut WebSocket, msgs: &[ServerMessage]) -> bool {
    if msgs.is_empty() {
        return true;
    }
    let body: Vec<u8> = msgs.iter().flat_map(encode_frame).collect();
    socket.send(Message::Binary(body.into())).await.is_ok()
}

async fn persist(store: &Arc<SessionStore>, rec: SessionRecord) -> ServerMessage {
    let id = rec.session_id;
    let store = store.clone();
    match tokio::task::spawn_blocking(move || store.save(&rec)).await {
        Ok(Ok(_)) => ServerMessage::SessionSaved { session_id: id },
        Ok(Err(e)) => {
            tracing::error!(session = %id, error = %e, "saving live session failed");
            ServerMessage::Error {
                message: format!("session {id} could not be saved: {e}"),
            }
        }
        Err(e) => ServerMessage::Error { message: e.to_string() },
    }
}

async fn run_live(mut socket: WebSocket, store: Arc<SessionStore>) {
    let mut session = LiveSession::new();
    while let Some(Ok(msg)) = socket.recv().await {
        let frames: Result<Vec<ClientMessage>, ProtocolError> = match msg {
            Message::Binary(bytes) => decode_frames(&bytes),
            Message::Text(_) => Err(ProtocolError::Malformed("expected binary frames".into())),
            Message::Close(_) => break,
            _ => continue,
        };
        let result = frames.and_then(|frames| {
            let mut all = Vec::new();
            let mut completed = None;
            for frame in frames {
                let out = session.handle(frame, chrono::Utc::now())?;
                all.extend(out.messages);
                completed = completed.or(out.completed);
            }
            Ok((all, completed))
        });
        match result {
            Ok((mut msgs, completed)) => {
                if let Some(rec) = completed {
                    msgs.push(persist(&store, rec).await);
                }
                if !send(&mut socket, &msgs).await {
                    break;
                }
            }
            Err(e) => {
                tracing::warn!(error = %e, "closing live stream");
                let _ = send(&mut socket, &[ServerMessage::Error { message: e.to_string() }]).await;
                let _ = socket.send(Message::Close(None)).await;
                break;
            }
        }
    }
    // A dropped connection ends the session as STOP would, so no played time is lost.
    match session.abort() {
        Ok(Some(rec)) => {
            let _ = persist(&store, rec).await;
        }
        Ok(None) => {}
        Err(e) => tracing::error!(error = %e, "could not close interrupted session"),
    }
}
