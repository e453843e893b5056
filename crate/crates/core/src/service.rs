//! HTTP/JSON facade over [`crate::api`].
//!
//! Stateless: every request carries the full source. Compilation runs on
//! the blocking pool behind a semaphore so a large synthesis job can not
//! starve cheap endpoints such as the health check.

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::rejection::BytesRejection;
use axum::extract::{DefaultBodyLimit, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Value};
use tokio::sync::Semaphore;
use tower_http::services::ServeDir;

use crate::api::{self, ApiError, SimulateRequest, SourceRequest, MAX_SOURCE_BYTES, SCHEMA_VERSION};

pub const DEFAULT_PORT: u16 = 8080;

/// JSON envelope overhead allowed on top of the source limit.
const BODY_SLACK: usize = 64 * 1024;

#[derive(Clone)]
struct AppState {
    workers: Arc<Semaphore>,
}

/// The service routes. Static files are served from `static_dir` for
/// every path outside `/api`.
pub fn router(static_dir: Option<PathBuf>) -> Router {
    let workers = std::thread::available_parallelism().map_or(4, |n| n.get());
    let state = AppState {
        workers: Arc::new(Semaphore::new(workers)),
    };
    let api = Router::new()
        .route("/health", get(health))
        .route("/schema", get(schema))
        .route("/parse", post(parse))
        .route("/synthesize", post(synthesize))
        .route("/simulate", post(simulate))
        .route("/cost", post(cost))
        .fallback(not_found)
        .layer(DefaultBodyLimit::max(MAX_SOURCE_BYTES + BODY_SLACK))
        .with_state(state);
    let app = Router::new().nest("/api", api);
    match static_dir {
        Some(dir) => app.fallback_service(ServeDir::new(dir)),
        None => app,
    }
}

/// Binds `0.0.0.0:port` and serves until interrupted.
pub async fn serve(port: u16, static_dir: Option<PathBuf>) -> std::io::Result<()> {
    let addr = SocketAddr::from(([0, 0, 0, 0], port));
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(static_dir))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}

fn reply(status: StatusCode, body: Value) -> Response {
    (status, [(header::CONTENT_TYPE, "application/json")], body.to_string()).into_response()
}

fn success(body: impl Serialize) -> Response {
    let mut v = serde_json::to_value(body).expect("reports serialize");
    let obj = v.as_object_mut().expect("reports are objects");
    obj.insert("schemaVersion".into(), json!(SCHEMA_VERSION));
    obj.insert("ok".into(), json!(true));
    obj.insert("diagnostics".into(), json!([]));
    reply(StatusCode::OK, v)
}

fn failure(status: StatusCode, e: &ApiError) -> Response {
    reply(
        status,
        json!({
            "schemaVersion": SCHEMA_VERSION,
            "ok": false,
            "diagnostics": e.diagnostics(),
        }),
    )
}

fn error_status(e: &ApiError) -> StatusCode {
    match e {
        ApiError::TooLarge => StatusCode::PAYLOAD_TOO_LARGE,
        _ => StatusCode::BAD_REQUEST,
    }
}

async fn health() -> Response {
    reply(StatusCode::OK, json!({ "ok": true, "schemaVersion": SCHEMA_VERSION }))
}

async fn schema() -> Response {
    (
        [(header::CONTENT_TYPE, "application/schema+json")],
        api::RESPONSE_SCHEMA,
    )
        .into_response()
}

async fn not_found() -> Response {
    let e = ApiError::Request("no such endpoint".into());
    failure(StatusCode::NOT_FOUND, &e)
}

/// Decodes the body, runs `f` on the blocking pool and wraps the result.
async fn handle<Req, Rep>(
    state: AppState,
    body: Result<Bytes, BytesRejection>,
    f: fn(&Req) -> Result<Rep, ApiError>,
) -> Response
where
    Req: DeserializeOwned + Send + 'static,
    Rep: Serialize + Send + 'static,
{
    let bytes = match body {
        Ok(b) => b,
        Err(rejection) => {
            let status = rejection.status();
            let e = if status == StatusCode::PAYLOAD_TOO_LARGE {
                ApiError::TooLarge
            } else {
                ApiError::Request(rejection.body_text())
            };
            return failure(status, &e);
        }
    };
    let req: Req = match serde_json::from_slice(&bytes) {
        Ok(r) => r,
        Err(e) => return failure(StatusCode::BAD_REQUEST, &ApiError::Request(format!("malformed request: {e}"))),
    };
    let Ok(_permit) = state.workers.acquire_owned().await else {
        return failure(StatusCode::SERVICE_UNAVAILABLE, &ApiError::Request("shutting down".into()));
    };
    match tokio::task::spawn_blocking(move || f(&req)).await {
        Ok(Ok(rep)) => success(rep),
        Ok(Err(e)) => failure(error_status(&e), &e),
        Err(_) => failure(
            StatusCode::INTERNAL_SERVER_ERROR,
            &ApiError::Request("internal error while handling the request".into()),
        ),
    }
}

async fn parse(State(s): State<AppState>, body: Result<Bytes, BytesRejection>) -> Response {
    handle::<SourceRequest, _>(s, body, api::parse).await
}

async fn synthesize(State(s): State<AppState>, body: Result<Bytes, BytesRejection>) -> Response {
    handle::<SourceRequest, _>(s, body, api::synthesize_request).await
}

async fn simulate(State(s): State<AppState>, body: Result<Bytes, BytesRejection>) -> Response {
    handle::<SimulateRequest, _>(s, body, api::simulate).await
}

async fn cost(State(s): State<AppState>, body: Result<Bytes, BytesRejection>) -> Response {
    handle::<SourceRequest, _>(s, body, api::cost).await
}
