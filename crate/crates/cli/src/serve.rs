//! HTTP endpoint over one loaded artifact.

use std::net::SocketAddr;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{DefaultBodyLimit, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use triage_core::store::{PipelineArtifact, FORMAT_VERSION};
use triage_core::Pipeline;

pub const MAX_BODY_BYTES: usize = 64 * 1024;
pub const TOP_N: usize = 5;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifyRequest {
    pub description: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifyResponse {
    pub category: String,
    pub confidence: f64,
    pub top: Vec<(String, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Health {
    pub version: u64,
    pub fingerprint: String,
}

struct AppState {
    pipeline: Pipeline,
    fingerprint: String,
}

pub fn classify(pipeline: &Pipeline, text: &str) -> ClassifyResponse {
    let p = pipeline.classify(text);
    ClassifyResponse {
        category: p.label.clone(),
        confidence: p.confidence(),
        top: p.top(pipeline.label_map(), TOP_N),
    }
}

fn error(status: StatusCode, message: impl Into<String>) -> Response {
    (status, Json(serde_json::json!({ "error": message.into() }))).into_response()
}

async fn classify_handler(State(state): State<Arc<AppState>>, body: Bytes) -> Response {
    match serde_json::from_slice::<ClassifyRequest>(&body) {
        Ok(req) => Json(classify(&state.pipeline, &req.description)).into_response(),
        Err(e) => error(
            StatusCode::BAD_REQUEST,
            format!("malformed request body: {e}"),
        ),
    }
}

async fn health_handler(State(state): State<Arc<AppState>>) -> Json<Health> {
    Json(Health {
        version: FORMAT_VERSION,
        fingerprint: state.fingerprint.clone(),
    })
}

pub fn router(pipeline: Pipeline, artifact: &PipelineArtifact) -> Router {
    let state = Arc::new(AppState {
        pipeline,
        fingerprint: artifact.training_fingerprint.render(),
    });
    Router::new()
        .route("/classify", post(classify_handler))
        .route("/health", get(health_handler))
        .layer(DefaultBodyLimit::max(MAX_BODY_BYTES))
        .with_state(state)
}

/// Binds `addr` and serves until the process is stopped. The bound address
/// is printed first so callers can pass port 0.
pub async fn run(router: Router, addr: SocketAddr) -> anyhow::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    println!("listening on http://{}", listener.local_addr()?);
    use std::io::Write;
    std::io::stdout().flush()?;
    axum::serve(listener, router).await?;
    Ok(())
}
