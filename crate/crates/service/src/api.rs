//! JSON API under `/api/v1`.
//!
//! | route | success | failures |
//! |---|---|---|
//! | `GET prioritize?user=` | 200 [`PrioritizedList`] | 400 no user, 502 review server, 503 no model |
//! | `POST retrain` | 200 [`TrainSummary`] | 409 empty dataset, 500 training failed |
//! | `GET model/info` | 200 [`ModelInfo`] | 503 no model |
//! | `GET health` | 200 [`Health`] | none |
//!
//! Failures carry an [`ApiError`] body.

use std::collections::HashMap;
use std::sync::Arc;

use axum::extract::{Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use chrono::{DateTime, Duration, Utc};
use reviewq_core::bn::FORMAT_VERSION;
use reviewq_core::BinThresholds;
use serde::{Deserialize, Serialize};

use crate::jobs::{retrain, RetrainError};
use crate::queue::{prioritize_for_user, QueueError};
use crate::state::AppState;

/// Suggested wait after a review-server failure.
pub const RETRY_AFTER_SECONDS: u64 = 30;

/// Health turns WARN once the last ingest is older than twice the daily
/// ingestion interval.
pub const INGEST_STALE_AFTER: Duration = Duration::days(2);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApiError {
    pub error: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub retry_after_seconds: Option<u64>,
}

fn error(status: StatusCode, message: impl Into<String>) -> Response {
    (status, Json(ApiError { error: message.into(), retry_after_seconds: None })).into_response()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariableInfo {
    pub name: String,
    pub states: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelInfo {
    pub fingerprint: String,
    pub format_version: String,
    pub trained_at: DateTime<Utc>,
    pub training_rows: u64,
    pub smoothing_alpha: f64,
    pub variables: Vec<VariableInfo>,
    pub edges: Vec<(String, String)>,
    pub bins: BinThresholds,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum HealthStatus {
    Ok,
    Warn,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Health {
    pub status: HealthStatus,
    pub now: DateTime<Utc>,
    pub model_loaded: bool,
    pub model_trained_at: Option<DateTime<Utc>>,
    pub last_ingest_at: Option<DateTime<Utc>>,
    pub last_train_at: Option<DateTime<Utc>>,
    pub warnings: Vec<String>,
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/api/v1/prioritize", get(prioritize))
        .route("/api/v1/retrain", post(retrain_now))
        .route("/api/v1/model/info", get(model_info))
        .route("/api/v1/health", get(health))
        .with_state(state)
}

async fn prioritize(State(state): State<Arc<AppState>>, Query(params): Query<HashMap<String, String>>) -> Response {
    let user = params.get("user").map(|u| u.trim()).unwrap_or("");
    if user.is_empty() {
        return error(StatusCode::BAD_REQUEST, "query parameter `user` is required");
    }
    let Some(served) = state.current_model() else {
        return error(StatusCode::SERVICE_UNAVAILABLE, "no model is loaded; ingest data and retrain first");
    };
    let now = state.clock().now();
    match prioritize_for_user(state.client(), &served, &state.config().change_types, now, user).await {
        Ok(list) => Json(list).into_response(),
        Err(QueueError::Fetch(e)) => {
            tracing::warn!(user, error = %e, "prioritize: review server failed");
            (
                StatusCode::BAD_GATEWAY,
                [(header::RETRY_AFTER, RETRY_AFTER_SECONDS.to_string())],
                Json(ApiError { error: e.to_string(), retry_after_seconds: Some(RETRY_AFTER_SECONDS) }),
            )
                .into_response()
        }
        Err(e @ QueueError::Transform(_)) => error(StatusCode::BAD_GATEWAY, e.to_string()),
        Err(e) => error(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()),
    }
}

async fn retrain_now(State(state): State<Arc<AppState>>) -> Response {
    match retrain(&state).await {
        Ok(summary) => {
            tracing::info!(rows = summary.rows, model = %summary.fingerprint, "retrained on request");
            Json(summary).into_response()
        }
        Err(RetrainError::EmptyDataset) => error(StatusCode::CONFLICT, RetrainError::EmptyDataset.to_string()),
        Err(e) => {
            tracing::error!(error = %e, "retrain failed; keeping the current model");
            error(StatusCode::INTERNAL_SERVER_ERROR, e.to_string())
        }
    }
}

pub fn model_info_of(served: &crate::state::ServedModel) -> ModelInfo {
    let m = &served.model;
    ModelInfo {
        fingerprint: served.fingerprint.clone(),
        format_version: FORMAT_VERSION.to_string(),
        trained_at: m.trained_at(),
        training_rows: m.training_rows(),
        smoothing_alpha: m.smoothing_alpha(),
        variables: m
            .structure()
            .variables()
            .iter()
            .map(|v| VariableInfo { name: v.name.clone(), states: v.states.clone() })
            .collect(),
        edges: m.structure().edges().to_vec(),
        bins: m.bins().clone(),
    }
}

async fn model_info(State(state): State<Arc<AppState>>) -> Response {
    match state.current_model() {
        Some(served) => Json(model_info_of(&served)).into_response(),
        None => error(StatusCode::SERVICE_UNAVAILABLE, "no model is loaded"),
    }
}

pub fn health_report(state: &AppState, now: DateTime<Utc>) -> Health {
    let model = state.current_model();
    let last_ingest_at = state.last_ingest_at();
    let mut warnings = Vec::new();
    if model.is_none() {
        warnings.push("no model is loaded".to_string());
    }
    let since = last_ingest_at.unwrap_or(state.started_at());
    if now - since > INGEST_STALE_AFTER {
        warnings.push(match last_ingest_at {
            Some(t) => format!("last ingest at {t} is older than {} hours", INGEST_STALE_AFTER.num_hours()),
            None => format!("no ingest since start-up at {since}"),
        });
    }
    Health {
        status: if warnings.is_empty() { HealthStatus::Ok } else { HealthStatus::Warn },
        now,
        model_loaded: model.is_some(),
        model_trained_at: model.map(|m| m.model.trained_at()),
        last_ingest_at,
        last_train_at: state.last_train_at(),
        warnings,
    }
}

async fn health(State(state): State<Arc<AppState>>) -> Json<Health> {
    Json(health_report(&state, state.clock().now()))
}
