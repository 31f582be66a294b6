//! Ingestion, retraining and start-up model loading.

use std::collections::HashSet;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use chrono::{DateTime, Utc};
use reviewq_core::bn::ArtifactError;
use reviewq_core::etl::{observe_for_dataset, StoreError};
use reviewq_core::{deserialize_model, serialize_model, train_model, TrainError};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::client::FetchError;
use crate::state::{AppState, ServedModel};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngestSummary {
    pub snapshot_at: DateTime<Utc>,
    pub fetched: usize,
    pub stored: usize,
    /// Changes dropped because they failed transformation.
    pub skipped: usize,
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error(transparent)]
    Fetch(#[from] FetchError),
    #[error(transparent)]
    Store(#[from] StoreError),
}

/// Pulls changes updated within the configured window plus every open
/// change, transforms them at the current instant and upserts them.
pub async fn ingest(state: &AppState) -> Result<IngestSummary, IngestError> {
    let _writer = state.ingest_gate.lock().await;
    let cfg = state.config();
    let snapshot_at = state.clock().now();
    let recent = state.client().fetch_changes(&format!("-age:{}d", cfg.ingest.window_days)).await?;
    let open = state.client().fetch_changes("status:open").await?;

    let mut seen = HashSet::new();
    let changes: Vec<_> = recent.into_iter().chain(open).filter(|c| seen.insert(c.change_id.clone())).collect();
    let mut rows = Vec::with_capacity(changes.len());
    let mut skipped = 0;
    for change in &changes {
        match observe_for_dataset(change, snapshot_at, cfg.ingest.age_endpoint, &cfg.change_types) {
            Ok(row) => rows.push(row),
            Err(e) => {
                tracing::warn!(change = %change.change_id, error = %e, "skipping change");
                skipped += 1;
            }
        }
    }
    state.store().upsert(&rows)?;
    state.mark_ingest(snapshot_at);
    Ok(IngestSummary { snapshot_at, fetched: changes.len(), stored: rows.len(), skipped })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainSummary {
    pub rows: u64,
    pub trained_at: DateTime<Utc>,
    pub fingerprint: String,
}

#[derive(Debug, Error)]
pub enum RetrainError {
    #[error("dataset is empty")]
    EmptyDataset,
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error("training failed: {0}")]
    Train(TrainError),
    #[error("trained model failed validation: {0}")]
    Invalid(String),
    #[error("cannot write model artifact {path}: {source}")]
    Persist {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("training task aborted: {0}")]
    Aborted(String),
}

impl From<TrainError> for RetrainError {
    fn from(e: TrainError) -> Self {
        match e {
            TrainError::EmptyDataset => RetrainError::EmptyDataset,
            other => RetrainError::Train(other),
        }
    }
}

/// Writes next to `path` and renames over it.
pub fn write_artifact(path: &Path, bytes: &[u8]) -> io::Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)
}

/// Trains on the stored dataset, checks the artifact round-trips, persists
/// it and swaps it in. Any failure leaves the current model untouched.
pub async fn retrain(state: &AppState) -> Result<TrainSummary, RetrainError> {
    let _trainer = state.train_gate.lock().await;
    let rows = state.store().load()?;
    if !rows.iter().any(|r| r.is_closed()) {
        return Err(RetrainError::EmptyDataset);
    }
    let structure = state.config().model.structure();
    let alpha = state.config().model.alpha;
    let trained_at = state.clock().now();
    let hook = state.hooks().before_training.clone();
    let model = tokio::task::spawn_blocking(move || {
        if let Some(h) = hook {
            h();
        }
        train_model(&rows, &structure, alpha, trained_at)
    })
    .await
    .map_err(|e| RetrainError::Aborted(e.to_string()))??;

    let bytes = serialize_model(&model);
    let reloaded = deserialize_model(&bytes).map_err(|e| RetrainError::Invalid(e.to_string()))?;
    if reloaded != model {
        return Err(RetrainError::Invalid("artifact does not round-trip".into()));
    }
    let path = &state.config().model.path;
    write_artifact(path, &bytes).map_err(|source| RetrainError::Persist { path: path.clone(), source })?;

    let served = state.install(model);
    state.mark_train(trained_at);
    Ok(summary(&served))
}

fn summary(served: &ServedModel) -> TrainSummary {
    TrainSummary {
        rows: served.model.training_rows(),
        trained_at: served.model.trained_at(),
        fingerprint: served.fingerprint.clone(),
    }
}

#[derive(Debug, Error)]
pub enum StartupError {
    #[error("cannot read model artifact {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("model artifact {path} is invalid: {source}")]
    Artifact {
        path: PathBuf,
        #[source]
        source: ArtifactError,
    },
    #[error(transparent)]
    Retrain(RetrainError),
}

/// Loads the persisted artifact, or trains from the store when there is
/// none. An empty store leaves the service without a model (prioritize then
/// answers 503); a corrupt artifact is an error.
pub async fn load_or_train(state: &Arc<AppState>) -> Result<Option<Arc<ServedModel>>, StartupError> {
    let path = state.config().model.path.clone();
    match fs::read(&path) {
        Ok(bytes) => {
            let model = deserialize_model(&bytes).map_err(|source| StartupError::Artifact { path, source })?;
            Ok(Some(state.install(model)))
        }
        Err(e) if e.kind() == io::ErrorKind::NotFound => match retrain(state).await {
            Ok(_) => Ok(state.current_model()),
            Err(RetrainError::EmptyDataset) => {
                tracing::warn!("no model artifact and the dataset is empty; serving without a model");
                Ok(None)
            }
            Err(e) => Err(StartupError::Retrain(e)),
        },
        Err(source) => Err(StartupError::Read { path, source }),
    }
}
