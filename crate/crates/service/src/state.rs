use std::fmt;
use std::sync::{Arc, Mutex, RwLock};

use chrono::{DateTime, Utc};
use reviewq_core::etl::DatasetStore;
use reviewq_core::{serialize_model, Config, TrainedModel};
use sha2::{Digest, Sha256};

use crate::client::GerritClient;
use crate::clock::Clock;

/// A validated model together with the SHA-256 of its artifact bytes, which
/// identifies it in API responses.
#[derive(Debug, Clone, PartialEq)]
pub struct ServedModel {
    pub model: TrainedModel,
    pub fingerprint: String,
}

impl ServedModel {
    pub fn new(model: TrainedModel) -> Self {
        let fingerprint = fingerprint(&serialize_model(&model));
        ServedModel { model, fingerprint }
    }
}

pub fn fingerprint(artifact: &[u8]) -> String {
    Sha256::digest(artifact).iter().map(|b| format!("{b:02x}")).collect()
}

pub type SwapObserver = Arc<dyn Fn(&Arc<ServedModel>) + Send + Sync>;
pub type TrainingHook = Arc<dyn Fn() + Send + Sync>;

/// Test seams.
#[derive(Clone, Default)]
pub struct Hooks {
    /// Called with every model right after it becomes current.
    pub on_swap: Option<SwapObserver>,
    /// Runs on the training thread before fitting starts.
    pub before_training: Option<TrainingHook>,
}

impl fmt::Debug for Hooks {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Hooks")
            .field("on_swap", &self.on_swap.is_some())
            .field("before_training", &self.before_training.is_some())
            .finish()
    }
}

pub struct AppState {
    config: Config,
    model: RwLock<Option<Arc<ServedModel>>>,
    store: Arc<dyn DatasetStore>,
    client: GerritClient,
    clock: Arc<dyn Clock>,
    started_at: DateTime<Utc>,
    last_ingest_at: Mutex<Option<DateTime<Utc>>>,
    last_train_at: Mutex<Option<DateTime<Utc>>>,
    pub(crate) ingest_gate: tokio::sync::Mutex<()>,
    pub(crate) train_gate: tokio::sync::Mutex<()>,
    hooks: Hooks,
}

impl fmt::Debug for AppState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AppState")
            .field("model", &self.current_model().map(|m| m.fingerprint.clone()))
            .field("review_server", &self.client.base_url().as_str())
            .field("started_at", &self.started_at)
            .finish_non_exhaustive()
    }
}

impl AppState {
    pub fn new(config: Config, store: Arc<dyn DatasetStore>, client: GerritClient, clock: Arc<dyn Clock>) -> Self {
        let started_at = clock.now();
        AppState {
            config,
            model: RwLock::new(None),
            store,
            client,
            clock,
            started_at,
            last_ingest_at: Mutex::new(None),
            last_train_at: Mutex::new(None),
            ingest_gate: tokio::sync::Mutex::new(()),
            train_gate: tokio::sync::Mutex::new(()),
            hooks: Hooks::default(),
        }
    }

    pub fn with_hooks(mut self, hooks: Hooks) -> Self {
        self.hooks = hooks;
        self
    }

    pub fn config(&self) -> &Config {
        &self.config
    }

    pub fn store(&self) -> &Arc<dyn DatasetStore> {
        &self.store
    }

    pub fn client(&self) -> &GerritClient {
        &self.client
    }

    pub fn clock(&self) -> &Arc<dyn Clock> {
        &self.clock
    }

    pub fn hooks(&self) -> &Hooks {
        &self.hooks
    }

    pub fn started_at(&self) -> DateTime<Utc> {
        self.started_at
    }

    /// The model serving right now. Callers keep the `Arc` for the whole
    /// request, so a concurrent swap never changes the model mid-request.
    pub fn current_model(&self) -> Option<Arc<ServedModel>> {
        self.model.read().unwrap().clone()
    }

    /// Makes `model` current in one pointer swap and returns it.
    pub fn install(&self, model: TrainedModel) -> Arc<ServedModel> {
        let served = Arc::new(ServedModel::new(model));
        *self.model.write().unwrap() = Some(served.clone());
        if let Some(observer) = &self.hooks.on_swap {
            observer(&served);
        }
        served
    }

    pub fn last_ingest_at(&self) -> Option<DateTime<Utc>> {
        *self.last_ingest_at.lock().unwrap()
    }

    pub fn last_train_at(&self) -> Option<DateTime<Utc>> {
        *self.last_train_at.lock().unwrap()
    }

    pub(crate) fn mark_ingest(&self, at: DateTime<Utc>) {
        *self.last_ingest_at.lock().unwrap() = Some(at);
    }

    pub(crate) fn mark_train(&self, at: DateTime<Utc>) {
        *self.last_train_at.lock().unwrap() = Some(at);
    }
}
