//! HTTP side of reviewq: a paginated Gerrit client, an in-process fixture
//! review server, the JSON API and the ingest/retrain scheduler.

pub mod api;
pub mod client;
pub mod clock;
pub mod fixture;
pub mod jobs;
pub mod queue;
pub mod scheduler;
pub mod state;

use std::sync::Arc;

use tokio::net::TcpListener;

pub use api::router;
pub use client::{FetchError, GerritClient, RetryPolicy};
pub use clock::{Clock, ManualClock, SystemClock};
pub use fixture::{Fault, FixtureServer};
pub use jobs::{ingest, load_or_train, retrain};
pub use queue::{prioritize_for_user, PrioritizedList};
pub use scheduler::{run_scheduler, Scheduler};
pub use state::{AppState, Hooks, ServedModel};

/// Serves the API on `listener` with the scheduler running alongside.
pub async fn serve(state: Arc<AppState>, listener: TcpListener) -> std::io::Result<()> {
    let scheduler = tokio::spawn(run_scheduler(state.clone()));
    let result = axum::serve(listener, router(state)).await;
    scheduler.abort();
    result
}
