use chrono::{DateTime, Utc};
use reviewq_core::etl::{observe, KeywordRule, TransformError};
use reviewq_core::pipeline::ScoreError;
use reviewq_core::{rank_observations, PrioritizedItem};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::client::{FetchError, GerritClient};
use crate::state::ServedModel;

/// A reviewer's ranked queue and the model that ranked it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrioritizedList {
    pub user: String,
    /// The instant ages were measured to.
    pub generated_at: DateTime<Utc>,
    pub model_trained_at: DateTime<Utc>,
    pub model_fingerprint: String,
    pub items: Vec<PrioritizedItem>,
}

#[derive(Debug, Error)]
pub enum QueueError {
    #[error(transparent)]
    Fetch(#[from] FetchError),
    #[error("review server returned an unusable change: {0}")]
    Transform(#[from] TransformError),
    #[error(transparent)]
    Score(#[from] ScoreError),
}

/// Live-fetches `user`'s open review requests and ranks them with `served`,
/// using the bins stored in that model.
pub async fn prioritize_for_user(
    client: &GerritClient,
    served: &ServedModel,
    rules: &[KeywordRule],
    now: DateTime<Utc>,
    user: &str,
) -> Result<PrioritizedList, QueueError> {
    let changes = client.fetch_open_for_reviewer(user).await?;
    let observations = changes
        .iter()
        .map(|c| observe(c, now, rules))
        .collect::<Result<Vec<_>, _>>()?;
    let items = rank_observations(&served.model, &observations)?;
    Ok(PrioritizedList {
        user: user.to_string(),
        generated_at: now,
        model_trained_at: served.model.trained_at(),
        model_fingerprint: served.fingerprint.clone(),
        items,
    })
}
