//! Orders a reviewer's open requests.
//!
//! Lexicographic on: merge conflict (clean first), change type (trouble
//! reports, then features, then refactorings), merge probability (descending),
//! age (older first), change id (ascending). The last key makes the order
//! total, so the result does not depend on input order.

use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use thiserror::Error;

use crate::factors::{ChangeType, MergeConflict};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PrioritizeError {
    #[error("change `{change_id}` has merge probability {value} outside [0, 1]")]
    ProbabilityOutOfRange { change_id: String, value: f64 },
}

/// An open request waiting to be ranked.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReviewItem {
    pub change_id: String,
    pub subject: String,
    pub merge_conflict: MergeConflict,
    pub change_type: ChangeType,
    pub merge_probability: f64,
    pub age_minutes: f64,
    /// The probability is a fallback rather than a model posterior.
    #[serde(default)]
    pub degraded: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrioritizedItem {
    pub rank: usize,
    pub change_id: String,
    pub subject: String,
    pub merge_conflict: MergeConflict,
    pub change_type: ChangeType,
    pub merge_probability: f64,
    pub age_minutes: f64,
    pub degraded: bool,
}

pub fn priority_order(a: &ReviewItem, b: &ReviewItem) -> Ordering {
    a.merge_conflict
        .cmp(&b.merge_conflict)
        .then(a.change_type.cmp(&b.change_type))
        .then(b.merge_probability.total_cmp(&a.merge_probability))
        .then(b.age_minutes.total_cmp(&a.age_minutes))
        .then_with(|| a.change_id.cmp(&b.change_id))
}

pub fn prioritize(mut items: Vec<ReviewItem>) -> Result<Vec<PrioritizedItem>, PrioritizeError> {
    if let Some(bad) = items
        .iter()
        .find(|i| !(0.0..=1.0).contains(&i.merge_probability))
    {
        return Err(PrioritizeError::ProbabilityOutOfRange {
            change_id: bad.change_id.clone(),
            value: bad.merge_probability,
        });
    }
    items.sort_by(priority_order);
    Ok(items
        .into_iter()
        .enumerate()
        .map(|(i, item)| PrioritizedItem {
            rank: i + 1,
            change_id: item.change_id,
            subject: item.subject,
            merge_conflict: item.merge_conflict,
            change_type: item.change_type,
            merge_probability: item.merge_probability,
            age_minutes: item.age_minutes,
            degraded: item.degraded,
        })
        .collect())
}
