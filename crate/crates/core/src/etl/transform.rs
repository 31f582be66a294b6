use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::classify::{classify_change_type, KeywordRule};
use super::raw::{ChangeStatus, RawChange};
use crate::factors::{ChangeType, MergeConflict, Outcome, PeerReview, TestVerdict};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TransformError {
    #[error("change `{change}` was created at {created_at}, after the reference time {now}")]
    ClockSkew {
        change: String,
        created_at: DateTime<Utc>,
        now: DateTime<Utc>,
    },
    #[error("change `{change}` has {label} vote {vote} outside its domain")]
    LabelDomain { change: String, label: &'static str, vote: i8 },
    #[error("change `{0}` has no patch sets")]
    NoRevisions(String),
}

/// Numeric factors before discretization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RawFactors {
    pub age_minutes: f64,
    pub size_lines: u64,
    pub revision_count: u32,
}

/// Which instant ends the age of a closed training change.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AgeEndpoint {
    /// The time the dataset snapshot was taken.
    #[default]
    Snapshot,
    /// The change's last update, which for a closed change is its closure.
    Closure,
}

pub fn compute_raw_factors(change: &RawChange, now: DateTime<Utc>) -> Result<RawFactors, TransformError> {
    if now < change.created_at {
        return Err(TransformError::ClockSkew {
            change: change.change_id.clone(),
            created_at: change.created_at,
            now,
        });
    }
    let elapsed = now - change.created_at;
    let age_minutes = match elapsed.num_nanoseconds() {
        Some(ns) => ns as f64 / 60e9,
        None => elapsed.num_milliseconds() as f64 / 60e3,
    };
    Ok(RawFactors {
        age_minutes,
        size_lines: change.insertions + change.deletions,
        revision_count: change.revision_count,
    })
}

/// A transformed change as held in the dataset store: raw numeric factors
/// (binned later, with training-time cuts) plus categorical factors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub change_id: String,
    #[serde(default)]
    pub project: String,
    #[serde(default)]
    pub subject: String,
    pub age_minutes: f64,
    pub size_lines: u64,
    pub revision_count: u32,
    pub test_verdict: TestVerdict,
    pub peer_review: PeerReview,
    pub change_type: ChangeType,
    pub merge_conflict: MergeConflict,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outcome: Option<Outcome>,
}

impl Observation {
    pub fn is_closed(&self) -> bool {
        self.outcome.is_some()
    }
}

/// Transforms one change with its age measured up to `now`.
pub fn observe(
    change: &RawChange,
    now: DateTime<Utc>,
    rules: &[KeywordRule],
) -> Result<Observation, TransformError> {
    if change.revision_count == 0 {
        return Err(TransformError::NoRevisions(change.change_id.clone()));
    }
    let raw = compute_raw_factors(change, now)?;
    let test_verdict = TestVerdict::from_vote(change.verified_label).ok_or(TransformError::LabelDomain {
        change: change.change_id.clone(),
        label: "Verified",
        vote: change.verified_label,
    })?;
    let peer_review = PeerReview::from_vote(change.code_review_label).ok_or(TransformError::LabelDomain {
        change: change.change_id.clone(),
        label: "Code-Review",
        vote: change.code_review_label,
    })?;
    let merge_conflict = match change.mergeable {
        Some(m) => MergeConflict::from_mergeable(m),
        None => {
            tracing::warn!(change = %change.change_id, "mergeable flag missing; assuming no merge conflict");
            MergeConflict::No
        }
    };
    let text = if change.message.is_empty() { &change.subject } else { &change.message };
    let outcome = match change.status {
        ChangeStatus::Open => None,
        ChangeStatus::Merged => Some(Outcome::Merged),
        ChangeStatus::Abandoned => Some(Outcome::Abandoned),
    };
    Ok(Observation {
        change_id: change.change_id.clone(),
        project: change.project.clone(),
        subject: change.subject.clone(),
        age_minutes: raw.age_minutes,
        size_lines: raw.size_lines,
        revision_count: raw.revision_count,
        test_verdict,
        peer_review,
        change_type: classify_change_type(text, rules),
        merge_conflict,
        outcome,
    })
}

/// Transforms a change for the training dataset. Open changes always age up
/// to the snapshot; closed ones follow `endpoint`.
pub fn observe_for_dataset(
    change: &RawChange,
    snapshot: DateTime<Utc>,
    endpoint: AgeEndpoint,
    rules: &[KeywordRule],
) -> Result<Observation, TransformError> {
    let end = match (endpoint, change.status.is_closed(), change.updated_at) {
        (AgeEndpoint::Closure, true, Some(updated)) => updated.min(snapshot),
        _ => snapshot,
    };
    observe(change, end, rules)
}
