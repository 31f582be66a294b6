use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChangeStatus {
    Open,
    Merged,
    Abandoned,
}

impl ChangeStatus {
    pub fn is_closed(self) -> bool {
        !matches!(self, ChangeStatus::Open)
    }
}

/// One review request as extracted from the review server.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawChange {
    pub change_id: String,
    pub project: String,
    pub created_at: DateTime<Utc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub updated_at: Option<DateTime<Utc>>,
    pub status: ChangeStatus,
    pub insertions: u64,
    pub deletions: u64,
    pub revision_count: u32,
    pub verified_label: i8,
    pub code_review_label: i8,
    /// `None` when the server omitted the flag.
    pub mergeable: Option<bool>,
    pub subject: String,
    pub message: String,
    pub reviewer_ids: Vec<String>,
}
