//! Subset of the Gerrit `ChangeInfo` wire format and its mapping onto
//! [`RawChange`].
//!
//! Responses carry the `)]}'` XSSI guard line before the JSON array. The
//! last change of a truncated page has `"_more_changes": true`.
//!
//! | RawChange field     | ChangeInfo source                                          |
//! |---------------------|------------------------------------------------------------|
//! | `change_id`         | `id`                                                       |
//! | `project`           | `project`                                                  |
//! | `created_at`        | `created` (UTC, `YYYY-MM-DD hh:mm:ss.fffffffff`)           |
//! | `updated_at`        | `updated`                                                  |
//! | `status`            | `status`: `NEW` open, `MERGED`, `ABANDONED`                |
//! | `insertions`        | `insertions`                                               |
//! | `deletions`         | `deletions`                                                |
//! | `revision_count`    | number of entries in `revisions`                           |
//! | `verified_label`    | lowest non-zero vote in `labels.Verified.all`, else 0      |
//! | `code_review_label` | lowest non-zero vote in `labels.Code-Review.all`, else 0   |
//! | `mergeable`         | `mergeable`                                                |
//! | `subject`           | `subject`                                                  |
//! | `message`           | `revisions[current_revision].commit.message`, else subject |
//! | `reviewer_ids`      | `reviewers.REVIEWER[]._account_id`                         |

use chrono::{DateTime, NaiveDateTime, Utc};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

use super::raw::{ChangeStatus, RawChange};

pub const XSSI_PREFIX: &str = ")]}'";
pub const TIMESTAMP_FORMAT: &str = "%Y-%m-%d %H:%M:%S%.9f";
pub const VERIFIED: &str = "Verified";
pub const CODE_REVIEW: &str = "Code-Review";

#[derive(Debug, Error)]
pub enum WireError {
    #[error("malformed changes response: {source}; payload starts with {excerpt:?}")]
    Json {
        #[source]
        source: serde_json::Error,
        excerpt: String,
    },
    #[error("change `{change}`: field `{field}` {reason}")]
    Field { change: String, field: &'static str, reason: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AccountInfo {
    #[serde(rename = "_account_id")]
    pub account_id: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub username: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApprovalInfo {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<i8>,
    #[serde(rename = "_account_id", default, skip_serializing_if = "Option::is_none")]
    pub account_id: Option<u64>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelInfo {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub all: Option<Vec<ApprovalInfo>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<i8>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommitInfo {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subject: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RevisionInfo {
    #[serde(rename = "_number")]
    pub number: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub commit: Option<CommitInfo>,
}

/// The fields of Gerrit's `ChangeInfo` that ingestion reads. Anything else in
/// a server response is ignored.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChangeInfo {
    pub id: String,
    pub project: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub branch: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub change_id: Option<String>,
    pub subject: String,
    pub status: String,
    pub created: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub updated: Option<String>,
    pub insertions: u64,
    pub deletions: u64,
    #[serde(rename = "_number", default, skip_serializing_if = "Option::is_none")]
    pub number: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mergeable: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub current_revision: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub revisions: Option<BTreeMap<String, RevisionInfo>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub labels: BTreeMap<String, LabelInfo>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub reviewers: BTreeMap<String, Vec<AccountInfo>>,
    #[serde(rename = "_more_changes", default, skip_serializing_if = "Option::is_none")]
    pub more_changes: Option<bool>,
}

pub fn format_timestamp(t: DateTime<Utc>) -> String {
    t.format(TIMESTAMP_FORMAT).to_string()
}

pub fn parse_timestamp(s: &str) -> Option<DateTime<Utc>> {
    NaiveDateTime::parse_from_str(s, "%Y-%m-%d %H:%M:%S%.f")
        .ok()
        .map(|n| n.and_utc())
}

/// Parses a changes-query response body, with or without the XSSI guard.
pub fn parse_changes_body(body: &str) -> Result<Vec<ChangeInfo>, WireError> {
    let trimmed = body.trim_start();
    let json = trimmed.strip_prefix(XSSI_PREFIX).unwrap_or(trimmed);
    serde_json::from_str(json).map_err(|source| WireError::Json {
        source,
        excerpt: body.chars().take(120).collect(),
    })
}

/// Renders changes as a server response body.
pub fn encode_changes_body(changes: &[ChangeInfo]) -> String {
    let mut body = String::from(XSSI_PREFIX);
    body.push('\n');
    body.push_str(&serde_json::to_string(changes).expect("change info serializes"));
    body.push('\n');
    body
}

/// Worst standing (non-zero) vote, 0 when nobody voted.
fn aggregate_vote(label: Option<&LabelInfo>) -> i8 {
    let Some(label) = label else { return 0 };
    match &label.all {
        Some(all) => all
            .iter()
            .filter_map(|a| a.value)
            .filter(|&v| v != 0)
            .min()
            .unwrap_or(0),
        None => label.value.unwrap_or(0),
    }
}

impl TryFrom<&ChangeInfo> for RawChange {
    type Error = WireError;

    fn try_from(info: &ChangeInfo) -> Result<Self, Self::Error> {
        let field = |field: &'static str, reason: String| WireError::Field {
            change: info.id.clone(),
            field,
            reason,
        };
        let status = match info.status.as_str() {
            "NEW" => ChangeStatus::Open,
            "MERGED" => ChangeStatus::Merged,
            "ABANDONED" => ChangeStatus::Abandoned,
            other => return Err(field("status", format!("has unknown value {other:?}"))),
        };
        let created_at = parse_timestamp(&info.created)
            .ok_or_else(|| field("created", format!("is not a timestamp: {:?}", info.created)))?;
        let updated_at = match &info.updated {
            Some(u) => Some(
                parse_timestamp(u).ok_or_else(|| field("updated", format!("is not a timestamp: {u:?}")))?,
            ),
            None => None,
        };
        let revisions = info
            .revisions
            .as_ref()
            .filter(|r| !r.is_empty())
            .ok_or_else(|| field("revisions", "is missing or empty".into()))?;

        let verified_label = aggregate_vote(info.labels.get(VERIFIED));
        if !(-1..=1).contains(&verified_label) {
            return Err(field("labels.Verified", format!("vote {verified_label} outside [-1, 1]")));
        }
        let code_review_label = aggregate_vote(info.labels.get(CODE_REVIEW));
        if !(-2..=2).contains(&code_review_label) {
            return Err(field("labels.Code-Review", format!("vote {code_review_label} outside [-2, 2]")));
        }

        let message = info
            .current_revision
            .as_ref()
            .and_then(|rev| revisions.get(rev))
            .and_then(|r| r.commit.as_ref())
            .and_then(|c| c.message.clone())
            .unwrap_or_else(|| info.subject.clone());
        let reviewer_ids = info
            .reviewers
            .get("REVIEWER")
            .map(|rs| rs.iter().map(|a| a.account_id.to_string()).collect())
            .unwrap_or_default();

        Ok(RawChange {
            change_id: info.id.clone(),
            project: info.project.clone(),
            created_at,
            updated_at,
            status,
            insertions: info.insertions,
            deletions: info.deletions,
            revision_count: revisions.len() as u32,
            verified_label,
            code_review_label,
            mergeable: info.mergeable,
            subject: info.subject.clone(),
            message,
            reviewer_ids,
        })
    }
}

/// Parses a body and maps every change onto [`RawChange`].
pub fn extract_raw_changes(body: &str) -> Result<Vec<RawChange>, WireError> {
    parse_changes_body(body)?.iter().map(RawChange::try_from).collect()
}
