use serde::{Deserialize, Serialize};

use crate::factors::ChangeType;

/// Keywords that mark a commit message as a given change type. Matching is a
/// case-insensitive substring search.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeywordRule {
    pub change_type: ChangeType,
    pub keywords: Vec<String>,
}

impl KeywordRule {
    pub fn new(change_type: ChangeType, keywords: &[&str]) -> Self {
        KeywordRule {
            change_type,
            keywords: keywords.iter().map(|k| k.to_string()).collect(),
        }
    }

    fn matches(&self, lowered: &str) -> bool {
        self.keywords
            .iter()
            .any(|k| !k.is_empty() && lowered.contains(&k.to_lowercase()))
    }
}

pub fn default_rules() -> Vec<KeywordRule> {
    vec![
        KeywordRule::new(ChangeType::TroubleReport, &["fix", "tr-", "bug", "fault"]),
        KeywordRule::new(ChangeType::Refactoring, &["refactor", "cleanup", "restructure"]),
    ]
}

/// Highest-priority type among the matching rules (TroubleReport, then
/// Feature, then Refactoring); Feature when nothing matches.
pub fn classify_change_type(message: &str, rules: &[KeywordRule]) -> ChangeType {
    let lowered = message.to_lowercase();
    rules
        .iter()
        .filter(|r| r.matches(&lowered))
        .map(|r| r.change_type)
        .min()
        .unwrap_or(ChangeType::Feature)
}
