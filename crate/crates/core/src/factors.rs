//! Factor domains shared by the ETL transform, the network and the prioritizer.
//!
//! Every categorical factor has a fixed, ordered set of labels. The labels are
//! what appears in model artifacts and network evidence, so they must not
//! change between releases.

use serde::{Deserialize, Serialize};
use std::fmt;

/// Network variable names for the in-network factors.
pub mod var {
    pub const AGE: &str = "age";
    pub const SIZE: &str = "size";
    pub const NUM_PATCHES: &str = "num_patches";
    pub const TEST_VERDICT: &str = "test_verdict";
    pub const PEER_REVIEW: &str = "peer_review";
    pub const CHANGE_STATUS: &str = "change_status";
}

/// A closed set of labelled states.
pub trait Category: Copy + Sized + 'static {
    const ALL: &'static [Self];

    fn label(self) -> &'static str;

    fn index(self) -> usize {
        Self::ALL
            .iter()
            .position(|c| c.label() == self.label())
            .expect("variant listed in ALL")
    }

    fn from_label(label: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|c| c.label() == label)
    }

    fn from_index(index: usize) -> Option<Self> {
        Self::ALL.get(index).copied()
    }

    fn labels() -> Vec<String> {
        Self::ALL.iter().map(|c| c.label().to_string()).collect()
    }
}

macro_rules! category {
    ($(#[$meta:meta])* $name:ident { $($variant:ident => $label:literal),+ $(,)? }) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        pub enum $name {
            $(
                #[serde(rename = $label)]
                $variant,
            )+
        }

        impl Category for $name {
            const ALL: &'static [Self] = &[$($name::$variant),+];

            fn label(self) -> &'static str {
                match self {
                    $($name::$variant => $label,)+
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.label())
            }
        }
    };
}

category!(
    /// Tercile of the minutes elapsed since the review request was created.
    AgeCategory { Young => "Young", Medium => "Medium", Old => "Old" }
);

category!(
    /// Tercile of added plus deleted lines.
    SizeCategory { Small => "Small", Medium => "Medium", Large => "Large" }
);

category!(
    /// Tercile of the number of patch sets.
    PatchesCategory { Low => "Low", Medium => "Medium", High => "High" }
);

category!(
    /// Automated verification vote.
    TestVerdict { Failed => "-1", NotFinished => "0", Passed => "+1" }
);

category!(
    /// Aggregate human review vote.
    PeerReview {
        MajorCorrections => "-2",
        MinorCorrections => "-1",
        NoVerdict => "0",
        ApprovedNeedsAnother => "+1",
        Approved => "+2",
    }
);

category!(
    /// Terminal state of a closed change.
    Outcome { Abandoned => "abandoned", Merged => "merged" }
);

category!(
    /// Kind of work a change carries, in priority order.
    ChangeType { TroubleReport => "TroubleReport", Feature => "Feature", Refactoring => "Refactoring" }
);

category!(
    MergeConflict { No => "No", Yes => "Yes" }
);

impl TestVerdict {
    pub fn from_vote(vote: i8) -> Option<Self> {
        match vote {
            -1 => Some(TestVerdict::Failed),
            0 => Some(TestVerdict::NotFinished),
            1 => Some(TestVerdict::Passed),
            _ => None,
        }
    }

    pub fn vote(self) -> i8 {
        self.index() as i8 - 1
    }
}

impl PeerReview {
    pub fn from_vote(vote: i8) -> Option<Self> {
        match vote {
            -2..=2 => Self::from_index((vote + 2) as usize),
            _ => None,
        }
    }

    pub fn vote(self) -> i8 {
        self.index() as i8 - 2
    }
}

impl Outcome {
    /// Regression target: merged = 1, abandoned = 0.
    pub fn target(self) -> f64 {
        match self {
            Outcome::Merged => 1.0,
            Outcome::Abandoned => 0.0,
        }
    }
}

impl MergeConflict {
    pub fn from_mergeable(mergeable: bool) -> Self {
        if mergeable {
            MergeConflict::No
        } else {
            MergeConflict::Yes
        }
    }
}

/// Discretized factor assignment for one change.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactorVector {
    pub change_id: String,
    pub age: AgeCategory,
    pub size: SizeCategory,
    pub patches: PatchesCategory,
    pub test_verdict: TestVerdict,
    pub peer_review: PeerReview,
    pub change_type: ChangeType,
    pub merge_conflict: MergeConflict,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outcome: Option<Outcome>,
}

impl FactorVector {
    /// `(variable, label)` pairs for the five in-network factors.
    pub fn network_factors(&self) -> [(&'static str, &'static str); 5] {
        [
            (var::AGE, self.age.label()),
            (var::SIZE, self.size.label()),
            (var::NUM_PATCHES, self.patches.label()),
            (var::TEST_VERDICT, self.test_verdict.label()),
            (var::PEER_REVIEW, self.peer_review.label()),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vote_mapping() {
        assert_eq!(TestVerdict::from_vote(-1), Some(TestVerdict::Failed));
        assert_eq!(TestVerdict::from_vote(2), None);
        assert_eq!(PeerReview::from_vote(-2), Some(PeerReview::MajorCorrections));
        assert_eq!(PeerReview::from_vote(2), Some(PeerReview::Approved));
        assert_eq!(PeerReview::from_vote(3), None);
        for v in PeerReview::ALL {
            assert_eq!(PeerReview::from_vote(v.vote()), Some(*v));
        }
        for v in TestVerdict::ALL {
            assert_eq!(TestVerdict::from_vote(v.vote()), Some(*v));
        }
    }

    #[test]
    fn labels_are_unique() {
        fn check<C: Category>() {
            let labels = C::labels();
            let mut dedup = labels.clone();
            dedup.sort();
            dedup.dedup();
            assert_eq!(labels.len(), dedup.len());
        }
        check::<AgeCategory>();
        check::<SizeCategory>();
        check::<PatchesCategory>();
        check::<TestVerdict>();
        check::<PeerReview>();
        check::<Outcome>();
        check::<ChangeType>();
        check::<MergeConflict>();
    }

    #[test]
    fn serde_uses_labels() {
        assert_eq!(serde_json::to_string(&TestVerdict::Passed).unwrap(), "\"+1\"");
        assert_eq!(
            serde_json::from_str::<PeerReview>("\"-2\"").unwrap(),
            PeerReview::MajorCorrections
        );
    }
}
