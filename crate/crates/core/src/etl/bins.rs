//! Tercile discretization of the numeric factors.
//!
//! Cuts are the 1/3 and 2/3 nearest-rank percentiles of the training values
//! (1-based rank `ceil(p * n)`). A value equal to a cut belongs to the lower
//! bin.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::transform::Observation;
use crate::factors::{AgeCategory, Category, FactorVector, PatchesCategory, SizeCategory};

pub const NEAREST_RANK_TERCILE: &str = "nearest-rank-tercile";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BinError {
    #[error("cannot fit bins for `{0}`: no training values")]
    Empty(&'static str),
    #[error("cannot fit bins for `{0}`: non-finite value {1}")]
    NonFinite(&'static str, f64),
    #[error("lower cut {lower} exceeds upper cut {upper}")]
    Inverted { lower: f64, upper: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawCuts")]
pub struct Cuts {
    lower_cut: f64,
    upper_cut: f64,
}

#[derive(Deserialize)]
struct RawCuts {
    lower_cut: f64,
    upper_cut: f64,
}

impl TryFrom<RawCuts> for Cuts {
    type Error = BinError;

    fn try_from(raw: RawCuts) -> Result<Self, Self::Error> {
        Cuts::new(raw.lower_cut, raw.upper_cut)
    }
}

impl Cuts {
    pub fn new(lower_cut: f64, upper_cut: f64) -> Result<Self, BinError> {
        if !(lower_cut <= upper_cut) {
            return Err(BinError::Inverted { lower: lower_cut, upper: upper_cut });
        }
        Ok(Cuts { lower_cut, upper_cut })
    }

    pub fn lower(&self) -> f64 {
        self.lower_cut
    }

    pub fn upper(&self) -> f64 {
        self.upper_cut
    }

    /// 0, 1 or 2 for the low, middle and high bin.
    pub fn bin(&self, value: f64) -> usize {
        if value <= self.lower_cut {
            0
        } else if value <= self.upper_cut {
            1
        } else {
            2
        }
    }

    /// Nearest-rank terciles of `values`.
    pub fn fit(factor: &'static str, values: &[f64]) -> Result<Self, BinError> {
        if values.is_empty() {
            return Err(BinError::Empty(factor));
        }
        if let Some(&bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(BinError::NonFinite(factor, bad));
        }
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let n = sorted.len();
        // ceil(n/3) and ceil(2n/3) as 1-based ranks
        let lower_rank = n.div_ceil(3);
        let upper_rank = (2 * n).div_ceil(3);
        Cuts::new(sorted[lower_rank - 1], sorted[upper_rank - 1])
    }
}

/// Training-time cuts for the three binned factors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinThresholds {
    pub age_minutes: Cuts,
    pub size_lines: Cuts,
    pub revision_count: Cuts,
    pub method: String,
}

impl BinThresholds {
    /// Hand-specified cuts; panics if a pair is inverted.
    pub fn fixed(age: (f64, f64), size: (f64, f64), revisions: (f64, f64)) -> Self {
        BinThresholds {
            age_minutes: Cuts::new(age.0, age.1).expect("ordered age cuts"),
            size_lines: Cuts::new(size.0, size.1).expect("ordered size cuts"),
            revision_count: Cuts::new(revisions.0, revisions.1).expect("ordered revision cuts"),
            method: "fixed".to_string(),
        }
    }
}

/// Fits terciles for age (minutes), size (lines) and patch-set count.
pub fn fit_bins(
    age_minutes: &[f64],
    size_lines: &[f64],
    revision_count: &[f64],
) -> Result<BinThresholds, BinError> {
    Ok(BinThresholds {
        age_minutes: Cuts::fit("age_minutes", age_minutes)?,
        size_lines: Cuts::fit("size_lines", size_lines)?,
        revision_count: Cuts::fit("revision_count", revision_count)?,
        method: NEAREST_RANK_TERCILE.to_string(),
    })
}

/// Fits bins on the raw factor values of `rows`.
pub fn fit_bins_on(rows: &[Observation]) -> Result<BinThresholds, BinError> {
    let age: Vec<f64> = rows.iter().map(|r| r.age_minutes).collect();
    let size: Vec<f64> = rows.iter().map(|r| r.size_lines as f64).collect();
    let revs: Vec<f64> = rows.iter().map(|r| r.revision_count as f64).collect();
    fit_bins(&age, &size, &revs)
}

/// Maps an observation onto categories; verdicts and side factors pass through.
pub fn discretize(obs: &Observation, bins: &BinThresholds) -> FactorVector {
    FactorVector {
        change_id: obs.change_id.clone(),
        age: AgeCategory::from_index(bins.age_minutes.bin(obs.age_minutes)).expect("three bins"),
        size: SizeCategory::from_index(bins.size_lines.bin(obs.size_lines as f64)).expect("three bins"),
        patches: PatchesCategory::from_index(bins.revision_count.bin(obs.revision_count as f64))
            .expect("three bins"),
        test_verdict: obs.test_verdict,
        peer_review: obs.peer_review,
        change_type: obs.change_type,
        merge_conflict: obs.merge_conflict,
        outcome: obs.outcome,
    }
}
