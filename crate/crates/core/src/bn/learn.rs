//! Smoothed maximum-likelihood estimation of CPTs from complete data.
//!
//! For variable `v` under parent configuration `u`:
//!
//! ```text
//! P(v = s | u) = (count(v = s, u) + alpha) / (count(u) + alpha * |states(v)|)
//! ```
//!
//! Parent configurations never seen in training fall back to the uniform row.

use chrono::{DateTime, Utc};

use super::cpt::Cpt;
use super::error::{LearnError, ModelError};
use super::model::{Assignment, BayesNet, TrainedModel};
use super::structure::NetworkStructure;
use crate::etl::bins::BinThresholds;

/// Metadata copied verbatim into the learned model.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingMeta {
    pub bins: BinThresholds,
    pub trained_at: DateTime<Utc>,
}

pub fn learn_cpts(
    dataset: &[Assignment],
    structure: &NetworkStructure,
    alpha: f64,
    meta: TrainingMeta,
) -> Result<TrainedModel, LearnError> {
    let network = fit_network(dataset, structure, alpha)?;
    Ok(TrainedModel::new(network, meta.bins, meta.trained_at, dataset.len() as u64, alpha)?)
}

/// Counts and smooths every CPT of `structure` over `dataset`.
pub fn fit_network(
    dataset: &[Assignment],
    structure: &NetworkStructure,
    alpha: f64,
) -> Result<BayesNet, LearnError> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(ModelError::InvalidAlpha(alpha).into());
    }
    let encoded = dataset
        .iter()
        .enumerate()
        .map(|(row, a)| encode_row(structure, row, a))
        .collect::<Result<Vec<_>, _>>()?;
    fit_encoded(&encoded, structure, alpha)
}

/// Same as [`fit_network`] for rows already encoded as state indices in
/// variable order. Indices are trusted.
pub fn fit_encoded(
    rows: &[Vec<usize>],
    structure: &NetworkStructure,
    alpha: f64,
) -> Result<BayesNet, LearnError> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(ModelError::InvalidAlpha(alpha).into());
    }
    let mut cpts = Vec::with_capacity(structure.len());
    for var in 0..structure.len() {
        let parents = structure.parents(var);
        let cards: Vec<usize> = parents
            .iter()
            .map(|&p| structure.variable(p).cardinality())
            .collect();
        let states = structure.variable(var).cardinality();
        let configs: usize = cards.iter().product();

        let mut counts = vec![0u64; configs * states];
        for row in rows {
            let config = parents
                .iter()
                .zip(&cards)
                .fold(0, |acc, (&p, &card)| acc * card + row[p]);
            counts[config * states + row[var]] += 1;
        }

        let mut probs = Vec::with_capacity(counts.len());
        for chunk in counts.chunks(states) {
            let total: u64 = chunk.iter().sum();
            let denom = total as f64 + alpha * states as f64;
            probs.extend(chunk.iter().map(|&c| (c as f64 + alpha) / denom));
        }
        let cpt = Cpt::new(
            structure.variable(var).name.clone(),
            structure.parent_names(var),
            cards,
            states,
            probs,
        )
        .map_err(ModelError::from)?;
        cpts.push(cpt);
    }
    Ok(BayesNet::new(structure.clone(), cpts)?)
}

fn encode_row(
    structure: &NetworkStructure,
    row: usize,
    assignment: &Assignment,
) -> Result<Vec<usize>, LearnError> {
    if let Some((name, _)) = assignment.iter().find(|(n, _)| !structure.contains(n)) {
        return Err(LearnError::UnknownVariable { row, variable: name.to_string() });
    }
    structure
        .variables()
        .iter()
        .map(|v| {
            let label = assignment.get(&v.name).ok_or_else(|| LearnError::MissingVariable {
                row,
                variable: v.name.clone(),
            })?;
            v.state_index(label).ok_or_else(|| LearnError::UnknownState {
                row,
                variable: v.name.clone(),
                state: label.to_string(),
            })
        })
        .collect()
}
