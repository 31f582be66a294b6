//! Glue shared by the CLI, the HTTP service and the evaluation harness:
//! training from stored observations and scoring open changes.

use chrono::{DateTime, Utc};
use thiserror::Error;

use crate::bn::{
    fit_network, infer_merge_probability, Assignment, Evidence, InferenceError, LearnError,
    ModelError, NetworkStructure, TrainedModel, TERMINAL,
};
use crate::etl::bins::{discretize, fit_bins_on, BinError};
use crate::etl::transform::Observation;
use crate::factors::{Category, FactorVector};
use crate::prioritizer::{prioritize, PrioritizeError, PrioritizedItem, ReviewItem};

/// Neutral probability used when the evidence is impossible under the model.
pub const FALLBACK_PROBABILITY: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TrainError {
    #[error("dataset is empty")]
    EmptyDataset,
    #[error(transparent)]
    Bins(#[from] BinError),
    #[error(transparent)]
    Learn(#[from] LearnError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// In-structure factors of a vector as network evidence.
pub fn evidence_for(structure: &NetworkStructure, factors: &FactorVector) -> Evidence {
    factors
        .network_factors()
        .into_iter()
        .filter(|(name, _)| structure.contains(name))
        .collect()
}

/// Complete training assignment; `None` for rows without an outcome.
pub fn training_assignment(structure: &NetworkStructure, factors: &FactorVector) -> Option<Assignment> {
    let outcome = factors.outcome?;
    let mut a: Assignment = factors
        .network_factors()
        .into_iter()
        .filter(|(name, _)| structure.contains(name))
        .collect();
    a.set(TERMINAL, outcome.label());
    Some(a)
}

/// Fits bins on the closed rows, discretizes them and learns the CPTs.
/// Open rows are ignored.
pub fn train_model(
    rows: &[Observation],
    structure: &NetworkStructure,
    alpha: f64,
    trained_at: DateTime<Utc>,
) -> Result<TrainedModel, TrainError> {
    let closed: Vec<Observation> = rows.iter().filter(|r| r.is_closed()).cloned().collect();
    if closed.is_empty() {
        return Err(TrainError::EmptyDataset);
    }
    let bins = fit_bins_on(&closed)?;
    let assignments: Vec<Assignment> = closed
        .iter()
        .filter_map(|r| training_assignment(structure, &discretize(r, &bins)))
        .collect();
    let network = fit_network(&assignments, structure, alpha)?;
    Ok(TrainedModel::new(network, bins, trained_at, assignments.len() as u64, alpha)?)
}

/// Merge probability with the degenerate-evidence fallback applied.
/// Returns `(probability, degraded)`.
pub fn merge_probability_or_fallback(
    model: &TrainedModel,
    evidence: &Evidence,
) -> Result<(f64, bool), InferenceError> {
    match infer_merge_probability(model, evidence) {
        Ok(p) => Ok((p, false)),
        Err(InferenceError::DegenerateEvidence) => {
            tracing::warn!("evidence impossible under the model; using fallback probability");
            Ok((FALLBACK_PROBABILITY, true))
        }
        Err(e) => Err(e),
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScoreError {
    #[error(transparent)]
    Inference(#[from] InferenceError),
    #[error(transparent)]
    Prioritize(#[from] PrioritizeError),
}

pub fn score_observation(model: &TrainedModel, obs: &Observation) -> Result<ReviewItem, ScoreError> {
    let factors = discretize(obs, model.bins());
    let (p, degraded) = merge_probability_or_fallback(model, &evidence_for(model.structure(), &factors))?;
    Ok(ReviewItem {
        change_id: obs.change_id.clone(),
        subject: obs.subject.clone(),
        merge_conflict: obs.merge_conflict,
        change_type: obs.change_type,
        merge_probability: p,
        age_minutes: obs.age_minutes,
        degraded,
    })
}

/// Scores every observation with `model` and ranks the result.
pub fn rank_observations(
    model: &TrainedModel,
    observations: &[Observation],
) -> Result<Vec<PrioritizedItem>, ScoreError> {
    let items = observations
        .iter()
        .map(|o| score_observation(model, o))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(prioritize(items)?)
}
