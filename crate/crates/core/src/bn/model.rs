use chrono::{DateTime, Utc};
use std::collections::BTreeMap;

use super::cpt::Cpt;
use super::error::{InferenceError, ModelError};
use super::structure::NetworkStructure;
use crate::etl::bins::BinThresholds;

/// A complete variable -> state labelling, keyed by variable name.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Assignment(BTreeMap<String, String>);

impl Assignment {
    pub fn new() -> Self {
        Assignment::default()
    }

    pub fn with(mut self, variable: impl Into<String>, state: impl Into<String>) -> Self {
        self.set(variable, state);
        self
    }

    pub fn set(&mut self, variable: impl Into<String>, state: impl Into<String>) {
        self.0.insert(variable.into(), state.into());
    }

    pub fn get(&self, variable: &str) -> Option<&str> {
        self.0.get(variable).map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.0.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl<K: Into<String>, V: Into<String>> FromIterator<(K, V)> for Assignment {
    fn from_iter<I: IntoIterator<Item = (K, V)>>(iter: I) -> Self {
        Assignment(iter.into_iter().map(|(k, v)| (k.into(), v.into())).collect())
    }
}

/// Partial observation of the non-terminal variables.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Evidence(BTreeMap<String, String>);

impl Evidence {
    pub fn new() -> Self {
        Evidence::default()
    }

    pub fn with(mut self, variable: impl Into<String>, state: impl Into<String>) -> Self {
        self.observe(variable, state);
        self
    }

    pub fn observe(&mut self, variable: impl Into<String>, state: impl Into<String>) {
        self.0.insert(variable.into(), state.into());
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.0.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl<K: Into<String>, V: Into<String>> FromIterator<(K, V)> for Evidence {
    fn from_iter<I: IntoIterator<Item = (K, V)>>(iter: I) -> Self {
        Evidence(iter.into_iter().map(|(k, v)| (k.into(), v.into())).collect())
    }
}

/// Structure plus one CPT per variable, stored in variable order.
#[derive(Debug, Clone, PartialEq)]
pub struct BayesNet {
    structure: NetworkStructure,
    cpts: Vec<Cpt>,
}

impl BayesNet {
    /// Accepts CPTs in any order; each variable must have exactly one whose
    /// parent order matches the structure.
    pub fn new(structure: NetworkStructure, cpts: Vec<Cpt>) -> Result<Self, ModelError> {
        let mut slots: Vec<Option<Cpt>> = vec![None; structure.len()];
        for cpt in cpts {
            let idx = structure
                .index_of(cpt.variable())
                .ok_or_else(|| ModelError::UnknownCpt(cpt.variable().to_string()))?;
            if slots[idx].is_some() {
                return Err(ModelError::DuplicateCpt(cpt.variable().to_string()));
            }
            let expected = structure.parent_names(idx);
            let cards: Vec<usize> = structure
                .parents(idx)
                .iter()
                .map(|&p| structure.variable(p).cardinality())
                .collect();
            if cpt.parent_order() != expected.as_slice()
                || cpt.parent_cards() != cards.as_slice()
                || cpt.states() != structure.variable(idx).cardinality()
            {
                return Err(ModelError::ParentMismatch {
                    variable: cpt.variable().to_string(),
                    expected,
                    found: cpt.parent_order().to_vec(),
                });
            }
            slots[idx] = Some(cpt);
        }
        let cpts = slots
            .into_iter()
            .enumerate()
            .map(|(i, c)| c.ok_or_else(|| ModelError::MissingCpt(structure.variable(i).name.clone())))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(BayesNet { structure, cpts })
    }

    /// Every CPT row uniform.
    pub fn uniform(structure: NetworkStructure) -> Self {
        let cpts = (0..structure.len())
            .map(|i| {
                let cards = structure
                    .parents(i)
                    .iter()
                    .map(|&p| structure.variable(p).cardinality())
                    .collect();
                Cpt::uniform(
                    structure.variable(i).name.clone(),
                    structure.parent_names(i),
                    cards,
                    structure.variable(i).cardinality(),
                )
            })
            .collect();
        BayesNet { structure, cpts }
    }

    pub fn structure(&self) -> &NetworkStructure {
        &self.structure
    }

    pub fn cpts(&self) -> &[Cpt] {
        &self.cpts
    }

    pub fn cpt(&self, variable: usize) -> &Cpt {
        &self.cpts[variable]
    }

    pub fn cpt_named(&self, name: &str) -> Option<&Cpt> {
        self.structure.index_of(name).map(|i| &self.cpts[i])
    }

    /// Factorized probability of a full state-index vector.
    pub fn joint_indexed(&self, states: &[usize]) -> f64 {
        let mut parent_states = Vec::with_capacity(8);
        let mut p = 1.0;
        for (i, cpt) in self.cpts.iter().enumerate() {
            parent_states.clear();
            parent_states.extend(self.structure.parents(i).iter().map(|&q| states[q]));
            p *= cpt.prob(&parent_states, states[i]);
            if p == 0.0 {
                break;
            }
        }
        p
    }

    /// Full assignment labels to state indices in variable order.
    pub fn encode(&self, assignment: &Assignment) -> Result<Vec<usize>, InferenceError> {
        for (name, _) in assignment.iter() {
            if !self.structure.contains(name) {
                return Err(InferenceError::UnknownVariable(name.to_string()));
            }
        }
        let missing: Vec<String> = self
            .structure
            .variables()
            .iter()
            .filter(|v| assignment.get(&v.name).is_none())
            .map(|v| v.name.clone())
            .collect();
        if !missing.is_empty() {
            return Err(InferenceError::Incomplete(missing));
        }
        self.structure
            .variables()
            .iter()
            .map(|v| {
                let label = assignment.get(&v.name).expect("checked above");
                v.state_index(label).ok_or_else(|| InferenceError::UnknownState {
                    variable: v.name.clone(),
                    state: label.to_string(),
                })
            })
            .collect()
    }
}

/// Learned network plus the discretization cuts and training metadata.
///
/// Immutable once built; retraining produces a new value.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    network: BayesNet,
    bins: BinThresholds,
    trained_at: DateTime<Utc>,
    training_rows: u64,
    smoothing_alpha: f64,
}

impl TrainedModel {
    pub fn new(
        network: BayesNet,
        bins: BinThresholds,
        trained_at: DateTime<Utc>,
        training_rows: u64,
        smoothing_alpha: f64,
    ) -> Result<Self, ModelError> {
        if !(smoothing_alpha.is_finite() && smoothing_alpha > 0.0) {
            return Err(ModelError::InvalidAlpha(smoothing_alpha));
        }
        Ok(TrainedModel { network, bins, trained_at, training_rows, smoothing_alpha })
    }

    pub fn network(&self) -> &BayesNet {
        &self.network
    }

    pub fn structure(&self) -> &NetworkStructure {
        self.network.structure()
    }

    pub fn cpts(&self) -> &[Cpt] {
        self.network.cpts()
    }

    pub fn bins(&self) -> &BinThresholds {
        &self.bins
    }

    pub fn trained_at(&self) -> DateTime<Utc> {
        self.trained_at
    }

    pub fn training_rows(&self) -> u64 {
        self.training_rows
    }

    pub fn smoothing_alpha(&self) -> f64 {
        self.smoothing_alpha
    }
}

impl AsRef<BayesNet> for TrainedModel {
    fn as_ref(&self) -> &BayesNet {
        &self.network
    }
}

impl AsRef<BayesNet> for BayesNet {
    fn as_ref(&self) -> &BayesNet {
        self
    }
}
