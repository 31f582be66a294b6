//! Versioned JSON model artifact.
//!
//! ```json
//! {
//!   "version": "v1",
//!   "structure": { "variables": [{ "name": "...", "states": ["..."] }], "edges": [["parent", "child"]] },
//!   "cpts": [{ "variable": "...", "parent_order": ["..."],
//!              "rows": [{ "parents": ["state", ...], "probs": [0.25, 0.75] }] }],
//!   "bins": { ... },
//!   "trained_at": "2024-01-07T03:00:00Z",
//!   "training_rows": 1234,
//!   "smoothing_alpha": 1.0
//! }
//! ```
//!
//! Probabilities are written as shortest round-trip decimals, so a load after a
//! save reproduces every `f64` bit for bit.

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use thiserror::Error;

use super::cpt::{Cpt, ROW_SUM_TOLERANCE};
use super::error::{ModelError, StructureError};
use super::model::{BayesNet, TrainedModel};
use super::structure::{CategoricalVariable, NetworkStructure};
use crate::etl::bins::BinThresholds;

pub const FORMAT_VERSION: &str = "v1";

#[derive(Debug, Error)]
pub enum ArtifactError {
    #[error("malformed model document: {0}")]
    Malformed(#[from] serde_json::Error),
    #[error("unsupported model format version `{0}` (expected `{FORMAT_VERSION}`)")]
    UnsupportedVersion(String),
    #[error("invalid structure: {0}")]
    Structure(#[from] StructureError),
    #[error("{location}: {reason}")]
    Cpt { location: String, reason: String },
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Serialize, Deserialize)]
struct StructureDoc {
    variables: Vec<CategoricalVariable>,
    edges: Vec<(String, String)>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct CptRowDoc {
    parents: Vec<String>,
    probs: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct CptDoc {
    variable: String,
    parent_order: Vec<String>,
    rows: Vec<CptRowDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelDoc {
    version: String,
    structure: StructureDoc,
    cpts: Vec<CptDoc>,
    bins: BinThresholds,
    trained_at: DateTime<Utc>,
    training_rows: u64,
    smoothing_alpha: f64,
}

#[derive(Deserialize)]
struct VersionProbe {
    version: Option<String>,
}

pub fn serialize_model(model: &TrainedModel) -> Vec<u8> {
    let structure = model.structure();
    let doc = ModelDoc {
        version: FORMAT_VERSION.to_string(),
        structure: StructureDoc {
            variables: structure.variables().to_vec(),
            edges: structure.edges().to_vec(),
        },
        cpts: cpts_to_docs(model.network()),
        bins: model.bins().clone(),
        trained_at: model.trained_at(),
        training_rows: model.training_rows(),
        smoothing_alpha: model.smoothing_alpha(),
    };
    let mut out = serde_json::to_vec_pretty(&doc).expect("model document serializes");
    out.push(b'\n');
    out
}

pub fn deserialize_model(bytes: &[u8]) -> Result<TrainedModel, ArtifactError> {
    let probe: VersionProbe = serde_json::from_slice(bytes)?;
    match probe.version.as_deref() {
        Some(FORMAT_VERSION) => {}
        Some(other) => return Err(ArtifactError::UnsupportedVersion(other.to_string())),
        None => return Err(ArtifactError::UnsupportedVersion(String::from("<missing>"))),
    }
    let doc: ModelDoc = serde_json::from_slice(bytes)?;
    let structure = NetworkStructure::new(doc.structure.variables, doc.structure.edges)?;
    let network = network_from_docs(structure, doc.cpts)?;
    Ok(TrainedModel::new(
        network,
        doc.bins,
        doc.trained_at,
        doc.training_rows,
        doc.smoothing_alpha,
    )?)
}

pub(crate) fn cpts_to_docs(net: &BayesNet) -> Vec<CptDoc> {
    let structure = net.structure();
    net.cpts()
        .iter()
        .enumerate()
        .map(|(var, cpt)| {
            let parents = structure.parents(var);
            let rows = (0..cpt.row_count())
                .map(|config| CptRowDoc {
                    parents: cpt
                        .config_states(config)
                        .iter()
                        .zip(parents)
                        .map(|(&s, &p)| structure.variable(p).states[s].clone())
                        .collect(),
                    probs: cpt.row(config).to_vec(),
                })
                .collect();
            CptDoc {
                variable: cpt.variable().to_string(),
                parent_order: cpt.parent_order().to_vec(),
                rows,
            }
        })
        .collect()
}

/// Rebuilds CPTs from documents. Rows may appear in any order but every
/// parent configuration must appear exactly once.
pub(crate) fn network_from_docs(
    structure: NetworkStructure,
    docs: Vec<CptDoc>,
) -> Result<BayesNet, ArtifactError> {
    let mut cpts = Vec::with_capacity(docs.len());
    for (i, doc) in docs.into_iter().enumerate() {
        let here = format!("cpts[{i}] ({})", doc.variable);
        let var = structure.index_of(&doc.variable).ok_or_else(|| ArtifactError::Cpt {
            location: here.clone(),
            reason: "unknown variable".into(),
        })?;
        let parent_idx: Vec<usize> = doc
            .parent_order
            .iter()
            .map(|p| {
                structure.index_of(p).ok_or_else(|| ArtifactError::Cpt {
                    location: here.clone(),
                    reason: format!("unknown parent `{p}`"),
                })
            })
            .collect::<Result<_, _>>()?;
        if parent_idx != structure.parents(var) {
            return Err(ArtifactError::Cpt {
                location: here,
                reason: format!(
                    "parent order {:?} does not match structure {:?}",
                    doc.parent_order,
                    structure.parent_names(var)
                ),
            });
        }
        let cards: Vec<usize> = parent_idx.iter().map(|&p| structure.variable(p).cardinality()).collect();
        let states = structure.variable(var).cardinality();
        let n_rows: usize = cards.iter().product();

        let shape = Cpt::uniform(doc.variable.clone(), doc.parent_order.clone(), cards.clone(), states);
        let label_index: Vec<HashMap<&str, usize>> = parent_idx
            .iter()
            .map(|&p| {
                structure
                    .variable(p)
                    .states
                    .iter()
                    .enumerate()
                    .map(|(k, s)| (s.as_str(), k))
                    .collect()
            })
            .collect();

        let mut probs = vec![f64::NAN; n_rows * states];
        let mut filled = vec![false; n_rows];
        for (r, row) in doc.rows.iter().enumerate() {
            let at = format!("{here} row {r} {:?}", row.parents);
            if row.parents.len() != parent_idx.len() {
                return Err(ArtifactError::Cpt { location: at, reason: "wrong number of parent states".into() });
            }
            let parent_states = row
                .parents
                .iter()
                .zip(&label_index)
                .map(|(label, idx)| idx.get(label.as_str()).copied())
                .collect::<Option<Vec<usize>>>()
                .ok_or_else(|| ArtifactError::Cpt { location: at.clone(), reason: "unknown parent state".into() })?;
            if row.probs.len() != states {
                return Err(ArtifactError::Cpt {
                    location: at,
                    reason: format!("expected {states} probabilities, got {}", row.probs.len()),
                });
            }
            if let Some(p) = row.probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
                return Err(ArtifactError::Cpt { location: at, reason: format!("probability {p} outside [0, 1]") });
            }
            let sum: f64 = row.probs.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                return Err(ArtifactError::Cpt { location: at, reason: format!("row sums to {sum}, not 1") });
            }
            let config = shape.config_index(&parent_states);
            if filled[config] {
                return Err(ArtifactError::Cpt { location: at, reason: "duplicate parent configuration".into() });
            }
            filled[config] = true;
            probs[config * states..(config + 1) * states].copy_from_slice(&row.probs);
        }
        if let Some(missing) = filled.iter().position(|f| !f) {
            let labels: Vec<String> = shape
                .config_states(missing)
                .iter()
                .zip(&parent_idx)
                .map(|(&s, &p)| structure.variable(p).states[s].clone())
                .collect();
            return Err(ArtifactError::Cpt {
                location: here,
                reason: format!("missing row for parent states {labels:?}"),
            });
        }
        cpts.push(
            Cpt::new(doc.variable, doc.parent_order, cards, states, probs).map_err(ModelError::from)?,
        );
    }
    Ok(BayesNet::new(structure, cpts)?)
}
