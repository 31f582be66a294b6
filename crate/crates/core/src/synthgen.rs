//! Synthetic datasets sampled from a planted network, and fixture payloads in
//! the review-server wire format that ETL maps back onto the same factors.

use chrono::{DateTime, Duration, Utc};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

use crate::bn::artifact::{network_from_docs, ArtifactError, CptDoc};
use crate::bn::{BayesNet, CategoricalVariable, Cpt, ModelError, NetworkStructure, TERMINAL};
use crate::etl::bins::{BinThresholds, Cuts};
use crate::etl::classify::default_rules;
use crate::etl::gerrit::{
    format_timestamp, AccountInfo, ApprovalInfo, ChangeInfo, CommitInfo, LabelInfo, RevisionInfo,
    CODE_REVIEW, VERIFIED,
};
use crate::etl::raw::RawChange;
use crate::etl::transform::{observe, Observation};
use crate::factors::{
    var, AgeCategory, Category, ChangeType, FactorVector, MergeConflict, Outcome, PatchesCategory,
    PeerReview, SizeCategory, TestVerdict,
};

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("planted network lacks factor variable `{0}`")]
    MissingFactor(&'static str),
    #[error("planted variable `{variable}` must have states {expected:?}")]
    FactorDomain { variable: &'static str, expected: Vec<String> },
    #[error("{0} must be a probability, got {1}")]
    Probability(&'static str, f64),
    #[error("change type weights must be non-negative with a positive sum")]
    ChangeTypeWeights,
    #[error("bins for `{factor}` cannot represent every category with a raw value: {reason}")]
    UnrepresentableBins { factor: &'static str, reason: String },
    #[error(transparent)]
    Artifact(#[from] ArtifactError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("malformed spec file: {0}")]
    Parse(#[from] serde_json::Error),
}

/// Ground truth for a synthetic dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantedSpec {
    network: BayesNet,
    pub n_rows: usize,
    pub seed: u64,
    /// Relative weights for TroubleReport, Feature, Refactoring.
    pub change_type_weights: [f64; 3],
    pub merge_conflict_rate: f64,
    /// Share of rows left open (outcome dropped).
    pub open_fraction: f64,
}

fn factor_domains() -> [(&'static str, Vec<String>); 6] {
    [
        (var::AGE, AgeCategory::labels()),
        (var::SIZE, SizeCategory::labels()),
        (var::NUM_PATCHES, PatchesCategory::labels()),
        (var::TEST_VERDICT, TestVerdict::labels()),
        (var::PEER_REVIEW, PeerReview::labels()),
        (TERMINAL, Outcome::labels()),
    ]
}

impl PlantedSpec {
    pub fn new(network: BayesNet, n_rows: usize, seed: u64) -> Result<Self, SynthError> {
        for (name, expected) in factor_domains() {
            let idx = network
                .structure()
                .index_of(name)
                .ok_or(SynthError::MissingFactor(name))?;
            if network.structure().variable(idx).states != expected {
                return Err(SynthError::FactorDomain { variable: name, expected });
            }
        }
        Ok(PlantedSpec {
            network,
            n_rows,
            seed,
            change_type_weights: [1.0, 1.0, 1.0],
            merge_conflict_rate: 0.1,
            open_fraction: 0.0,
        })
    }

    pub fn with_side_factors(mut self, change_type_weights: [f64; 3], merge_conflict_rate: f64) -> Result<Self, SynthError> {
        if change_type_weights.iter().any(|w| !(w.is_finite() && *w >= 0.0))
            || change_type_weights.iter().sum::<f64>() <= 0.0
        {
            return Err(SynthError::ChangeTypeWeights);
        }
        if !(0.0..=1.0).contains(&merge_conflict_rate) {
            return Err(SynthError::Probability("merge_conflict_rate", merge_conflict_rate));
        }
        self.change_type_weights = change_type_weights;
        self.merge_conflict_rate = merge_conflict_rate;
        Ok(self)
    }

    pub fn with_open_fraction(mut self, open_fraction: f64) -> Result<Self, SynthError> {
        if !(0.0..=1.0).contains(&open_fraction) {
            return Err(SynthError::Probability("open_fraction", open_fraction));
        }
        self.open_fraction = open_fraction;
        Ok(self)
    }

    pub fn network(&self) -> &BayesNet {
        &self.network
    }
}

fn draw(weights: &[f64], u: f64) -> usize {
    let total: f64 = weights.iter().sum();
    let mut acc = 0.0;
    for (i, w) in weights.iter().enumerate() {
        acc += w / total;
        if u < acc && *w > 0.0 {
            return i;
        }
    }
    weights.iter().rposition(|&w| w > 0.0).unwrap_or(weights.len() - 1)
}

/// Ancestral sampling in topological order; deterministic per seed.
pub fn sample_dataset(spec: &PlantedSpec) -> Vec<FactorVector> {
    let net = &spec.network;
    let structure = net.structure();
    let idx = |name: &str| structure.index_of(name).expect("validated in PlantedSpec::new");
    let (age, size, patches, verdict, review, status) = (
        idx(var::AGE),
        idx(var::SIZE),
        idx(var::NUM_PATCHES),
        idx(var::TEST_VERDICT),
        idx(var::PEER_REVIEW),
        idx(TERMINAL),
    );

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut states = vec![0usize; structure.len()];
    let mut parent_states = Vec::new();
    (0..spec.n_rows)
        .map(|i| {
            for &v in structure.topological_order() {
                parent_states.clear();
                parent_states.extend(structure.parents(v).iter().map(|&p| states[p]));
                let cpt = net.cpt(v);
                states[v] = draw(cpt.row(cpt.config_index(&parent_states)), rng.gen());
            }
            let change_type = ChangeType::from_index(draw(&spec.change_type_weights, rng.gen()))
                .expect("three weights");
            let merge_conflict = if rng.gen::<f64>() < spec.merge_conflict_rate {
                MergeConflict::Yes
            } else {
                MergeConflict::No
            };
            let open = rng.gen::<f64>() < spec.open_fraction;
            FactorVector {
                change_id: format!("synth~{i:06}"),
                age: AgeCategory::from_index(states[age]).expect("domain checked"),
                size: SizeCategory::from_index(states[size]).expect("domain checked"),
                patches: PatchesCategory::from_index(states[patches]).expect("domain checked"),
                test_verdict: TestVerdict::from_index(states[verdict]).expect("domain checked"),
                peer_review: PeerReview::from_index(states[review]).expect("domain checked"),
                change_type,
                merge_conflict,
                outcome: if open { None } else { Outcome::from_index(states[status]) },
            }
        })
        .collect()
}

/// Cuts, snapshot time and cosmetic fields used to render fixture payloads.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Emission {
    pub bins: BinThresholds,
    pub snapshot_at: DateTime<Utc>,
    pub project: String,
    pub reviewers: Vec<u64>,
}

impl Emission {
    /// Checks that every category of every binned factor has a raw value
    /// that maps back onto it.
    pub fn new(bins: BinThresholds, snapshot_at: DateTime<Utc>) -> Result<Self, SynthError> {
        let e = Emission {
            bins,
            snapshot_at,
            project: "synth".into(),
            reviewers: vec![1001, 1002, 1003],
        };
        e.validate()?;
        Ok(e)
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        let age = &self.bins.age_minutes;
        if !(age.lower() >= 0.0 && age.lower() < age.upper()) {
            return Err(SynthError::UnrepresentableBins {
                factor: "age_minutes",
                reason: format!("need 0 <= lower < upper, got ({}, {})", age.lower(), age.upper()),
            });
        }
        for (factor, cuts, min) in [
            ("size_lines", &self.bins.size_lines, 0.0),
            ("revision_count", &self.bins.revision_count, 1.0),
        ] {
            for bin in 0..3 {
                let v = integer_in_bin(cuts, bin, min);
                if v < min || cuts.bin(v) != bin {
                    return Err(SynthError::UnrepresentableBins {
                        factor,
                        reason: format!("no integer >= {min} in bin {bin} of ({}, {})", cuts.lower(), cuts.upper()),
                    });
                }
            }
        }
        Ok(())
    }

    /// Bins of common real-world scale: 1 hour / 1 day, 20 / 200 lines,
    /// 1 / 3 patch sets.
    pub fn standard(snapshot_at: DateTime<Utc>) -> Self {
        Emission::new(BinThresholds::fixed((60.0, 1440.0), (20.0, 200.0), (1.0, 3.0)), snapshot_at)
            .expect("standard bins are representable")
    }
}

// Midpoint of the bin; the open top bin uses twice the upper cut.
fn real_in_bin(cuts: &Cuts, bin: usize) -> f64 {
    match bin {
        0 => cuts.lower() / 2.0,
        1 => (cuts.lower() + cuts.upper()) / 2.0,
        _ if cuts.upper() > 0.0 => cuts.upper() * 2.0,
        _ => cuts.upper() + 1.0,
    }
}

// Integer nearest the midpoint that still lands in the bin.
fn integer_in_bin(cuts: &Cuts, bin: usize, min: f64) -> f64 {
    let mid = real_in_bin(cuts, bin);
    let (lo, hi) = match bin {
        0 => (min, cuts.lower().floor()),
        1 => (cuts.lower().floor() + 1.0, cuts.upper().floor()),
        _ => (cuts.upper().floor() + 1.0, f64::INFINITY),
    };
    mid.floor().clamp(lo.max(min), hi.max(lo.max(min)))
}

const COMPONENTS: [&str; 5] = ["scheduler", "parser", "session store", "config loader", "metrics"];

fn subject_for(kind: ChangeType, n: usize) -> String {
    let component = COMPONENTS[n % COMPONENTS.len()];
    match kind {
        ChangeType::TroubleReport => format!("Fix TR-{}: crash in {component}", 1000 + n),
        ChangeType::Feature => format!("Add {component} option {n}"),
        ChangeType::Refactoring => format!("Refactor {component} internals"),
    }
}

fn vote_label(vote: i8, voter: u64) -> LabelInfo {
    LabelInfo {
        all: Some(vec![ApprovalInfo {
            value: (vote != 0).then_some(vote),
            account_id: Some(voter),
        }]),
        value: None,
    }
}

/// Renders each factor vector as a `ChangeInfo` whose raw values fall inside
/// the emission bins, so ETL at `snapshot_at` reproduces the vector.
pub fn emit_fixture_server_payloads(dataset: &[FactorVector], emission: &Emission) -> Vec<ChangeInfo> {
    let bins = &emission.bins;
    dataset
        .iter()
        .enumerate()
        .map(|(n, fv)| {
            let age_minutes = real_in_bin(&bins.age_minutes, fv.age.index());
            let created = emission.snapshot_at - Duration::nanoseconds((age_minutes * 60e9).round() as i64);
            let size = integer_in_bin(&bins.size_lines, fv.size.index(), 0.0) as u64;
            let revisions = integer_in_bin(&bins.revision_count, fv.patches.index(), 1.0) as u32;
            let deletions = size / 4;

            let subject = subject_for(fv.change_type, n);
            let change_key = format!("I{:040x}", n as u128 + 1);
            let revision_map: BTreeMap<String, RevisionInfo> = (1..=revisions)
                .map(|r| {
                    let sha = format!("{:032x}{:08x}", n as u128 + 1, r);
                    let commit = (r == revisions).then(|| CommitInfo {
                        subject: Some(subject.clone()),
                        message: Some(format!("{subject}\n\nChange-Id: {change_key}\n")),
                    });
                    (sha, RevisionInfo { number: r, commit })
                })
                .collect();
            let current = revision_map
                .iter()
                .find(|(_, r)| r.number == revisions)
                .map(|(k, _)| k.clone());
            let reviewer = emission.reviewers.get(n % emission.reviewers.len().max(1)).copied().unwrap_or(1001);

            ChangeInfo {
                id: fv.change_id.clone(),
                project: emission.project.clone(),
                branch: Some("master".into()),
                change_id: Some(change_key),
                subject,
                status: match fv.outcome {
                    None => "NEW",
                    Some(Outcome::Merged) => "MERGED",
                    Some(Outcome::Abandoned) => "ABANDONED",
                }
                .into(),
                created: format_timestamp(created),
                updated: Some(format_timestamp(emission.snapshot_at)),
                insertions: size - deletions,
                deletions,
                number: Some(n as u64 + 1),
                mergeable: Some(fv.merge_conflict == MergeConflict::No),
                current_revision: current,
                revisions: Some(revision_map),
                labels: BTreeMap::from([
                    (VERIFIED.to_string(), vote_label(fv.test_verdict.vote(), 999)),
                    (CODE_REVIEW.to_string(), vote_label(fv.peer_review.vote(), reviewer)),
                ]),
                reviewers: BTreeMap::from([(
                    "REVIEWER".to_string(),
                    vec![AccountInfo { account_id: reviewer, username: None }],
                )]),
                more_changes: None,
            }
        })
        .collect()
}

/// Payloads mapped through ETL at the emission snapshot.
pub fn observations_from_payloads(payloads: &[ChangeInfo], emission: &Emission) -> Vec<Observation> {
    let rules = default_rules();
    payloads
        .iter()
        .map(|info| {
            let raw = RawChange::try_from(info).expect("emitted payloads are well formed");
            observe(&raw, emission.snapshot_at, &rules).expect("emitted payloads are consistent")
        })
        .collect()
}

/// Samples the planted network and renders it to raw observations.
pub fn planted_observations(spec: &PlantedSpec, emission: &Emission) -> Vec<Observation> {
    observations_from_payloads(&emit_fixture_server_payloads(&sample_dataset(spec), emission), emission)
}

#[derive(Deserialize)]
struct SpecFile {
    n_rows: usize,
    seed: u64,
    structure: Option<NetworkStructure>,
    #[serde(default)]
    cpts: Option<Vec<CptDoc>>,
    #[serde(default)]
    change_type_weights: Option<[f64; 3]>,
    #[serde(default)]
    merge_conflict_rate: Option<f64>,
    #[serde(default)]
    open_fraction: Option<f64>,
    #[serde(default)]
    bins: Option<BinThresholds>,
    snapshot_at: DateTime<Utc>,
    #[serde(default)]
    project: Option<String>,
}

/// Reads a spec file: JSON with `n_rows`, `seed`, `snapshot_at` and optional
/// `structure`, `cpts` (artifact row format; uniform when absent),
/// `change_type_weights`, `merge_conflict_rate`, `open_fraction`, `bins` and
/// `project`.
pub fn parse_spec_file(text: &str) -> Result<(PlantedSpec, Emission), SynthError> {
    let file: SpecFile = serde_json::from_str(text)?;
    let structure = file.structure.unwrap_or_else(NetworkStructure::default_review);
    let network = match file.cpts {
        Some(docs) => network_from_docs(structure, docs)?,
        None => BayesNet::uniform(structure),
    };
    let mut spec = PlantedSpec::new(network, file.n_rows, file.seed)?;
    let weights = file.change_type_weights.unwrap_or(spec.change_type_weights);
    let conflict_rate = file.merge_conflict_rate.unwrap_or(spec.merge_conflict_rate);
    spec = spec.with_side_factors(weights, conflict_rate)?;
    spec = spec.with_open_fraction(file.open_fraction.unwrap_or(0.0))?;
    let mut emission = match file.bins {
        Some(bins) => Emission::new(bins, file.snapshot_at)?,
        None => Emission::standard(file.snapshot_at),
    };
    if let Some(project) = file.project {
        emission.project = project;
    }
    Ok((spec, emission))
}

/// Root-only network over the six planted variables with the given
/// marginals, `change_status` conditioned on `parents`.
pub fn planted_network(
    parents: &[&str],
    marginals: &[(&str, Vec<f64>)],
    status_rows: Vec<f64>,
) -> Result<BayesNet, SynthError> {
    let variables: Vec<CategoricalVariable> = factor_domains()
        .into_iter()
        .map(|(name, states)| CategoricalVariable::new(name, states))
        .collect();
    let edges = parents.iter().map(|p| (p.to_string(), TERMINAL.to_string())).collect();
    let structure = NetworkStructure::new(variables, edges).map_err(ModelError::from)?;
    let mut cpts = Vec::new();
    for v in 0..structure.len() {
        let var = structure.variable(v);
        if v == structure.terminal() {
            let cards = structure.parents(v).iter().map(|&p| structure.variable(p).cardinality()).collect();
            cpts.push(
                Cpt::new(TERMINAL, structure.parent_names(v), cards, 2, status_rows.clone())
                    .map_err(ModelError::from)?,
            );
        } else {
            let probs = marginals
                .iter()
                .find(|(n, _)| *n == var.name)
                .map(|(_, p)| p.clone())
                .unwrap_or_else(|| vec![1.0 / var.cardinality() as f64; var.cardinality()]);
            cpts.push(Cpt::new(var.name.clone(), vec![], vec![], var.cardinality(), probs).map_err(ModelError::from)?);
        }
    }
    Ok(BayesNet::new(structure, cpts)?)
}
