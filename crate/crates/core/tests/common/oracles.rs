use std::collections::{BTreeMap, HashMap};

use rand::seq::SliceRandom;
use rand::Rng;
use reviewq_core::bn::{CategoricalVariable, Cpt, TERMINAL};
use reviewq_core::{BayesNet, ChangeType, MergeConflict, NetworkStructure, ReviewItem};

/// `(variable, sorted (parent, label) pairs)`.
pub type RowKey = (String, Vec<(String, String)>);

/// A random network plus the label-keyed tables it was built from.
pub struct RandomNetwork {
    pub net: BayesNet,
    pub variables: Vec<(String, Vec<String>)>,
    pub parents: BTreeMap<String, Vec<String>>,
    pub tables: HashMap<RowKey, Vec<f64>>,
}

fn row_key(var: &str, parents: &[String], full: &BTreeMap<String, String>) -> RowKey {
    let mut pairs: Vec<(String, String)> = parents.iter().map(|p| (p.clone(), full[p].clone())).collect();
    pairs.sort();
    (var.to_string(), pairs)
}

fn random_row<R: Rng>(rng: &mut R, k: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..k).map(|_| rng.gen_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / total).collect()
}

/// Every combination of labels for `vars`, first variable slowest.
fn combinations(vars: &[(String, Vec<String>)]) -> Vec<BTreeMap<String, String>> {
    let mut out = vec![BTreeMap::new()];
    for (name, states) in vars {
        let mut next = Vec::with_capacity(out.len() * states.len());
        for partial in &out {
            for s in states {
                let mut m = partial.clone();
                m.insert(name.clone(), s.clone());
                next.push(m);
            }
        }
        out = next;
    }
    out
}

/// Up to `max_vars` variables in total (terminal included), 2..=`max_states`
/// states each, random DAG edges, strictly positive CPT rows. Declaration
/// order of variables and edges is shuffled.
pub fn random_network<R: Rng>(rng: &mut R, max_vars: usize, max_states: usize) -> RandomNetwork {
    let n_factors = rng.gen_range(1..max_vars);
    let mut variables: Vec<(String, Vec<String>)> = (0..n_factors)
        .map(|i| {
            let k = rng.gen_range(2..=max_states);
            (format!("x{i}"), (0..k).map(|s| format!("s{s}")).collect())
        })
        .collect();
    variables.push((TERMINAL.to_string(), vec!["abandoned".into(), "merged".into()]));

    let mut edges = Vec::new();
    for i in 0..n_factors {
        for j in (i + 1)..n_factors {
            if rng.gen_bool(0.4) {
                edges.push((variables[i].0.clone(), variables[j].0.clone()));
            }
        }
        if rng.gen_bool(0.6) {
            edges.push((variables[i].0.clone(), TERMINAL.to_string()));
        }
    }

    let mut parents: BTreeMap<String, Vec<String>> = variables.iter().map(|(n, _)| (n.clone(), vec![])).collect();
    for (from, to) in &edges {
        parents.get_mut(to).unwrap().push(from.clone());
    }
    let domain: HashMap<String, Vec<String>> = variables.iter().cloned().collect();

    let mut tables = HashMap::new();
    for (name, states) in &variables {
        let pvars: Vec<(String, Vec<String>)> =
            parents[name].iter().map(|p| (p.clone(), domain[p].clone())).collect();
        for combo in combinations(&pvars) {
            tables.insert(row_key(name, &parents[name], &combo), random_row(rng, states.len()));
        }
    }

    let mut declared = variables.clone();
    declared.shuffle(rng);
    let mut declared_edges = edges.clone();
    declared_edges.shuffle(rng);
    let structure = NetworkStructure::new(
        declared.iter().map(|(n, s)| CategoricalVariable::new(n.clone(), s.clone())).collect(),
        declared_edges,
    )
    .expect("generated DAG is valid");

    let cpts = declared
        .iter()
        .map(|(name, states)| {
            let idx = structure.index_of(name).unwrap();
            let order = structure.parent_names(idx);
            let pvars: Vec<(String, Vec<String>)> = order.iter().map(|p| (p.clone(), domain[p].clone())).collect();
            let mut probs = Vec::new();
            for combo in combinations(&pvars) {
                probs.extend_from_slice(&tables[&row_key(name, &order, &combo)]);
            }
            let cards = pvars.iter().map(|(_, s)| s.len()).collect();
            Cpt::new(name.clone(), order, cards, states.len(), probs).unwrap()
        })
        .collect();
    let net = BayesNet::new(structure, cpts).expect("generated CPTs match the structure");
    RandomNetwork { net, variables, parents, tables }
}

impl RandomNetwork {
    /// Product of table entries for a full assignment.
    pub fn joint(&self, full: &BTreeMap<String, String>) -> f64 {
        self.variables
            .iter()
            .map(|(name, states)| {
                let row = &self.tables[&row_key(name, &self.parents[name], full)];
                let s = states.iter().position(|l| *l == full[name]).unwrap();
                row[s]
            })
            .product()
    }

    /// P(merged | evidence) by summing the joint over every full assignment.
    pub fn posterior(&self, evidence: &[(String, String)]) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for full in combinations(&self.variables) {
            if evidence.iter().any(|(v, s)| full[v] != *s) {
                continue;
            }
            let p = self.joint(&full);
            den += p;
            if full[TERMINAL] == "merged" {
                num += p;
            }
        }
        num / den
    }

    /// Each factor observed with probability one half.
    pub fn random_evidence<R: Rng>(&self, rng: &mut R) -> Vec<(String, String)> {
        let mut evidence = Vec::new();
        for (name, states) in self.variables.iter().filter(|(n, _)| n != TERMINAL) {
            if rng.gen_bool(0.5) {
                evidence.push((name.clone(), states.choose(rng).unwrap().clone()));
            }
        }
        evidence
    }

    pub fn all_assignments(&self) -> Vec<BTreeMap<String, String>> {
        combinations(&self.variables)
    }
}

pub fn direct_rmse(predicted: &[f64], actual: &[f64]) -> f64 {
    let mut sum = 0.0;
    for i in 0..predicted.len() {
        let d = predicted[i] - actual[i];
        sum += d * d;
    }
    (sum / predicted.len() as f64).sqrt()
}

pub fn direct_mae(predicted: &[f64], actual: &[f64]) -> f64 {
    let mut sum = 0.0;
    for i in 0..predicted.len() {
        sum += (actual[i] - predicted[i]).abs();
    }
    sum / predicted.len() as f64
}

/// Share of positive/negative pairs ranked correctly, ties counting one half.
pub fn mann_whitney(scores: &[f64], labels: &[bool]) -> f64 {
    let mut wins = 0.0;
    let mut pairs = 0.0;
    for (i, &si) in scores.iter().enumerate() {
        if !labels[i] {
            continue;
        }
        for (j, &sj) in scores.iter().enumerate() {
            if labels[j] {
                continue;
            }
            pairs += 1.0;
            if si > sj {
                wins += 1.0;
            } else if si == sj {
                wins += 0.5;
            }
        }
    }
    wins / pairs
}

fn conflict_code(c: MergeConflict) -> u8 {
    match c {
        MergeConflict::No => 0,
        MergeConflict::Yes => 1,
    }
}

fn type_code(t: ChangeType) -> u8 {
    match t {
        ChangeType::TroubleReport => 0,
        ChangeType::Feature => 1,
        ChangeType::Refactoring => 2,
    }
}

/// True when `a` must be listed before `b`.
pub fn precedes(a: &ReviewItem, b: &ReviewItem) -> bool {
    if conflict_code(a.merge_conflict) != conflict_code(b.merge_conflict) {
        return conflict_code(a.merge_conflict) < conflict_code(b.merge_conflict);
    }
    if type_code(a.change_type) != type_code(b.change_type) {
        return type_code(a.change_type) < type_code(b.change_type);
    }
    if a.merge_probability != b.merge_probability {
        return a.merge_probability > b.merge_probability;
    }
    if a.age_minutes != b.age_minutes {
        return a.age_minutes > b.age_minutes;
    }
    a.change_id < b.change_id
}

/// Selection sort driven by [`precedes`]: repeatedly takes the item that
/// precedes every other remaining item.
pub fn oracle_order(items: &[ReviewItem]) -> Vec<String> {
    let mut remaining: Vec<&ReviewItem> = items.iter().collect();
    let mut out = Vec::with_capacity(items.len());
    while !remaining.is_empty() {
        let pos = (0..remaining.len())
            .find(|&i| (0..remaining.len()).all(|j| i == j || precedes(remaining[i], remaining[j])))
            .expect("precedes is a strict total order");
        out.push(remaining.remove(pos).change_id.clone());
    }
    out
}

/// Items drawn from small value pools so that ties on every key are common.
pub fn random_items<R: Rng>(rng: &mut R, n: usize) -> Vec<ReviewItem> {
    const PROBS: [f64; 6] = [0.0, 0.1, 0.5, 0.5, 0.8, 1.0];
    const AGES: [f64; 4] = [0.0, 90.0, 1440.0, 20160.5];
    let mut ids: Vec<usize> = (0..n).collect();
    ids.shuffle(rng);
    ids.into_iter()
        .map(|i| ReviewItem {
            change_id: format!("proj~master~I{i:04}"),
            subject: format!("change {i}"),
            merge_conflict: if rng.gen_bool(0.3) { MergeConflict::Yes } else { MergeConflict::No },
            change_type: *[ChangeType::TroubleReport, ChangeType::Feature, ChangeType::Refactoring]
                .choose(rng)
                .unwrap(),
            merge_probability: if rng.gen_bool(0.5) { *PROBS.choose(rng).unwrap() } else { rng.gen() },
            age_minutes: if rng.gen_bool(0.5) { *AGES.choose(rng).unwrap() } else { rng.gen_range(0.0..1e5) },
            degraded: rng.gen_bool(0.1),
        })
        .collect()
}
