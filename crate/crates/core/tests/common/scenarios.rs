use chrono::{DateTime, TimeZone, Utc};
use reviewq_core::bn::{CategoricalVariable, Cpt, TERMINAL};
use reviewq_core::factors::{var, AgeCategory, Category, Outcome, PatchesCategory, PeerReview, SizeCategory, TestVerdict};
use reviewq_core::synthgen::{planted_network, planted_observations, Emission, PlantedSpec};
use reviewq_core::{BayesNet, NetworkStructure, Observation};

pub fn snapshot() -> DateTime<Utc> {
    Utc.with_ymd_and_hms(2024, 6, 1, 12, 0, 0).unwrap()
}

/// Six planted variables with a chain `age -> size -> num_patches` and
/// `test_verdict -> change_status`; every CPT has at most three rows.
pub fn recovery_network() -> BayesNet {
    let variables = vec![
        CategoricalVariable::of::<AgeCategory>(var::AGE),
        CategoricalVariable::of::<SizeCategory>(var::SIZE),
        CategoricalVariable::of::<PatchesCategory>(var::NUM_PATCHES),
        CategoricalVariable::of::<TestVerdict>(var::TEST_VERDICT),
        CategoricalVariable::of::<PeerReview>(var::PEER_REVIEW),
        CategoricalVariable::of::<Outcome>(TERMINAL),
    ];
    let edges = [
        (var::AGE, var::SIZE),
        (var::SIZE, var::NUM_PATCHES),
        (var::TEST_VERDICT, TERMINAL),
    ]
    .iter()
    .map(|(a, b)| (a.to_string(), b.to_string()))
    .collect();
    let structure = NetworkStructure::new(variables, edges).unwrap();
    let cpts = vec![
        Cpt::new(var::AGE, vec![], vec![], 3, vec![0.5, 0.3, 0.2]).unwrap(),
        Cpt::new(
            var::SIZE,
            vec![var::AGE.into()],
            vec![3],
            3,
            vec![0.6, 0.3, 0.1, 0.2, 0.5, 0.3, 0.1, 0.3, 0.6],
        )
        .unwrap(),
        Cpt::new(
            var::NUM_PATCHES,
            vec![var::SIZE.into()],
            vec![3],
            3,
            vec![0.7, 0.2, 0.1, 0.3, 0.4, 0.3, 0.1, 0.3, 0.6],
        )
        .unwrap(),
        Cpt::new(var::TEST_VERDICT, vec![], vec![], 3, vec![0.2, 0.3, 0.5]).unwrap(),
        Cpt::new(var::PEER_REVIEW, vec![], vec![], 5, vec![0.1, 0.15, 0.4, 0.2, 0.15]).unwrap(),
        Cpt::new(TERMINAL, vec![var::TEST_VERDICT.into()], vec![3], 2, vec![0.85, 0.15, 0.5, 0.5, 0.2, 0.8])
            .unwrap(),
    ];
    BayesNet::new(structure, cpts).unwrap()
}

/// Marginals shaped like a typical repository: most changes pass tests and
/// sit at "no verdict" or an approval.
fn skewed_marginals() -> Vec<(&'static str, Vec<f64>)> {
    vec![
        (var::TEST_VERDICT, vec![0.15, 0.15, 0.7]),
        (var::PEER_REVIEW, vec![0.05, 0.15, 0.45, 0.2, 0.15]),
    ]
}

/// Outcome driven by the test verdict and the peer review vote.
pub fn informative_observations(n: usize, seed: u64) -> Vec<Observation> {
    let mut rows = Vec::with_capacity(30);
    for verdict in 0..TestVerdict::ALL.len() {
        for review in 0..PeerReview::ALL.len() {
            let p: f64 = match (verdict, review) {
                (0, _) | (_, 0) => 0.02,
                (_, 1) => 0.1,
                (1, _) => 0.25,
                (_, 2) => 0.85,
                _ => 0.98,
            };
            rows.extend([1.0 - p, p]);
        }
    }
    let net = planted_network(&[var::TEST_VERDICT, var::PEER_REVIEW], &skewed_marginals(), rows).unwrap();
    observations(net, n, seed)
}

/// Outcome independent of every factor, merged with probability one half.
pub fn uninformative_observations(n: usize, seed: u64) -> Vec<Observation> {
    let net = planted_network(&[], &skewed_marginals(), vec![0.5, 0.5]).unwrap();
    observations(net, n, seed)
}

fn observations(net: BayesNet, n: usize, seed: u64) -> Vec<Observation> {
    let spec = PlantedSpec::new(net, n, seed).unwrap();
    planted_observations(&spec, &Emission::standard(snapshot()))
}
