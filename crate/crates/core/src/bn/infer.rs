//! Exact inference by enumeration.
//!
//! Networks here are a handful of variables with at most a few states each, so
//! summing the factorized joint over every completion of the unobserved
//! variables is exact and cheap.

use super::error::InferenceError;
use super::model::{Assignment, BayesNet, Evidence};
use super::structure::TERMINAL;
use crate::factors::{Category, Outcome};

/// Product of CPT entries for a complete assignment.
pub fn joint_probability(net: impl AsRef<BayesNet>, assignment: &Assignment) -> Result<f64, InferenceError> {
    let net = net.as_ref();
    let states = net.encode(assignment)?;
    Ok(net.joint_indexed(&states))
}

/// `P(change_status = merged | evidence)`.
///
/// Unobserved non-terminal variables are marginalized out.
pub fn infer_merge_probability(net: impl AsRef<BayesNet>, evidence: &Evidence) -> Result<f64, InferenceError> {
    let net = net.as_ref();
    let structure = net.structure();
    let terminal = structure.terminal();
    let merged = Outcome::Merged.index();

    let mut states = vec![0usize; structure.len()];
    let mut observed = vec![false; structure.len()];
    for (name, label) in evidence.iter() {
        if name == TERMINAL {
            return Err(InferenceError::TerminalInEvidence);
        }
        let idx = structure
            .index_of(name)
            .ok_or_else(|| InferenceError::UnknownVariable(name.to_string()))?;
        states[idx] = structure.variable(idx).state_index(label).ok_or_else(|| {
            InferenceError::UnknownState { variable: name.to_string(), state: label.to_string() }
        })?;
        observed[idx] = true;
    }

    let free: Vec<usize> = (0..structure.len())
        .filter(|&i| i != terminal && !observed[i])
        .collect();
    let cards: Vec<usize> = free.iter().map(|&i| structure.variable(i).cardinality()).collect();

    let mut merged_mass = 0.0;
    let mut total = 0.0;
    loop {
        for outcome in 0..structure.variable(terminal).cardinality() {
            states[terminal] = outcome;
            let p = net.joint_indexed(&states);
            total += p;
            if outcome == merged {
                merged_mass += p;
            }
        }
        if !advance(&free, &cards, &mut states) {
            break;
        }
    }

    if !(total > 0.0 && total.is_finite()) {
        return Err(InferenceError::DegenerateEvidence);
    }
    Ok((merged_mass / total).clamp(0.0, 1.0))
}

// Odometer step over the free variables; false once every combination is seen.
fn advance(free: &[usize], cards: &[usize], states: &mut [usize]) -> bool {
    for (&var, &card) in free.iter().zip(cards).rev() {
        states[var] += 1;
        if states[var] < card {
            return true;
        }
        states[var] = 0;
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bn::cpt::Cpt;
    use crate::bn::structure::{CategoricalVariable, NetworkStructure};

    fn two_binary() -> NetworkStructure {
        NetworkStructure::new(
            vec![
                CategoricalVariable::new("x", ["a", "b"]),
                CategoricalVariable::of::<Outcome>(TERMINAL),
            ],
            vec![("x".into(), TERMINAL.into())],
        )
        .unwrap()
    }

    // size -> num_patches, size -> change_status, num_patches -> change_status
    fn three_var() -> BayesNet {
        let s = NetworkStructure::new(
            vec![
                CategoricalVariable::new("size", ["Small", "Medium", "Large"]),
                CategoricalVariable::new("num_patches", ["Low", "High"]),
                CategoricalVariable::of::<Outcome>(TERMINAL),
            ],
            vec![
                ("size".into(), "num_patches".into()),
                ("size".into(), TERMINAL.into()),
                ("num_patches".into(), TERMINAL.into()),
            ],
        )
        .unwrap();
        let cpts = vec![
            Cpt::new("size", vec![], vec![], 3, vec![0.5, 0.3, 0.2]).unwrap(),
            Cpt::new(
                "num_patches",
                vec!["size".into()],
                vec![3],
                2,
                vec![0.9, 0.1, 0.6, 0.4, 0.25, 0.75],
            )
            .unwrap(),
            Cpt::new(
                TERMINAL,
                vec!["size".into(), "num_patches".into()],
                vec![3, 2],
                2,
                vec![
                    0.2, 0.8, // Small, Low
                    0.4, 0.6, // Small, High
                    0.3, 0.7, // Medium, Low
                    0.5, 0.5, // Medium, High
                    0.6, 0.4, // Large, Low
                    0.9, 0.1, // Large, High
                ],
            )
            .unwrap(),
        ];
        BayesNet::new(s, cpts).unwrap()
    }

    #[test]
    fn uniform_joint_and_posterior() {
        let net = BayesNet::uniform(two_binary());
        let a = Assignment::new().with("x", "b").with(TERMINAL, "merged");
        assert_eq!(joint_probability(&net, &a).unwrap(), 0.25);
        assert_eq!(infer_merge_probability(&net, &Evidence::new()).unwrap(), 0.5);
    }

    #[test]
    fn single_variable_identity() {
        let s = NetworkStructure::new(vec![CategoricalVariable::of::<Outcome>(TERMINAL)], vec![]).unwrap();
        let net = BayesNet::new(s, vec![Cpt::new(TERMINAL, vec![], vec![], 2, vec![0.1, 0.9]).unwrap()]).unwrap();
        let a = Assignment::new().with(TERMINAL, "merged");
        assert_eq!(joint_probability(&net, &a).unwrap(), 0.9);
        assert_eq!(infer_merge_probability(&net, &Evidence::new()).unwrap(), 0.9);
    }

    #[test]
    fn joint_matches_hand_multiplication() {
        let net = three_var();
        let a = Assignment::new()
            .with("size", "Medium")
            .with("num_patches", "High")
            .with(TERMINAL, "merged");
        // 0.3 * 0.4 * 0.5
        assert!((joint_probability(&net, &a).unwrap() - 0.06).abs() < 1e-15);
    }

    #[test]
    fn full_evidence_is_table_lookup() {
        let net = three_var();
        let e = Evidence::new().with("size", "Large").with("num_patches", "Low");
        assert!((infer_merge_probability(&net, &e).unwrap() - 0.4).abs() < 1e-15);
    }

    #[test]
    fn partial_evidence_matches_hand_enumeration() {
        // P(merged | Large) = sum_np P(np | Large) P(merged | Large, np)
        //                   = 0.25 * 0.4 + 0.75 * 0.1 = 0.175
        let net = three_var();
        let e = Evidence::new().with("size", "Large");
        assert!((infer_merge_probability(&net, &e).unwrap() - 0.175).abs() < 1e-15);
    }

    #[test]
    fn incomplete_assignment_lists_missing() {
        let net = three_var();
        let a = Assignment::new().with("size", "Large");
        assert_eq!(
            joint_probability(&net, &a).unwrap_err(),
            InferenceError::Incomplete(vec!["num_patches".into(), TERMINAL.into()])
        );
    }

    #[test]
    fn evidence_errors() {
        let net = three_var();
        assert_eq!(
            infer_merge_probability(&net, &Evidence::new().with(TERMINAL, "merged")).unwrap_err(),
            InferenceError::TerminalInEvidence
        );
        assert!(matches!(
            infer_merge_probability(&net, &Evidence::new().with("colour", "red")),
            Err(InferenceError::UnknownVariable(_))
        ));
        assert!(matches!(
            infer_merge_probability(&net, &Evidence::new().with("size", "Huge")),
            Err(InferenceError::UnknownState { .. })
        ));
    }

    #[test]
    fn impossible_evidence_is_degenerate() {
        let s = two_binary();
        let cpts = vec![
            Cpt::new("x", vec![], vec![], 2, vec![1.0, 0.0]).unwrap(),
            Cpt::uniform(TERMINAL, vec!["x".into()], vec![2], 2),
        ];
        let net = BayesNet::new(s, cpts).unwrap();
        assert_eq!(
            infer_merge_probability(&net, &Evidence::new().with("x", "b")).unwrap_err(),
            InferenceError::DegenerateEvidence
        );
    }
}
