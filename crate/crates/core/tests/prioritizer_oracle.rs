mod common;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use reviewq_core::prioritizer::PrioritizeError;
use reviewq_core::{prioritize, ChangeType, MergeConflict, PrioritizedItem, ReviewItem};

use common::oracles::{oracle_order, random_items};

fn item(id: &str, conflict: MergeConflict, kind: ChangeType, p: f64) -> ReviewItem {
    ReviewItem {
        change_id: id.into(),
        subject: format!("subject of {id}"),
        merge_conflict: conflict,
        change_type: kind,
        merge_probability: p,
        age_minutes: 60.0,
        degraded: false,
    }
}

fn ids(out: &[PrioritizedItem]) -> Vec<String> {
    out.iter().map(|i| i.change_id.clone()).collect()
}

fn check_invariants(input: &[ReviewItem], out: &[PrioritizedItem]) {
    assert_eq!(out.len(), input.len());
    let mut a = ids(out);
    let mut b: Vec<String> = input.iter().map(|i| i.change_id.clone()).collect();
    a.sort();
    b.sort();
    assert_eq!(a, b, "output is not a permutation of the input");
    for (pos, it) in out.iter().enumerate() {
        assert_eq!(it.rank, pos + 1);
    }
    for w in out.windows(2) {
        let (x, y) = (&w[0], &w[1]);
        assert!(x.merge_conflict <= y.merge_conflict, "conflict group order");
        if x.merge_conflict == y.merge_conflict {
            assert!(x.change_type <= y.change_type, "type group order");
            if x.change_type == y.change_type {
                assert!(x.merge_probability >= y.merge_probability, "probability order");
            }
        }
    }
}

#[test]
fn thousand_random_lists_match_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(1000);
    for _ in 0..1000 {
        let n = rng.gen_range(0..60);
        let items = random_items(&mut rng, n);
        let out = prioritize(items.clone()).unwrap();
        assert_eq!(ids(&out), oracle_order(&items));
        check_invariants(&items, &out);
    }
}

#[test]
fn fifty_items_match_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(50);
    let items = random_items(&mut rng, 50);
    assert_eq!(ids(&prioritize(items.clone()).unwrap()), oracle_order(&items));
}

#[test]
fn type_dominates_probability() {
    let a = item("A", MergeConflict::No, ChangeType::Feature, 0.9);
    let b = item("B", MergeConflict::No, ChangeType::TroubleReport, 0.2);
    assert_eq!(ids(&prioritize(vec![a, b]).unwrap()), ["B", "A"]);
}

#[test]
fn conflict_dominates_everything() {
    let c = item("C", MergeConflict::Yes, ChangeType::TroubleReport, 0.99);
    let d = item("D", MergeConflict::No, ChangeType::Refactoring, 0.10);
    assert_eq!(ids(&prioritize(vec![c, d]).unwrap()), ["D", "C"]);
}

#[test]
fn fields_survive_ranking() {
    let mut a = item("A", MergeConflict::No, ChangeType::Feature, 0.5);
    a.degraded = true;
    let out = prioritize(vec![a.clone()]).unwrap();
    assert_eq!(out[0].subject, a.subject);
    assert!(out[0].degraded);
    assert_eq!(out[0].age_minutes, a.age_minutes);
}

#[test]
fn out_of_range_probability_rejected() {
    for bad in [-0.01, 1.01, f64::NAN] {
        let items = vec![item("A", MergeConflict::No, ChangeType::Feature, bad)];
        assert!(matches!(prioritize(items), Err(PrioritizeError::ProbabilityOutOfRange { .. })));
    }
}

proptest! {
    #[test]
    fn order_ignores_input_order(seed in any::<u64>(), n in 0usize..40) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let items = random_items(&mut rng, n);
        let mut shuffled = items.clone();
        shuffled.shuffle(&mut rng);
        prop_assert_eq!(prioritize(items).unwrap(), prioritize(shuffled).unwrap());
    }
}
