mod common;

use lea_core::bisim::{
    box_bisimilar, circ_bisimilar, contract, is_circ_bisimulation, largest_circ_bisimulation,
    BisimRelation, Violation,
};
use lea_core::kripke::{disjoint_union, Model, PointedModel};
use lea_core::semantics::bounded_equivalent;
use proptest::prelude::*;

use common::{model_strategy, strings};

const VARS: &[&str] = &["p"];

fn self_loop_union() -> Model {
    let m = Model::from_strs(&["s"], &[("s", "s")], &[("p", &["s"])]).unwrap();
    let n = Model::from_strs(&["t"], &[], &[("p", &["t"])]).unwrap();
    disjoint_union(&m, &n)
}

#[test]
fn certificate_examples() {
    let u = self_loop_union();
    let z = BisimRelation::from_names(u.clone(), [("L:s", "L:s"), ("L:s", "R:t")]).unwrap();
    assert_eq!(is_circ_bisimulation(&z), Ok(()));
    assert!(largest_circ_bisimulation(&u).contains_names("L:s", "R:t"));
    assert_eq!(is_circ_bisimulation(&BisimRelation::empty(u)), Err(Violation::Empty));
}

#[test]
fn single_world_is_its_own_bisimulation() {
    let m = Model::from_strs(&["w"], &[("w", "w")], &[("p", &["w"])]).unwrap();
    let z = largest_circ_bisimulation(&m);
    assert_eq!(z.pairs().collect::<Vec<_>>(), vec![(0, 0)]);
}

#[test]
fn bisimilarity_examples() {
    let m = Model::from_strs(&["s"], &[("s", "s")], &[("p", &["s"])]).unwrap();
    let n = Model::from_strs(&["t"], &[], &[("p", &["t"])]).unwrap();
    let (ms, nt) = (PointedModel::at(m.clone(), 0), PointedModel::at(n, 0));
    assert!(circ_bisimilar(&ms, &nt));
    assert!(!box_bisimilar(&ms, &nt));
    assert!(box_bisimilar(&ms, &ms));

    let split = Model::from_strs(&["a", "b"], &[], &[("p", &["a"])]).unwrap();
    assert!(!circ_bisimilar(&PointedModel::at(split.clone(), 0), &PointedModel::at(split, 1)));
}

#[test]
fn contraction_collapses_duplicates() {
    let m = Model::from_strs(&["a", "b"], &[], &[("p", &["a", "b"])]).unwrap();
    let q = contract(&m);
    assert_eq!(q.model.len(), 1);
    assert_eq!(q.class_of, vec![0, 0]);
    assert_eq!(q.model.world_name(0), "[a]");
}

#[test]
fn relation_json_round_trips() {
    let u = self_loop_union();
    let z = largest_circ_bisimulation(&u);
    let text = serde_json::to_string(&z.to_json()).unwrap();
    assert_eq!(BisimRelation::from_json(u, &text).unwrap(), z);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn certified_relations_are_closed_under_union(
        m in model_strategy(4, VARS),
        picks in proptest::collection::vec(any::<u16>(), 2),
    ) {
        let largest = largest_circ_bisimulation(&m);
        let pairs: Vec<_> = largest.pairs().collect();
        // Sub-relations of the largest that happen to be certificates.
        let certified: Vec<BisimRelation> = picks
            .iter()
            .map(|mask| {
                BisimRelation::from_pairs(
                    m.clone(),
                    pairs.iter().enumerate().filter(|(i, _)| mask & (1 << (i % 16)) != 0).map(|(_, &p)| p),
                )
            })
            .filter(|z| is_circ_bisimulation(z).is_ok())
            .collect();
        for a in &certified {
            for b in &certified {
                prop_assert!(is_circ_bisimulation(&a.union(b)).is_ok());
            }
            prop_assert!(a.is_subset(&largest));
        }
    }

    #[test]
    fn largest_is_an_equivalence(m in model_strategy(5, VARS)) {
        let z = largest_circ_bisimulation(&m);
        let n = m.len();
        for a in 0..n {
            prop_assert!(z.contains(a, a));
            for b in 0..n {
                prop_assert_eq!(z.contains(a, b), z.contains(b, a));
                for c in 0..n {
                    prop_assert!(!(z.contains(a, b) && z.contains(b, c)) || z.contains(a, c));
                }
            }
        }
    }

    #[test]
    fn bisimilar_points_are_equivalent(
        a in model_strategy(3, VARS),
        b in model_strategy(3, VARS),
    ) {
        let vars = strings(VARS);
        for x in 0..a.len() {
            for y in 0..b.len() {
                let (pa, pb) = (PointedModel::at(a.clone(), x), PointedModel::at(b.clone(), y));
                if circ_bisimilar(&pa, &pb) {
                    prop_assert!(bounded_equivalent(&pa, &pb, &vars, 3).is_equivalent());
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn box_bisimilarity_implies_circ(
        a in model_strategy(4, VARS),
        b in model_strategy(4, VARS),
    ) {
        for x in 0..a.len() {
            for y in 0..b.len() {
                let (pa, pb) = (PointedModel::at(a.clone(), x), PointedModel::at(b.clone(), y));
                if box_bisimilar(&pa, &pb) {
                    prop_assert!(circ_bisimilar(&pa, &pb));
                }
            }
        }
    }
}
