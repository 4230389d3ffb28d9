//! Helpers shared by the integration tests: independent oracles and
//! proptest strategies.

#![allow(dead_code)]

use std::collections::BTreeMap;

use lea_core::bitset::BitSet;
use lea_core::formula::Formula;
use lea_core::kripke::{enumerate_frames, enumerate_valuations, Model};
use proptest::prelude::*;

/// Truth of `f` at world `w`, straight from the satisfaction clauses, one
/// world at a time. Shares no code with the library evaluator.
pub fn eval(m: &Model, w: usize, f: &Formula) -> bool {
    match f {
        Formula::Var(p) => m.valuation().get(p).is_some_and(|s| s.contains(w)),
        Formula::Top => true,
        Formula::Bot => false,
        Formula::Not(a) => !eval(m, w, a),
        Formula::And(a, b) => eval(m, w, a) && eval(m, w, b),
        Formula::Or(a, b) => eval(m, w, a) || eval(m, w, b),
        Formula::Implies(a, b) => !eval(m, w, a) || eval(m, w, b),
        Formula::Iff(a, b) => eval(m, w, a) == eval(m, w, b),
        Formula::Box(a) => (0..m.len()).all(|t| !m.has_edge(w, t) || eval(m, t, a)),
        Formula::Ess(a) => {
            let here = eval(m, w, a);
            !here || (0..m.len()).all(|t| !m.has_edge(w, t) || eval(m, t, a))
        }
    }
}

/// Every model with 1..=max_n worlds and every valuation over `vars`.
pub fn all_models(max_n: usize, vars: &[&str]) -> Vec<Model> {
    let vars: Vec<String> = vars.iter().map(|s| s.to_string()).collect();
    (1..=max_n)
        .flat_map(enumerate_frames)
        .flat_map(|fr| enumerate_valuations(&fr, &vars).collect::<Vec<_>>())
        .collect()
}

pub fn strings(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

/// Formulas over `vars` with modal depth at most `depth`; `ess` and `boxed`
/// select the modal operators allowed.
pub fn formula_strategy(
    vars: &'static [&'static str],
    depth: usize,
    ess: bool,
    boxed: bool,
) -> BoxedStrategy<Formula> {
    let leaf = prop_oneof![
        6 => proptest::sample::select(vars).prop_map(Formula::var),
        1 => Just(Formula::Top),
        1 => Just(Formula::Bot),
    ]
    .boxed();
    build(leaf, vars, depth, ess, boxed, 3)
}

fn build(
    leaf: BoxedStrategy<Formula>,
    vars: &'static [&'static str],
    depth: usize,
    ess: bool,
    boxed: bool,
    size: u32,
) -> BoxedStrategy<Formula> {
    if size == 0 {
        return leaf;
    }
    let same = build(leaf.clone(), vars, depth, ess, boxed, size - 1);
    let mut options: Vec<(u32, BoxedStrategy<Formula>)> = vec![
        (3, leaf),
        (2, same.clone().prop_map(Formula::not).boxed()),
        (2, (same.clone(), same.clone()).prop_map(|(a, b)| Formula::and(a, b)).boxed()),
        (2, (same.clone(), same.clone()).prop_map(|(a, b)| Formula::or(a, b)).boxed()),
        (2, (same.clone(), same.clone()).prop_map(|(a, b)| Formula::implies(a, b)).boxed()),
        (1, (same.clone(), same).prop_map(|(a, b)| Formula::iff(a, b)).boxed()),
    ];
    if depth > 0 {
        let below = build(
            prop_oneof![
                6 => proptest::sample::select(vars).prop_map(Formula::var),
                1 => Just(Formula::Top),
                1 => Just(Formula::Bot),
            ]
            .boxed(),
            vars,
            depth - 1,
            ess,
            boxed,
            size - 1,
        );
        if ess {
            options.push((3, below.clone().prop_map(Formula::ess).boxed()));
        }
        if boxed {
            options.push((3, below.prop_map(Formula::boxed).boxed()));
        }
    }
    proptest::strategy::Union::new_weighted(options).boxed()
}

/// Models with 1..=max_n worlds over `vars`.
pub fn model_strategy(max_n: usize, vars: &'static [&'static str]) -> BoxedStrategy<Model> {
    (1..=max_n)
        .prop_flat_map(move |n| {
            (
                Just(n),
                proptest::collection::vec(any::<u64>(), n),
                proptest::collection::vec(any::<u64>(), vars.len()),
            )
        })
        .prop_map(move |(n, rows, vals)| {
            let row_mask = (1u64 << n) - 1;
            let succ = rows.iter().map(|r| BitSet::from_mask(r & row_mask)).collect();
            let val: BTreeMap<String, BitSet> = vars
                .iter()
                .zip(vals)
                .map(|(v, bits)| (v.to_string(), BitSet::from_mask(bits & row_mask)))
                .collect();
            Model::from_successors(succ, val)
        })
        .boxed()
}
