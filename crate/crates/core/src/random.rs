//! Seeded generators for formulas and models, used by the randomized
//! harnesses.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bitset::BitSet;
use crate::formula::{Formula, Modality};
use crate::kripke::Model;

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A formula over `vars` whose modal depth is at most `depth`, using only
/// the given modality.
pub fn random_formula<R: Rng + ?Sized>(
    rng: &mut R,
    vars: &[String],
    depth: usize,
    modality: Modality,
) -> Formula {
    random_sized(rng, vars, depth, modality, 4)
}

fn random_sized<R: Rng + ?Sized>(
    rng: &mut R,
    vars: &[String],
    depth: usize,
    modality: Modality,
    budget: usize,
) -> Formula {
    if budget == 0 || rng.gen_bool(0.25) {
        return match rng.gen_range(0..12) {
            0 => Formula::Top,
            1 => Formula::Bot,
            _ => Formula::var(vars.choose(rng).expect("at least one variable").clone()),
        };
    }
    let sub = |rng: &mut R, d: usize| random_sized(rng, vars, d, modality, budget - 1);
    let pick = rng.gen_range(0..if depth > 0 { 8 } else { 5 });
    match pick {
        0 => Formula::not(sub(rng, depth)),
        1 => {
            let a = sub(rng, depth);
            Formula::and(a, sub(rng, depth))
        }
        2 => {
            let a = sub(rng, depth);
            Formula::or(a, sub(rng, depth))
        }
        3 => {
            let a = sub(rng, depth);
            Formula::implies(a, sub(rng, depth))
        }
        4 => {
            let a = sub(rng, depth);
            if rng.gen_bool(0.3) {
                Formula::iff(a, sub(rng, depth))
            } else {
                Formula::not(a)
            }
        }
        _ => Formula::modal(modality, sub(rng, depth - 1)),
    }
}

/// A random valuation over `vars` on `n` worlds.
pub fn random_valuation<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    vars: &[String],
) -> BTreeMap<String, BitSet> {
    vars.iter()
        .map(|v| (v.clone(), (0..n).filter(|_| rng.gen_bool(0.5)).collect()))
        .collect()
}

/// A model on `n` worlds where each edge is present with probability
/// `edge_prob`.
pub fn random_model<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    vars: &[String],
    edge_prob: f64,
) -> Model {
    let succ = (0..n)
        .map(|_| (0..n).filter(|_| rng.gen_bool(edge_prob)).collect())
        .collect();
    let val = random_valuation(rng, n, vars);
    Model::from_successors(succ, val)
}

/// A model whose relation is an equivalence with random blocks.
pub fn random_s5_model<R: Rng + ?Sized>(rng: &mut R, n: usize, vars: &[String]) -> Model {
    let blocks: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n)).collect();
    let succ = (0..n)
        .map(|w| (0..n).filter(|&v| blocks[v] == blocks[w]).collect())
        .collect();
    let val = random_valuation(rng, n, vars);
    Model::from_successors(succ, val)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kripke::{FrameClass, FrameProperty, has_property};

    fn vars() -> Vec<String> {
        vec!["p".into(), "q".into()]
    }

    #[test]
    fn formulas_respect_depth_and_fragment() {
        let mut rng = seeded(7);
        for _ in 0..500 {
            let f = random_formula(&mut rng, &vars(), 3, Modality::Ess);
            assert!(f.modal_depth() <= 3);
            assert!(f.is_lea());
            let g = random_formula(&mut rng, &vars(), 2, Modality::Box);
            assert!(g.modal_depth() <= 2 && g.is_ml());
        }
    }

    #[test]
    fn same_seed_same_output() {
        let a = random_formula(&mut seeded(3), &vars(), 3, Modality::Ess);
        let b = random_formula(&mut seeded(3), &vars(), 3, Modality::Ess);
        assert_eq!(a, b);
    }

    #[test]
    fn s5_models_are_equivalences() {
        let mut rng = seeded(11);
        for n in 1..=5 {
            let m = random_s5_model(&mut rng, n, &vars());
            assert!(FrameClass::S5.contains(&m));
            assert!(has_property(&m, FrameProperty::Euclidean));
        }
    }
}
