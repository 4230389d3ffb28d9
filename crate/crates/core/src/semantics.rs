//! Model checking, frame validity, frame-definability checks, and bounded
//! equivalence via a layered formula enumerator.

use std::collections::HashSet;
use std::fmt;

use thiserror::Error;

use crate::bitset::BitSet;
use crate::formula::{Formula, Modality};
use crate::kripke::{
    disjoint_union, enumerate_frames, enumerate_valuations, has_property, right_index,
    FrameProperty, Model, PointedModel,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SemanticsError {
    #[error("unknown world id `{0}`")]
    UnknownWorld(String),
}

/// The set of worlds of `m` where `f` holds.
pub fn extension(m: &Model, f: &Formula) -> BitSet {
    if m.len() <= 64 {
        let succ: Vec<u64> = m
            .all_successors()
            .iter()
            .map(|s| s.to_mask().expect("successors of a small model"))
            .collect();
        return BitSet::from_mask(extension_mask(m, &succ, f));
    }
    extension_wide(m, f)
}

// Same clauses as `extension_wide`, on 64-bit masks.
fn extension_mask(m: &Model, succ: &[u64], f: &Formula) -> u64 {
    let n = succ.len();
    let full = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let ext = |g: &Formula| extension_mask(m, succ, g);
    match f {
        Formula::Var(p) => m
            .valuation()
            .get(p)
            .map_or(0, |s| s.to_mask().expect("valuation of a small model")),
        Formula::Top => full,
        Formula::Bot => 0,
        Formula::Not(a) => !ext(a) & full,
        Formula::And(a, b) => ext(a) & ext(b),
        Formula::Or(a, b) => ext(a) | ext(b),
        Formula::Implies(a, b) => (!ext(a) | ext(b)) & full,
        Formula::Iff(a, b) => !(ext(a) ^ ext(b)) & full,
        Formula::Ess(a) => {
            let inner = ext(a);
            (0..n)
                .filter(|&w| inner & (1 << w) == 0 || succ[w] & !inner == 0)
                .fold(0, |acc, w| acc | 1 << w)
        }
        Formula::Box(a) => {
            let inner = ext(a);
            (0..n)
                .filter(|&w| succ[w] & !inner == 0)
                .fold(0, |acc, w| acc | 1 << w)
        }
    }
}

fn extension_wide(m: &Model, f: &Formula) -> BitSet {
    let n = m.len();
    let extension = extension_wide;
    match f {
        Formula::Var(p) => m.truth_set(p),
        Formula::Top => BitSet::full(n),
        Formula::Bot => BitSet::new(),
        Formula::Not(a) => extension(m, a).complement(n),
        Formula::And(a, b) => extension(m, a).intersection(&extension(m, b)),
        Formula::Or(a, b) => extension(m, a).union(&extension(m, b)),
        Formula::Implies(a, b) => extension(m, a).complement(n).union(&extension(m, b)),
        Formula::Iff(a, b) => {
            let (x, y) = (extension(m, a), extension(m, b));
            let both = x.intersection(&y);
            let neither = x.union(&y).complement(n);
            both.union(&neither)
        }
        Formula::Ess(a) => ess_set(m, &extension(m, a)),
        Formula::Box(a) => box_set(m, &extension(m, a)),
    }
}

/// Worlds where `o φ` holds given the extension of `φ`.
pub fn ess_set(m: &Model, inner: &BitSet) -> BitSet {
    (0..m.len())
        .filter(|&w| !inner.contains(w) || m.successors(w).is_subset(inner))
        .collect()
}

/// Worlds where `[] φ` holds given the extension of `φ`.
pub fn box_set(m: &Model, inner: &BitSet) -> BitSet {
    (0..m.len())
        .filter(|&w| m.successors(w).is_subset(inner))
        .collect()
}

fn modal_set(m: &Model, op: Modality, inner: &BitSet) -> BitSet {
    match op {
        Modality::Ess => ess_set(m, inner),
        Modality::Box => box_set(m, inner),
    }
}

/// Truth of `f` at world `w` (by index).
pub fn holds_at(m: &Model, w: usize, f: &Formula) -> bool {
    extension(m, f).contains(w)
}

/// Truth of `f` at the world named `world`.
pub fn satisfies(m: &Model, world: &str, f: &Formula) -> Result<bool, SemanticsError> {
    let w = m
        .world_index(world)
        .ok_or_else(|| SemanticsError::UnknownWorld(world.to_string()))?;
    Ok(holds_at(m, w, f))
}

pub fn valid_in_model(m: &Model, f: &Formula) -> bool {
    extension(m, f).len() == m.len()
}

/// A valuation on `frame` and a world at which `f` fails, if any.
pub fn frame_countermodel(frame: &Model, f: &Formula) -> Option<(Model, usize)> {
    let vars: Vec<String> = f.vars().into_iter().collect();
    let full = frame.full_set();
    enumerate_valuations(frame, &vars).find_map(|m| {
        let ext = extension(&m, f);
        let bad = full.difference(&ext).first()?;
        Some((m, bad))
    })
}

/// True iff `f` holds at every world under every valuation of its variables.
/// The frame's own valuation is ignored.
pub fn valid_on_frame(frame: &Model, f: &Formula) -> bool {
    frame_countermodel(&frame.frame(), f).is_none()
}

/// Which half of a definability biconditional failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// The frame has the property but the formula is not valid on it.
    PropertyButInvalid,
    /// The formula is valid on the frame but the frame lacks the property.
    ValidButNoProperty,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DefinabilityOutcome {
    Confirmed,
    Refuted {
        frame: Model,
        direction: Direction,
        /// For [`Direction::PropertyButInvalid`]: the falsifying valuation and world.
        countermodel: Option<(Model, usize)>,
    },
}

/// Bounded evidence that `formula` defines `property`: the verdict only
/// covers frames with at most `max_n` worlds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DefinabilityVerdict {
    pub property: FrameProperty,
    pub formula: Formula,
    pub max_n: usize,
    pub outcome: DefinabilityOutcome,
}

impl DefinabilityVerdict {
    pub fn is_confirmed(&self) -> bool {
        self.outcome == DefinabilityOutcome::Confirmed
    }
}

impl fmt::Display for DefinabilityVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.outcome {
            DefinabilityOutcome::Confirmed => write!(f, "Confirmed up to n={}", self.max_n),
            DefinabilityOutcome::Refuted {
                frame,
                direction,
                countermodel,
            } => {
                let why = match direction {
                    Direction::PropertyButInvalid => "frame is {} but the formula is not valid on it",
                    Direction::ValidButNoProperty => "formula is valid but the frame is not {}",
                };
                write!(
                    f,
                    "Refuted (searched up to n={}): {}; frame {}",
                    self.max_n,
                    why.replace("{}", self.property.name()),
                    frame.to_json_string(None)
                )?;
                if let Some((m, w)) = countermodel {
                    write!(f, "; countermodel {}", m.to_json_string(Some(*w)))?;
                }
                Ok(())
            }
        }
    }
}

/// Checks `has_property(F) <-> F |= f` on every frame with 1..=max_n worlds
/// and reports the first frame (in enumeration order) where it fails.
pub fn check_definability(
    property: FrameProperty,
    formula: &Formula,
    max_n: usize,
) -> DefinabilityVerdict {
    assert!(max_n >= 1);
    let outcome = (1..=max_n)
        .flat_map(enumerate_frames)
        .find_map(|frame| {
            let has = has_property(&frame, property);
            let counter = frame_countermodel(&frame, formula);
            match (has, counter) {
                (true, Some(cm)) => Some(DefinabilityOutcome::Refuted {
                    frame,
                    direction: Direction::PropertyButInvalid,
                    countermodel: Some(cm),
                }),
                (false, None) => Some(DefinabilityOutcome::Refuted {
                    frame,
                    direction: Direction::ValidButNoProperty,
                    countermodel: None,
                }),
                _ => None,
            }
        })
        .unwrap_or(DefinabilityOutcome::Confirmed);
    DefinabilityVerdict {
        property,
        formula: formula.clone(),
        max_n,
        outcome,
    }
}

// ---------------------------------------------------------------------------
// Layered enumeration
// ---------------------------------------------------------------------------

/// How a representative formula is built. Formulas are materialised lazily
/// because nested layers grow quickly.
#[derive(Debug, Clone)]
enum Recipe {
    Var(String),
    /// The modal operator applied to a union of atoms; each atom is a
    /// conjunction of earlier representatives or their negations.
    Modal(Vec<Vec<(usize, bool)>>),
}

#[derive(Debug, Clone)]
struct Rep {
    extension: BitSet,
    layer: usize,
    recipe: Recipe,
}

/// Representatives of all formulas over a fixed variable set up to a modal
/// depth, modulo equivalence on one model.
///
/// Layer 0 holds the variables. Layer `k+1` applies the modality to every
/// boolean combination of layer-`<=k` representatives; each combination is
/// a union of atoms of the partition those representatives induce. A
/// representative is kept only if its truth set is new, so the enumeration
/// stays small while reaching every truth set a formula of that depth can
/// have on this model.
#[derive(Debug, Clone)]
pub struct FormulaLayers {
    modality: Modality,
    reps: Vec<Rep>,
}

/// Atom partitions with more blocks than this take `2^atoms` work per layer.
const ATOM_WARN: usize = 16;

impl FormulaLayers {
    pub fn build(m: &Model, vars: &[String], depth: usize, modality: Modality) -> FormulaLayers {
        let mut reps: Vec<Rep> = Vec::new();
        let mut seen: HashSet<BitSet> = HashSet::new();
        for v in vars {
            let ext = m.truth_set(v);
            if seen.insert(ext.clone()) {
                reps.push(Rep {
                    extension: ext,
                    layer: 0,
                    recipe: Recipe::Var(v.clone()),
                });
            }
        }
        let mut prev_atoms = 0;
        for layer in 1..=depth {
            let atoms = atoms_of(m, &reps);
            if atoms.len() == prev_atoms {
                // Same partition as before the last layer, so this layer
                // would only repeat it.
                break;
            }
            prev_atoms = atoms.len();
            if atoms.len() > ATOM_WARN {
                log::warn!("layered enumeration over {} atoms", atoms.len());
            }
            let mut fresh = Vec::new();
            for mask in 0u64..(1u64 << atoms.len()) {
                let mut union = BitSet::new();
                let mut parts = Vec::new();
                for (i, (set, lits)) in atoms.iter().enumerate() {
                    if mask & (1 << i) != 0 {
                        union.union_with(set);
                        parts.push(lits.clone());
                    }
                }
                let ext = modal_set(m, modality, &union);
                if seen.insert(ext.clone()) {
                    fresh.push(Rep {
                        extension: ext,
                        layer,
                        recipe: Recipe::Modal(parts),
                    });
                }
            }
            if fresh.is_empty() {
                // The partition is stable; deeper layers add nothing.
                break;
            }
            reps.extend(fresh);
        }
        FormulaLayers { modality, reps }
    }

    pub fn len(&self) -> usize {
        self.reps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reps.is_empty()
    }

    pub fn extension(&self, i: usize) -> &BitSet {
        &self.reps[i].extension
    }

    pub fn layer(&self, i: usize) -> usize {
        self.reps[i].layer
    }

    /// The formula of representative `i`; its modal depth is `layer(i)`.
    pub fn formula(&self, i: usize) -> Formula {
        match &self.reps[i].recipe {
            Recipe::Var(v) => Formula::var(v.clone()),
            Recipe::Modal(atoms) => {
                let body = if atoms.is_empty() {
                    Formula::Bot
                } else if atoms.iter().any(|a| a.is_empty()) {
                    Formula::Top
                } else {
                    Formula::disj(atoms.iter().map(|lits| {
                        Formula::conj(lits.iter().map(|&(j, pos)| {
                            let f = self.formula(j);
                            if pos {
                                f
                            } else {
                                Formula::not(f)
                            }
                        }))
                    }))
                };
                Formula::modal(self.modality, body)
            }
        }
    }

    pub fn formulas(&self) -> impl Iterator<Item = Formula> + '_ {
        (0..self.reps.len()).map(|i| self.formula(i))
    }

    /// Class index per world: worlds share a class iff every representative
    /// agrees on them.
    pub fn classes(&self, n: usize) -> Vec<usize> {
        let mut keys: Vec<Vec<bool>> = Vec::new();
        (0..n)
            .map(|w| {
                let key: Vec<bool> = self.reps.iter().map(|r| r.extension.contains(w)).collect();
                match keys.iter().position(|k| *k == key) {
                    Some(i) => i,
                    None => {
                        keys.push(key);
                        keys.len() - 1
                    }
                }
            })
            .collect()
    }

    /// First representative true at exactly one of `a`, `b`, oriented to be
    /// true at `a`.
    pub fn separate(&self, a: usize, b: usize) -> Option<Formula> {
        self.reps.iter().enumerate().find_map(|(i, r)| {
            let (ta, tb) = (r.extension.contains(a), r.extension.contains(b));
            (ta != tb).then(|| {
                let f = self.formula(i);
                if ta {
                    f
                } else {
                    Formula::not(f)
                }
            })
        })
    }
}

// Partition of the worlds by the representatives, refining one
// representative at a time; a literal is recorded only when it splits.
fn atoms_of(m: &Model, reps: &[Rep]) -> Vec<(BitSet, Vec<(usize, bool)>)> {
    let mut atoms = vec![(m.full_set(), Vec::new())];
    for (i, rep) in reps.iter().enumerate() {
        let mut next = Vec::with_capacity(atoms.len() * 2);
        for (set, lits) in atoms {
            let inside = set.intersection(&rep.extension);
            let outside = set.difference(&rep.extension);
            if inside.is_empty() || outside.is_empty() {
                next.push((set, lits));
            } else {
                let mut pos = lits.clone();
                pos.push((i, true));
                let mut neg = lits;
                neg.push((i, false));
                next.push((inside, pos));
                next.push((outside, neg));
            }
        }
        atoms = next;
    }
    atoms
}

/// Outcome of a bounded equivalence query.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BoundedEquivalence {
    Equivalent,
    /// A formula true at the first pointed model and false at the second.
    Distinguished(Formula),
}

impl BoundedEquivalence {
    pub fn is_equivalent(&self) -> bool {
        matches!(self, BoundedEquivalence::Equivalent)
    }
}

/// Compares two pointed models on every essence formula over `vars` of modal
/// depth at most `depth`.
pub fn bounded_equivalent(
    a: &PointedModel,
    b: &PointedModel,
    vars: &[String],
    depth: usize,
) -> BoundedEquivalence {
    if depth > 4 || vars.len() > 2 {
        log::warn!("bounded equivalence beyond depth 4 / two variables may be slow");
    }
    let union = disjoint_union(&a.model, &b.model);
    let layers = FormulaLayers::build(&union, vars, depth, Modality::Ess);
    match layers.separate(a.point, right_index(&a.model, b.point)) {
        Some(f) => BoundedEquivalence::Distinguished(f),
        None => BoundedEquivalence::Equivalent,
    }
}

/// Bounded equivalence classes of all worlds of one model at once.
pub fn bounded_equivalence_classes(m: &Model, vars: &[String], depth: usize) -> Vec<usize> {
    FormulaLayers::build(m, vars, depth, Modality::Ess).classes(m.len())
}
