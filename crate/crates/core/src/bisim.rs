//! Essence bisimulations: checking, the largest one on a model, cross-model
//! bisimilarity (both flavours), and contraction.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bitset::BitSet;
use crate::kripke::{disjoint_union, right_index, Model, PointedModel};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BisimError {
    #[error("unknown world id `{0}`")]
    UnknownWorld(String),
    #[error("invalid relation JSON: {0}")]
    Json(String),
}

/// A binary relation on the worlds of one carrier model, stored as rows:
/// `rows[s]` holds every `t` with `(s, t)` in the relation.
#[derive(Clone, PartialEq, Eq)]
pub struct BisimRelation {
    pub carrier: Model,
    rows: Vec<BitSet>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelationJson {
    pub pairs: Vec<[String; 2]>,
}

impl BisimRelation {
    pub fn empty(carrier: Model) -> BisimRelation {
        let rows = vec![BitSet::new(); carrier.len()];
        BisimRelation { carrier, rows }
    }

    pub fn from_pairs(
        carrier: Model,
        pairs: impl IntoIterator<Item = (usize, usize)>,
    ) -> BisimRelation {
        let mut z = BisimRelation::empty(carrier);
        for (a, b) in pairs {
            z.insert(a, b);
        }
        z
    }

    /// Builds a relation from world ids.
    pub fn from_names<'a>(
        carrier: Model,
        pairs: impl IntoIterator<Item = (&'a str, &'a str)>,
    ) -> Result<BisimRelation, BisimError> {
        let idx = |w: &str| {
            carrier
                .world_index(w)
                .ok_or_else(|| BisimError::UnknownWorld(w.to_string()))
        };
        let pairs = pairs
            .into_iter()
            .map(|(a, b)| Ok((idx(a)?, idx(b)?)))
            .collect::<Result<Vec<_>, BisimError>>()?;
        Ok(BisimRelation::from_pairs(carrier, pairs))
    }

    /// Parses `{"pairs": [["L:s","R:t"], ...]}` against `carrier`.
    pub fn from_json(carrier: Model, text: &str) -> Result<BisimRelation, BisimError> {
        let wire: RelationJson =
            serde_json::from_str(text).map_err(|e| BisimError::Json(e.to_string()))?;
        BisimRelation::from_names(
            carrier,
            wire.pairs.iter().map(|[a, b]| (a.as_str(), b.as_str())),
        )
    }

    pub fn to_json(&self) -> RelationJson {
        RelationJson {
            pairs: self
                .pairs()
                .map(|(a, b)| {
                    [
                        self.carrier.world_name(a).to_string(),
                        self.carrier.world_name(b).to_string(),
                    ]
                })
                .collect(),
        }
    }

    pub fn insert(&mut self, a: usize, b: usize) {
        assert!(a < self.rows.len() && b < self.rows.len(), "world out of range");
        self.rows[a].insert(b);
    }

    pub fn remove(&mut self, a: usize, b: usize) {
        self.rows[a].remove(b);
    }

    pub fn contains(&self, a: usize, b: usize) -> bool {
        self.rows[a].contains(b)
    }

    pub fn contains_names(&self, a: &str, b: &str) -> bool {
        match (self.carrier.world_index(a), self.carrier.world_index(b)) {
            (Some(a), Some(b)) => self.contains(a, b),
            _ => false,
        }
    }

    pub fn row(&self, a: usize) -> &BitSet {
        &self.rows[a]
    }

    pub fn is_empty(&self) -> bool {
        self.rows.iter().all(BitSet::is_empty)
    }

    pub fn len(&self) -> usize {
        self.rows.iter().map(BitSet::len).sum()
    }

    /// Pairs in lexicographic order of world index.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(a, row)| row.iter().map(move |b| (a, b)))
    }

    pub fn union(&self, other: &BisimRelation) -> BisimRelation {
        let rows = self
            .rows
            .iter()
            .zip(&other.rows)
            .map(|(a, b)| a.union(b))
            .collect();
        BisimRelation {
            carrier: self.carrier.clone(),
            rows,
        }
    }

    pub fn is_subset(&self, other: &BisimRelation) -> bool {
        self.rows.iter().zip(&other.rows).all(|(a, b)| a.is_subset(b))
    }
}

impl fmt::Debug for BisimRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<_> = self
            .pairs()
            .map(|(a, b)| (self.carrier.world_name(a), self.carrier.world_name(b)))
            .collect();
        write!(f, "BisimRelation{names:?}")
    }
}

/// The first condition a candidate relation breaks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    Empty,
    /// The pair disagrees on a variable.
    Inv { pair: (String, String), var: String },
    /// `s R t`, `(s, t)` not in Z, and no successor of `s'` is related to `t`.
    Forth { pair: (String, String), succ: String },
    /// `s' R t'`, `(s', t')` not in Z, and no successor of `s` is related to `t'`.
    Back { pair: (String, String), succ: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Empty => write!(f, "relation is empty"),
            Violation::Inv { pair: (a, b), var } => {
                write!(f, "({a}, {b}) disagree on `{var}`")
            }
            Violation::Forth { pair: (a, b), succ } => write!(
                f,
                "forth fails at ({a}, {b}): {a} R {succ}, ({a}, {succ}) not related, and no successor of {b} matches {succ}"
            ),
            Violation::Back { pair: (a, b), succ } => write!(
                f,
                "back fails at ({a}, {b}): {b} R {succ}, ({b}, {succ}) not related, and no successor of {a} matches {succ}"
            ),
        }
    }
}

/// The first variable on which two worlds disagree, if any.
fn same_atoms(m: &Model, a: usize, b: usize) -> Option<String> {
    m.valuation()
        .iter()
        .find(|(_, set)| set.contains(a) != set.contains(b))
        .map(|(p, _)| p.clone())
}

// Columns of a relation given as rows.
fn transpose(rows: &[BitSet]) -> Vec<BitSet> {
    let mut cols = vec![BitSet::new(); rows.len()];
    for (a, row) in rows.iter().enumerate() {
        for b in row.iter() {
            cols[b].insert(a);
        }
    }
    cols
}

fn forth_failure(m: &Model, rows: &[BitSet], s: usize, s2: usize) -> Option<usize> {
    let target = m.successors(s2);
    m.successors(s)
        .iter()
        .find(|&t| !rows[s].contains(t) && !rows[t].intersects(target))
}

fn back_failure(
    m: &Model,
    rows: &[BitSet],
    cols: &[BitSet],
    s: usize,
    s2: usize,
) -> Option<usize> {
    let source = m.successors(s);
    m.successors(s2)
        .iter()
        .find(|&t2| !rows[s2].contains(t2) && !cols[t2].intersects(source))
}

/// Checks nonemptiness, (Inv), forth, and back, in that order, pair by pair
/// in lexicographic order.
pub fn is_circ_bisimulation(z: &BisimRelation) -> Result<(), Violation> {
    if z.is_empty() {
        return Err(Violation::Empty);
    }
    let m = &z.carrier;
    let cols = transpose(&z.rows);
    let name = |i: usize| m.world_name(i).to_string();
    for (s, s2) in z.pairs() {
        let pair = (name(s), name(s2));
        if let Some(var) = same_atoms(m, s, s2) {
            return Err(Violation::Inv { pair, var });
        }
        if let Some(t) = forth_failure(m, &z.rows, s, s2) {
            return Err(Violation::Forth { pair, succ: name(t) });
        }
        if let Some(t2) = back_failure(m, &z.rows, &cols, s, s2) {
            return Err(Violation::Back { pair, succ: name(t2) });
        }
    }
    Ok(())
}

/// The union of all essence bisimulations on `m`.
///
/// Starts from every (Inv)-respecting pair and deletes violators until a
/// sweep deletes nothing. A violation with respect to `Z` stays a violation
/// with respect to any subset of `Z` (the side condition `(s, t)` not in `Z`
/// and the missing witness are both antitone), so no pair of a genuine
/// bisimulation is ever removed and the fixpoint is the largest one.
pub fn largest_circ_bisimulation(m: &Model) -> BisimRelation {
    let n = m.len();
    let mut rows: Vec<BitSet> = (0..n)
        .map(|a| (0..n).filter(|&b| same_atoms(m, a, b).is_none()).collect())
        .collect();
    let mut cols = transpose(&rows);
    loop {
        let mut changed = false;
        for s in 0..n {
            for s2 in rows[s].clone().iter() {
                let bad = forth_failure(m, &rows, s, s2).is_some()
                    || back_failure(m, &rows, &cols, s, s2).is_some();
                if bad {
                    rows[s].remove(s2);
                    cols[s2].remove(s);
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    BisimRelation {
        carrier: m.clone(),
        rows,
    }
}

/// Whether the two points are related by some essence bisimulation on the
/// disjoint union of their models.
pub fn circ_bisimilar(a: &PointedModel, b: &PointedModel) -> bool {
    let union = disjoint_union(&a.model, &b.model);
    largest_circ_bisimulation(&union).contains(a.point, right_index(&a.model, b.point))
}

/// Classes of the largest standard bisimulation on `m`, by signature
/// refinement. Worlds share a class id iff they are bisimilar.
pub fn box_bisimulation_classes(m: &Model) -> Vec<usize> {
    let n = m.len();
    let mut class = relabel((0..n).map(|w| {
        m.valuation()
            .values()
            .map(|set| set.contains(w))
            .collect::<Vec<bool>>()
    }));
    loop {
        let next = relabel((0..n).map(|w| {
            let succ: BitSet = m.successors(w).iter().map(|t| class[t]).collect();
            (class[w], succ)
        }));
        let stable = next.iter().max() == class.iter().max();
        class = next;
        if stable {
            return class;
        }
    }
}

// Dense ids by first occurrence of each key.
fn relabel<K: Ord>(keys: impl Iterator<Item = K>) -> Vec<usize> {
    let mut ids = BTreeMap::new();
    keys.map(|k| {
        let next = ids.len();
        *ids.entry(k).or_insert(next)
    })
    .collect()
}

/// Standard bisimilarity of the two points.
pub fn box_bisimilar(a: &PointedModel, b: &PointedModel) -> bool {
    let union = disjoint_union(&a.model, &b.model);
    let class = box_bisimulation_classes(&union);
    class[a.point] == class[right_index(&a.model, b.point)]
}

/// The contracted model together with the class of each original world.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Quotient {
    pub model: Model,
    /// Index into `model` of each original world's class.
    pub class_of: Vec<usize>,
}

impl Quotient {
    /// Id of the class containing the original world `w`.
    pub fn class_name(&self, w: usize) -> &str {
        self.model.world_name(self.class_of[w])
    }
}

/// Quotient of `m` by its largest essence bisimulation. Each class is named
/// `[w]` after its lexicographically least member id; classes are ordered by
/// their first world.
pub fn contract(m: &Model) -> Quotient {
    let z = largest_circ_bisimulation(m);
    let n = m.len();
    let mut reps: Vec<usize> = Vec::new();
    let mut class_of = vec![0; n];
    for (w, class) in class_of.iter_mut().enumerate() {
        *class = match reps.iter().position(|&r| z.contains(r, w)) {
            Some(c) => c,
            None => {
                reps.push(w);
                reps.len() - 1
            }
        };
    }
    let names: Vec<String> = reps
        .iter()
        .map(|&r| {
            let least = z
                .row(r)
                .iter()
                .map(|w| m.world_name(w))
                .min()
                .expect("classes are nonempty");
            format!("[{least}]")
        })
        .collect();
    let mut rel = Vec::new();
    for (a, b) in m.edges() {
        rel.push((names[class_of[a]].clone(), names[class_of[b]].clone()));
    }
    let val = m.valuation().iter().map(|(p, set)| {
        let mut ws: Vec<String> = set.iter().map(|w| names[class_of[w]].clone()).collect();
        ws.dedup();
        (p.clone(), ws)
    });
    let model = Model::new(names.iter().cloned(), rel, val).expect("class ids are unique");
    Quotient { model, class_of }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn looped() -> Model {
        Model::from_strs(&["s"], &[("s", "s")], &[("p", &["s"])]).unwrap()
    }

    fn isolated() -> Model {
        Model::from_strs(&["t"], &[], &[("p", &["t"])]).unwrap()
    }

    fn two_cycle_pair() -> (Model, Model) {
        let m = Model::from_strs(
            &["s", "t"],
            &[("s", "t"), ("t", "s"), ("t", "t")],
            &[("p", &["s"])],
        )
        .unwrap();
        let n = Model::from_strs(&["s'", "t'"], &[("s'", "t'"), ("t'", "s'")], &[("p", &["s'"])])
            .unwrap();
        (m, n)
    }

    #[test]
    fn certificates() {
        let u = disjoint_union(&looped(), &isolated());
        let z = BisimRelation::from_names(u.clone(), [("L:s", "L:s"), ("L:s", "R:t")]).unwrap();
        assert_eq!(is_circ_bisimulation(&z), Ok(()));

        let (m, n) = two_cycle_pair();
        let u = disjoint_union(&m, &n);
        // The three pairs alone fail forth at (t, t): t R s, yet (s, s) is
        // missing. Adding it gives a certificate.
        let z = BisimRelation::from_names(
            u.clone(),
            [("L:s", "R:s'"), ("L:t", "R:t'"), ("L:t", "L:t")],
        )
        .unwrap();
        assert_eq!(
            is_circ_bisimulation(&z),
            Err(Violation::Forth {
                pair: ("L:t".into(), "L:t".into()),
                succ: "L:s".into()
            })
        );
        let mut z = z;
        z.insert(0, 0);
        assert_eq!(is_circ_bisimulation(&z), Ok(()));
        let z = BisimRelation::from_names(u.clone(), [("L:s", "L:s"), ("L:s", "R:s'"), ("L:t", "R:t'")])
            .unwrap();
        assert!(is_circ_bisimulation(&z).is_err());
        let largest = largest_circ_bisimulation(&u);
        assert!(largest.contains_names("L:t", "L:t") && largest.contains_names("L:s", "R:s'"));

        assert_eq!(is_circ_bisimulation(&BisimRelation::empty(u.clone())), Err(Violation::Empty));
        assert!(BisimRelation::from_names(u, [("L:x", "R:s'")]).is_err());
    }

    #[test]
    fn largest_examples() {
        let w = Model::from_strs(&["w"], &[("w", "w")], &[("p", &["w"])]).unwrap();
        let z = largest_circ_bisimulation(&w);
        assert_eq!(z.pairs().collect::<Vec<_>>(), vec![(0, 0)]);

        let a = PointedModel::new(looped(), "s").unwrap();
        let b = PointedModel::new(isolated(), "t").unwrap();
        assert!(circ_bisimilar(&a, &b));
        assert!(!box_bisimilar(&a, &b));
        assert!(box_bisimilar(&a, &a));

        let (m, n) = two_cycle_pair();
        assert!(circ_bisimilar(
            &PointedModel::new(m, "s").unwrap(),
            &PointedModel::new(n, "s'").unwrap()
        ));

        let q = Model::from_strs(&["u"], &[], &[]).unwrap();
        assert!(!circ_bisimilar(&b, &PointedModel::new(q, "u").unwrap()));
    }

    #[test]
    fn json_round_trip() {
        let u = disjoint_union(&looped(), &isolated());
        let z = largest_circ_bisimulation(&u);
        let text = serde_json::to_string(&z.to_json()).unwrap();
        assert_eq!(BisimRelation::from_json(u.clone(), &text).unwrap(), z);
        assert!(BisimRelation::from_json(u, r#"{"pairs": [["L:s"]]}"#).is_err());
    }

    #[test]
    fn contraction_examples() {
        let m = Model::from_strs(&["b", "a"], &[], &[("p", &["a", "b"])]).unwrap();
        let q = contract(&m);
        assert_eq!(q.model.worlds(), &["[a]".to_string()]);
        assert_eq!(q.class_name(0), "[a]");
        assert_eq!(q.model.truth_set("p").len(), 1);

        let (m, _) = two_cycle_pair();
        let q = contract(&m);
        assert_eq!(q.model.len(), 2);
        for w in 0..m.len() {
            assert!(circ_bisimilar(
                &PointedModel::at(q.model.clone(), q.class_of[w]),
                &PointedModel::at(m.clone(), w)
            ));
        }
    }
}
