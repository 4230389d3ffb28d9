//! Finite Kripke frames and models, frame properties and classes, the
//! self-loop transformations, disjoint unions, and brute-force enumerators.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bitset::BitSet;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("a model needs at least one world")]
    NoWorlds,
    #[error("duplicate world id `{0}`")]
    DuplicateWorld(String),
    #[error("unknown world id `{0}`")]
    UnknownWorld(String),
    #[error("invalid model JSON: {0}")]
    Json(String),
}

/// Worlds and accessibility relation. Shared between models that differ only
/// in their valuation.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Frame {
    worlds: Vec<String>,
    index: HashMap<String, usize>,
    succ: Vec<BitSet>,
}

/// A finite Kripke model. A frame is a model with an empty valuation.
#[derive(Clone, PartialEq, Eq)]
pub struct Model {
    frame: Arc<Frame>,
    val: BTreeMap<String, BitSet>,
}

impl Model {
    /// Builds a model from world ids, edges, and valuation sets.
    pub fn new<W, E, V>(worlds: W, rel: E, val: V) -> Result<Model, ModelError>
    where
        W: IntoIterator,
        W::Item: Into<String>,
        E: IntoIterator<Item = (String, String)>,
        V: IntoIterator<Item = (String, Vec<String>)>,
    {
        let worlds: Vec<String> = worlds.into_iter().map(Into::into).collect();
        if worlds.is_empty() {
            return Err(ModelError::NoWorlds);
        }
        let mut index = HashMap::with_capacity(worlds.len());
        for (i, w) in worlds.iter().enumerate() {
            if index.insert(w.clone(), i).is_some() {
                return Err(ModelError::DuplicateWorld(w.clone()));
            }
        }
        let lookup = |w: &str| {
            index
                .get(w)
                .copied()
                .ok_or_else(|| ModelError::UnknownWorld(w.to_string()))
        };
        let mut succ = vec![BitSet::new(); worlds.len()];
        for (a, b) in rel {
            let (a, b) = (lookup(&a)?, lookup(&b)?);
            succ[a].insert(b);
        }
        let mut valuation = BTreeMap::new();
        for (var, ws) in val {
            let mut set = BitSet::new();
            for w in ws {
                set.insert(lookup(&w)?);
            }
            valuation.entry(var).or_insert_with(BitSet::new).union_with(&set);
        }
        Ok(Model {
            frame: Arc::new(Frame {
                worlds,
                index,
                succ,
            }),
            val: valuation,
        })
    }

    /// Convenience constructor over string slices.
    pub fn from_strs(
        worlds: &[&str],
        rel: &[(&str, &str)],
        val: &[(&str, &[&str])],
    ) -> Result<Model, ModelError> {
        Model::new(
            worlds.iter().copied(),
            rel.iter().map(|(a, b)| (a.to_string(), b.to_string())),
            val.iter().map(|(p, ws)| {
                (p.to_string(), ws.iter().map(|w| w.to_string()).collect())
            }),
        )
    }

    /// A model on worlds `w0..w{n-1}` given by successor sets.
    pub fn from_successors(succ: Vec<BitSet>, val: BTreeMap<String, BitSet>) -> Model {
        assert!(!succ.is_empty(), "a model needs at least one world");
        let worlds: Vec<String> = (0..succ.len()).map(|i| format!("w{i}")).collect();
        let index = worlds.iter().cloned().enumerate().map(|(i, w)| (w, i)).collect();
        Model {
            frame: Arc::new(Frame {
                worlds,
                index,
                succ,
            }),
            val,
        }
    }

    pub fn len(&self) -> usize {
        self.frame.worlds.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn worlds(&self) -> &[String] {
        &self.frame.worlds
    }

    pub fn world_name(&self, i: usize) -> &str {
        &self.frame.worlds[i]
    }

    pub fn world_index(&self, name: &str) -> Option<usize> {
        self.frame.index.get(name).copied()
    }

    pub fn successors(&self, i: usize) -> &BitSet {
        &self.frame.succ[i]
    }

    pub fn all_successors(&self) -> &[BitSet] {
        &self.frame.succ
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.frame.succ[a].contains(b)
    }

    /// Edges as index pairs in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.frame
            .succ
            .iter()
            .enumerate()
            .flat_map(|(a, s)| s.iter().map(move |b| (a, b)))
    }

    pub fn valuation(&self) -> &BTreeMap<String, BitSet> {
        &self.val
    }

    /// Worlds where `var` holds; absent variables are false everywhere.
    pub fn truth_set(&self, var: &str) -> BitSet {
        self.val.get(var).cloned().unwrap_or_default()
    }

    /// Same frame, different valuation.
    pub fn with_valuation(&self, val: BTreeMap<String, BitSet>) -> Model {
        Model {
            frame: Arc::clone(&self.frame),
            val,
        }
    }

    /// Same worlds and valuation, different accessibility relation.
    pub fn with_successors(&self, succ: Vec<BitSet>) -> Model {
        assert_eq!(succ.len(), self.len());
        Model {
            frame: Arc::new(Frame {
                worlds: self.frame.worlds.clone(),
                index: self.frame.index.clone(),
                succ,
            }),
            val: self.val.clone(),
        }
    }

    /// The underlying frame (valuation dropped).
    pub fn frame(&self) -> Model {
        self.with_valuation(BTreeMap::new())
    }

    pub fn full_set(&self) -> BitSet {
        BitSet::full(self.len())
    }

    pub fn to_json(&self, point: Option<usize>) -> ModelJson {
        ModelJson {
            worlds: self.frame.worlds.clone(),
            rel: self
                .edges()
                .map(|(a, b)| [self.world_name(a).to_string(), self.world_name(b).to_string()])
                .collect(),
            val: self
                .val
                .iter()
                .map(|(p, ws)| (p.clone(), ws.iter().map(|w| self.world_name(w).to_string()).collect()))
                .collect(),
            point: point.map(|p| self.world_name(p).to_string()),
        }
    }

    /// Serialises in the documented layout, e.g.
    /// `{"worlds": ["s","t"], "rel": [["s","t"]], "val": {"p": ["s"]}, "point": "s"}`.
    pub fn to_json_string(&self, point: Option<usize>) -> String {
        self.to_json(point).to_string()
    }
}

impl fmt::Debug for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Model({})", self.to_json_string(None))
    }
}

/// Wire form of a model, optionally pointed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelJson {
    pub worlds: Vec<String>,
    #[serde(default)]
    pub rel: Vec<[String; 2]>,
    #[serde(default)]
    pub val: BTreeMap<String, Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub point: Option<String>,
}

impl ModelJson {
    pub fn parse(text: &str) -> Result<ModelJson, ModelError> {
        serde_json::from_str(text).map_err(|e| ModelError::Json(e.to_string()))
    }

    pub fn into_model(self) -> Result<(Model, Option<usize>), ModelError> {
        let point = self.point.clone();
        let model = Model::new(
            self.worlds,
            self.rel.into_iter().map(|[a, b]| (a, b)),
            self.val,
        )?;
        let point = match point {
            Some(p) => Some(
                model
                    .world_index(&p)
                    .ok_or(ModelError::UnknownWorld(p))?,
            ),
            None => None,
        };
        Ok((model, point))
    }
}

fn json_str(s: &str) -> String {
    serde_json::to_string(s).expect("strings always serialise")
}

fn json_list(items: &[String]) -> String {
    let inner: Vec<String> = items.iter().map(|s| json_str(s)).collect();
    format!("[{}]", inner.join(","))
}

impl fmt::Display for ModelJson {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rel: Vec<String> = self
            .rel
            .iter()
            .map(|[a, b]| format!("[{},{}]", json_str(a), json_str(b)))
            .collect();
        let val: Vec<String> = self
            .val
            .iter()
            .map(|(p, ws)| format!("{}: {}", json_str(p), json_list(ws)))
            .collect();
        write!(
            f,
            "{{\"worlds\": {}, \"rel\": [{}], \"val\": {{{}}}",
            json_list(&self.worlds),
            rel.join(","),
            val.join(", ")
        )?;
        if let Some(p) = &self.point {
            write!(f, ", \"point\": {}", json_str(p))?;
        }
        f.write_str("}")
    }
}

/// Parses a model file; the optional `point` is resolved to an index.
pub fn model_from_json(text: &str) -> Result<(Model, Option<usize>), ModelError> {
    ModelJson::parse(text)?.into_model()
}

/// A model with a designated world.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PointedModel {
    pub model: Model,
    pub point: usize,
}

impl PointedModel {
    pub fn new(model: Model, point: &str) -> Result<PointedModel, ModelError> {
        let point = model
            .world_index(point)
            .ok_or_else(|| ModelError::UnknownWorld(point.to_string()))?;
        Ok(PointedModel { model, point })
    }

    pub fn at(model: Model, point: usize) -> PointedModel {
        assert!(point < model.len());
        PointedModel { model, point }
    }

    pub fn point_name(&self) -> &str {
        self.model.world_name(self.point)
    }
}

/// First-order frame conditions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FrameProperty {
    Reflexive,
    Serial,
    Transitive,
    Symmetric,
    Euclidean,
    /// `xRy -> x = y`
    Coreflexive,
    /// `xRy & yRz & x != z -> xRz`
    WeaklyTransitive,
    /// `xRy & xRz -> yRz | y = z | zRy`
    WeaklyConnected,
    /// `xRy & xRz & x != z & y != z -> yRz`
    WeakWeakEuclidean,
    /// `xRy & yRz -> xRz` for pairwise distinct x, y, z
    StrictTransitive3,
    /// `xRy & xRz -> yRz` for pairwise distinct x, y, z
    StrictEuclidean3,
}

impl FrameProperty {
    pub const ALL: [FrameProperty; 11] = [
        FrameProperty::Reflexive,
        FrameProperty::Serial,
        FrameProperty::Transitive,
        FrameProperty::Symmetric,
        FrameProperty::Euclidean,
        FrameProperty::Coreflexive,
        FrameProperty::WeaklyTransitive,
        FrameProperty::WeaklyConnected,
        FrameProperty::WeakWeakEuclidean,
        FrameProperty::StrictTransitive3,
        FrameProperty::StrictEuclidean3,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FrameProperty::Reflexive => "reflexive",
            FrameProperty::Serial => "serial",
            FrameProperty::Transitive => "transitive",
            FrameProperty::Symmetric => "symmetric",
            FrameProperty::Euclidean => "euclidean",
            FrameProperty::Coreflexive => "coreflexive",
            FrameProperty::WeaklyTransitive => "weakly-transitive",
            FrameProperty::WeaklyConnected => "weakly-connected",
            FrameProperty::WeakWeakEuclidean => "weak-weak-euclidean",
            FrameProperty::StrictTransitive3 => "strict-transitive3",
            FrameProperty::StrictEuclidean3 => "strict-euclidean3",
        }
    }
}

impl fmt::Display for FrameProperty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FrameProperty {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.to_ascii_lowercase().replace('_', "-");
        FrameProperty::ALL
            .into_iter()
            .find(|p| p.name() == norm || p.name().replace('-', "") == norm)
            .ok_or_else(|| format!("unknown frame property `{s}`"))
    }
}

/// Truth of `p`'s first-order definition on the frame of `m`.
pub fn has_property(m: &Model, p: FrameProperty) -> bool {
    let n = m.len();
    let r = |a: usize, b: usize| m.has_edge(a, b);
    let all3 = |cond: &dyn Fn(usize, usize, usize) -> bool| {
        (0..n).all(|x| (0..n).all(|y| (0..n).all(|z| cond(x, y, z))))
    };
    match p {
        FrameProperty::Reflexive => (0..n).all(|x| r(x, x)),
        FrameProperty::Serial => (0..n).all(|x| !m.successors(x).is_empty()),
        FrameProperty::Transitive => (0..n).all(|x| {
            m.successors(x)
                .iter()
                .all(|y| m.successors(y).is_subset(m.successors(x)))
        }),
        FrameProperty::Symmetric => m.edges().all(|(x, y)| r(y, x)),
        FrameProperty::Euclidean => {
            all3(&|x, y, z| !(r(x, y) && r(x, z)) || r(y, z))
        }
        FrameProperty::Coreflexive => m.edges().all(|(x, y)| x == y),
        FrameProperty::WeaklyTransitive => {
            all3(&|x, y, z| !(r(x, y) && r(y, z) && x != z) || r(x, z))
        }
        FrameProperty::WeaklyConnected => {
            all3(&|x, y, z| !(r(x, y) && r(x, z)) || r(y, z) || y == z || r(z, y))
        }
        FrameProperty::WeakWeakEuclidean => {
            all3(&|x, y, z| !(r(x, y) && r(x, z) && x != z && y != z) || r(y, z))
        }
        FrameProperty::StrictTransitive3 => all3(&|x, y, z| {
            !(r(x, y) && r(y, z) && x != y && y != z && x != z) || r(x, z)
        }),
        FrameProperty::StrictEuclidean3 => all3(&|x, y, z| {
            !(r(x, y) && r(x, z) && x != y && x != z && y != z) || r(y, z)
        }),
    }
}

/// Named frame classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FrameClass {
    K,
    D,
    T,
    KB,
    TB,
    K4,
    S4,
    B5,
    S5,
}

impl FrameClass {
    pub const ALL: [FrameClass; 9] = [
        FrameClass::K,
        FrameClass::D,
        FrameClass::T,
        FrameClass::KB,
        FrameClass::TB,
        FrameClass::K4,
        FrameClass::S4,
        FrameClass::B5,
        FrameClass::S5,
    ];

    pub fn properties(self) -> &'static [FrameProperty] {
        use FrameProperty::*;
        match self {
            FrameClass::K => &[],
            FrameClass::D => &[Serial],
            FrameClass::T => &[Reflexive],
            FrameClass::KB => &[Symmetric],
            FrameClass::TB => &[Reflexive, Symmetric],
            FrameClass::K4 => &[Transitive],
            FrameClass::S4 => &[Reflexive, Transitive],
            FrameClass::B5 => &[Symmetric, Euclidean],
            FrameClass::S5 => &[Reflexive, Symmetric, Transitive],
        }
    }

    pub fn contains(self, m: &Model) -> bool {
        self.properties().iter().all(|&p| has_property(m, p))
    }

    pub fn name(self) -> &'static str {
        match self {
            FrameClass::K => "K",
            FrameClass::D => "D",
            FrameClass::T => "T",
            FrameClass::KB => "KB",
            FrameClass::TB => "TB",
            FrameClass::K4 => "K4",
            FrameClass::S4 => "S4",
            FrameClass::B5 => "B5",
            FrameClass::S5 => "S5",
        }
    }
}

impl fmt::Display for FrameClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FrameClass {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        FrameClass::ALL
            .into_iter()
            .find(|c| c.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown frame class `{s}`"))
    }
}

/// Which worlds receive a self-loop in [`add_self_loops`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LoopMode {
    /// Every world (reflexive closure).
    All,
    /// Worlds without successors.
    Endpoints,
    /// Worlds on a two-cycle `w R t R w`.
    TwoCycles,
    /// Worlds with at least one predecessor.
    HasPredecessor,
}

impl LoopMode {
    pub const ALL: [LoopMode; 4] = [
        LoopMode::All,
        LoopMode::Endpoints,
        LoopMode::TwoCycles,
        LoopMode::HasPredecessor,
    ];
}

/// Adds `(w, w)` for every world selected by `mode`; nothing else changes.
pub fn add_self_loops(m: &Model, mode: LoopMode) -> Model {
    let n = m.len();
    let has_pred: BitSet = m.edges().map(|(_, b)| b).collect();
    let selected = |w: usize| match mode {
        LoopMode::All => true,
        LoopMode::Endpoints => m.successors(w).is_empty(),
        LoopMode::TwoCycles => m.successors(w).iter().any(|t| m.has_edge(t, w)),
        LoopMode::HasPredecessor => has_pred.contains(w),
    };
    let succ = (0..n)
        .map(|w| {
            let mut s = m.successors(w).clone();
            if selected(w) {
                s.insert(w);
            }
            s
        })
        .collect();
    m.with_successors(succ)
}

/// Disjoint union with worlds renamed `L:<id>` and `R:<id>`; left worlds
/// keep their indices, right worlds are shifted by `a.len()`.
pub fn disjoint_union(a: &Model, b: &Model) -> Model {
    let offset = a.len();
    let worlds: Vec<String> = a
        .worlds()
        .iter()
        .map(|w| format!("L:{w}"))
        .chain(b.worlds().iter().map(|w| format!("R:{w}")))
        .collect();
    let index = worlds.iter().cloned().enumerate().map(|(i, w)| (w, i)).collect();
    let succ = a
        .all_successors()
        .iter()
        .cloned()
        .chain(
            b.all_successors()
                .iter()
                .map(|s| s.iter().map(|t| t + offset).collect()),
        )
        .collect();
    let mut val = a.valuation().clone();
    for (p, set) in b.valuation() {
        let shifted: BitSet = set.iter().map(|w| w + offset).collect();
        val.entry(p.clone()).or_default().union_with(&shifted);
    }
    Model {
        frame: Arc::new(Frame {
            worlds,
            index,
            succ,
        }),
        val,
    }
}

/// Index of a right-hand world of `b` in `disjoint_union(a, b)`.
pub fn right_index(a: &Model, i: usize) -> usize {
    a.len() + i
}

const SOFT_ENUMERATION_LIMIT: usize = 4;

/// Every frame on worlds `w0..w{n-1}`, each exactly once, in order of the
/// edge bitmask (bit `i*n + j` encodes `wi R wj`).
pub fn enumerate_frames(n: usize) -> impl Iterator<Item = Model> {
    assert!((1..=7).contains(&n), "frame enumeration supports 1..=7 worlds");
    if n > SOFT_ENUMERATION_LIMIT {
        log::warn!("enumerating all 2^{} frames on {n} worlds", n * n);
    }
    (0u64..1u64 << (n * n)).map(move |mask| frame_from_mask(n, mask))
}

/// The frame with edge bitmask `mask` (see [`enumerate_frames`]).
pub fn frame_from_mask(n: usize, mask: u64) -> Model {
    let row = (1u64 << n) - 1;
    let succ = (0..n)
        .map(|i| BitSet::from_mask((mask >> (i * n)) & row))
        .collect();
    Model::from_successors(succ, BTreeMap::new())
}

/// Frames of `cls` with 1..=max_n worlds, in enumeration order.
pub fn enumerate_class_frames(cls: FrameClass, max_n: usize) -> impl Iterator<Item = Model> {
    (1..=max_n)
        .flat_map(enumerate_frames)
        .filter(move |f| cls.contains(f))
}

/// `m` under every assignment of world sets to `vars`; the first listed
/// variable varies slowest.
pub fn enumerate_valuations(m: &Model, vars: &[String]) -> impl Iterator<Item = Model> {
    let n = m.len();
    assert!(n * vars.len() < 64, "too many valuations to enumerate");
    let base = m.clone();
    let vars = vars.to_vec();
    let total = 1u64 << (n * vars.len());
    (0..total).map(move |code| {
        let val = valuation_from_code(&vars, n, code);
        base.with_valuation(val)
    })
}

/// The valuation with number `code` in [`enumerate_valuations`] order.
pub fn valuation_from_code(vars: &[String], n: usize, code: u64) -> BTreeMap<String, BitSet> {
    let row = (1u64 << n) - 1;
    let k = vars.len();
    vars.iter()
        .enumerate()
        .map(|(i, v)| {
            let shift = (k - 1 - i) * n;
            (v.clone(), BitSet::from_mask((code >> shift) & row))
        })
        .collect()
}
