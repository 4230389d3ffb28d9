//! Satisfiability and validity over frame classes: a labelled tableau on the
//! modal translation, with countermodel extraction and an exhaustive
//! small-model search used both as a fallback and as a cross-check.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::bitset::BitSet;
use crate::formula::{to_ml, Formula, FragmentError};
use crate::kripke::{enumerate_class_frames, enumerate_valuations, FrameClass, Model, ModelJson};
use crate::semantics::{extension, holds_at};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Sat,
    Valid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Tableau,
    BoundedSearch,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Query {
    pub formula: Formula,
    pub cls: FrameClass,
    pub mode: Mode,
}

/// The outcome of a query. `answer` is `None` when the procedure could not
/// decide: bounded search found nothing, or the tableau ran out of budget.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub query: Query,
    pub answer: Option<bool>,
    /// A satisfying model for a positive Sat answer, a countermodel for a
    /// negative Valid answer; the `usize` is the point.
    pub witness: Option<(Model, usize)>,
    pub method: Method,
    /// Largest frame size searched, for bounded search.
    pub bound: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerdictJson {
    pub answer: Option<bool>,
    pub method: Method,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<ModelJson>,
    pub formula: String,
    pub class: FrameClass,
    pub mode: Mode,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound: Option<usize>,
}

impl Verdict {
    pub fn to_json(&self) -> VerdictJson {
        VerdictJson {
            answer: self.answer,
            method: self.method,
            witness: self.witness.as_ref().map(|(m, w)| m.to_json(Some(*w))),
            formula: self.query.formula.to_string(),
            class: self.query.cls,
            mode: self.query.mode,
            bound: self.bound,
        }
    }

    /// Checks the witness against the answer: it must satisfy the formula
    /// for Sat, falsify it for Valid, lie in the class, and agree with the
    /// modal translation at its point.
    pub fn replay(&self) -> Result<(), String> {
        let Some((m, w)) = &self.witness else {
            return Ok(());
        };
        let f = &self.query.formula;
        let expect = self.query.mode == Mode::Sat;
        if holds_at(m, *w, f) != expect {
            return Err(format!("witness does not confirm the answer for {f}"));
        }
        if !self.query.cls.contains(m) {
            return Err(format!("witness frame is not in class {}", self.query.cls));
        }
        if let Ok(t) = to_ml(f) {
            if holds_at(m, *w, &t) != expect {
                return Err("translation disagrees on the witness".into());
            }
        }
        Ok(())
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let word = match (self.query.mode, self.answer) {
            (Mode::Sat, Some(true)) => "satisfiable",
            (Mode::Sat, Some(false)) => "unsatisfiable",
            (Mode::Valid, Some(true)) => "valid",
            (Mode::Valid, Some(false)) => "not valid",
            (_, None) => "unknown",
        };
        write!(f, "{word} over {}", self.query.cls)?;
        match (self.method, self.bound) {
            (Method::BoundedSearch, Some(n)) => write!(f, " (bounded search up to n={n})")?,
            _ => write!(f, " (tableau)")?,
        }
        if let Some((m, w)) = &self.witness {
            let label = if self.query.mode == Mode::Sat {
                "model"
            } else {
                "countermodel"
            };
            write!(f, "\n{label}: {}", m.to_json_string(Some(*w)))?;
        }
        Ok(())
    }
}

/// Frame sizes explored by bounded search when the class has no tableau.
pub const DEFAULT_SEARCH_BOUND: usize = 3;

/// Tableau rule applications allowed before giving up with `Unknown`.
const TABLEAU_BUDGET: usize = 200_000;

fn has_tableau(cls: FrameClass) -> bool {
    !matches!(cls, FrameClass::TB | FrameClass::B5)
}

/// Satisfiability of `f` over `cls`. Formulas with `[]` are accepted; the
/// essence operator is translated away first.
pub fn satisfiable(f: &Formula, cls: FrameClass) -> Verdict {
    decide(f, cls, Mode::Sat, DEFAULT_SEARCH_BOUND)
}

/// Validity of `f` over `cls`, as unsatisfiability of its negation.
pub fn valid(f: &Formula, cls: FrameClass) -> Verdict {
    decide(f, cls, Mode::Valid, DEFAULT_SEARCH_BOUND)
}

/// Like [`satisfiable`] / [`valid`] with an explicit bound for classes
/// decided by search.
pub fn decide(f: &Formula, cls: FrameClass, mode: Mode, bound: usize) -> Verdict {
    let verdict = decide_unchecked(f, cls, mode, bound);
    if let Err(e) = verdict.replay() {
        log::error!("witness failed replay, answer withheld: {e}");
        return Verdict {
            answer: None,
            witness: None,
            ..verdict
        };
    }
    verdict
}

fn decide_unchecked(f: &Formula, cls: FrameClass, mode: Mode, bound: usize) -> Verdict {
    let target = match mode {
        Mode::Sat => f.clone(),
        Mode::Valid => Formula::not(f.clone()),
    };
    let query = Query {
        formula: f.clone(),
        cls,
        mode,
    };
    let flip = |sat: Option<bool>| match mode {
        Mode::Sat => sat,
        Mode::Valid => sat.map(|s| !s),
    };
    if has_tableau(cls) {
        let outcome = tableau(&target, cls);
        Verdict {
            query,
            answer: flip(outcome.as_ref().map(|w| w.is_some())),
            witness: outcome.flatten(),
            method: Method::Tableau,
            bound: None,
        }
    } else {
        let found = search(&target, cls, bound);
        Verdict {
            query,
            answer: if found.is_some() { flip(Some(true)) } else { None },
            witness: found,
            method: Method::BoundedSearch,
            bound: Some(bound),
        }
    }
}

/// First model (frames of `cls` by size and mask, then valuations) with a
/// world satisfying `f`.
pub fn search(f: &Formula, cls: FrameClass, max_n: usize) -> Option<(Model, usize)> {
    let vars: Vec<String> = f.vars().into_iter().collect();
    enumerate_class_frames(cls, max_n).find_map(|frame| {
        enumerate_valuations(&frame, &vars)
            .find_map(|m| extension(&m, f).first().map(|w| (m, w)))
    })
}

// ---------------------------------------------------------------------------
// Tableau
// ---------------------------------------------------------------------------

/// Negation normal form over the modal language, with children interned.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Nnf {
    Top,
    Bot,
    Lit(String, bool),
    And(usize, usize),
    Or(usize, usize),
    Box(usize),
    Dia(usize),
}

#[derive(Default)]
struct Interner {
    nodes: Vec<Nnf>,
    ids: HashMap<Nnf, usize>,
}

impl Interner {
    fn intern(&mut self, n: Nnf) -> usize {
        if let Some(&id) = self.ids.get(&n) {
            return id;
        }
        self.nodes.push(n.clone());
        self.ids.insert(n, self.nodes.len() - 1);
        self.nodes.len() - 1
    }

    /// NNF of `f` (or of its negation when `pos` is false). `f` must be
    /// free of the essence operator.
    fn nnf(&mut self, f: &Formula, pos: bool) -> usize {
        let node = match (f, pos) {
            (Formula::Var(p), _) => Nnf::Lit(p.clone(), pos),
            (Formula::Top, true) | (Formula::Bot, false) => Nnf::Top,
            (Formula::Top, false) | (Formula::Bot, true) => Nnf::Bot,
            (Formula::Not(a), _) => return self.nnf(a, !pos),
            (Formula::And(a, b), true) | (Formula::Or(a, b), false) => {
                Nnf::And(self.nnf(a, pos), self.nnf(b, pos))
            }
            (Formula::And(a, b), false) | (Formula::Or(a, b), true) => {
                Nnf::Or(self.nnf(a, pos), self.nnf(b, pos))
            }
            (Formula::Implies(a, b), true) => Nnf::Or(self.nnf(a, false), self.nnf(b, true)),
            (Formula::Implies(a, b), false) => Nnf::And(self.nnf(a, true), self.nnf(b, false)),
            (Formula::Iff(a, b), true) => {
                let l = Nnf::Or(self.nnf(a, false), self.nnf(b, true));
                let r = Nnf::Or(self.nnf(b, false), self.nnf(a, true));
                Nnf::And(self.intern(l), self.intern(r))
            }
            (Formula::Iff(a, b), false) => {
                let l = Nnf::And(self.nnf(a, true), self.nnf(b, false));
                let r = Nnf::And(self.nnf(a, false), self.nnf(b, true));
                Nnf::Or(self.intern(l), self.intern(r))
            }
            (Formula::Box(a), true) => Nnf::Box(self.nnf(a, true)),
            (Formula::Box(a), false) => Nnf::Dia(self.nnf(a, false)),
            (Formula::Ess(_), _) => unreachable!("translated away before the tableau"),
        };
        self.intern(node)
    }
}

#[derive(Clone)]
struct Node {
    label: BitSet,
    parent: Option<usize>,
    children: Vec<usize>,
}

#[derive(Clone)]
struct Branch {
    nodes: Vec<Node>,
}

struct Rules {
    reflexive: bool,
    symmetric: bool,
    transitive: bool,
    universal: bool,
    serial: bool,
    blocking: bool,
}

impl Rules {
    fn of(cls: FrameClass) -> Rules {
        use FrameClass::*;
        Rules {
            reflexive: matches!(cls, T | S4 | S5),
            symmetric: matches!(cls, KB),
            transitive: matches!(cls, K4 | S4),
            universal: matches!(cls, S5),
            serial: matches!(cls, D),
            blocking: matches!(cls, K4 | S4),
        }
    }
}

enum Step {
    Closed,
    Open,
    Split(usize, usize, usize),
}

struct Tableau<'a> {
    nodes: &'a [Nnf],
    rules: Rules,
    budget: usize,
}

impl Tableau<'_> {
    /// Accessibility between tableau nodes under the class's closure.
    fn access(&self, b: &Branch) -> Vec<BitSet> {
        let n = b.nodes.len();
        if self.rules.universal {
            return vec![BitSet::full(n); n];
        }
        let mut r: Vec<BitSet> = b
            .nodes
            .iter()
            .map(|x| x.children.iter().copied().collect())
            .collect();
        if self.rules.symmetric {
            for (x, node) in b.nodes.iter().enumerate() {
                if let Some(p) = node.parent {
                    r[x].insert(p);
                }
            }
        }
        if self.rules.transitive {
            // Nodes are created after their parents, so descendants have
            // larger indices.
            for x in (0..n).rev() {
                for &c in &b.nodes[x].children {
                    let below = r[c].clone();
                    r[x].union_with(&below);
                }
            }
        }
        if self.rules.reflexive {
            for (x, row) in r.iter_mut().enumerate() {
                row.insert(x);
            }
        }
        r
    }

    fn blocked(&self, b: &Branch) -> Vec<Option<usize>> {
        let mut blocker = vec![None; b.nodes.len()];
        if !self.rules.blocking {
            return blocker;
        }
        for x in 0..b.nodes.len() {
            let mut z = b.nodes[x].parent;
            while let Some(a) = z {
                if blocker[a].is_none() && b.nodes[x].label.is_subset(&b.nodes[a].label) {
                    blocker[x] = Some(a);
                    break;
                }
                z = b.nodes[a].parent;
            }
        }
        blocker
    }

    fn clash(&self, label: &BitSet) -> bool {
        label.iter().any(|id| match &self.nodes[id] {
            Nnf::Bot => true,
            Nnf::Lit(p, true) => label
                .iter()
                .any(|j| matches!(&self.nodes[j], Nnf::Lit(q, false) if q == p)),
            _ => false,
        })
    }

    /// Applies ∧ and □ rules until nothing changes.
    fn propagate(&self, b: &mut Branch) -> bool {
        let mut changed_any = false;
        loop {
            let mut changed = false;
            let access = self.access(b);
            #[allow(clippy::needless_range_loop)] // b.nodes is mutated in the body
            for x in 0..b.nodes.len() {
                let label: Vec<usize> = b.nodes[x].label.iter().collect();
                for id in label {
                    match self.nodes[id] {
                        Nnf::And(l, r) => {
                            changed |= b.nodes[x].label.insert(l);
                            changed |= b.nodes[x].label.insert(r);
                        }
                        Nnf::Box(body) => {
                            for y in access[x].iter() {
                                changed |= b.nodes[y].label.insert(body);
                                if self.rules.transitive || self.rules.universal {
                                    changed |= b.nodes[y].label.insert(id);
                                }
                            }
                        }
                        _ => {}
                    }
                }
            }
            if !changed {
                return changed_any;
            }
            changed_any = true;
        }
    }

    fn step(&mut self, b: &mut Branch) -> Option<Step> {
        loop {
            if self.budget == 0 {
                return None;
            }
            self.budget -= 1;
            if b.nodes.iter().any(|x| self.clash(&x.label)) {
                return Some(Step::Closed);
            }
            if self.propagate(b) {
                continue;
            }
            for (x, node) in b.nodes.iter().enumerate() {
                for id in node.label.iter() {
                    if let Nnf::Or(l, r) = self.nodes[id] {
                        if !node.label.contains(l) && !node.label.contains(r) {
                            return Some(Step::Split(x, l, r));
                        }
                    }
                }
            }
            let access = self.access(b);
            let blocked = self.blocked(b);
            let unfulfilled = (0..b.nodes.len())
                .filter(|&x| blocked[x].is_none())
                .find_map(|x| {
                    b.nodes[x].label.iter().find_map(|id| match self.nodes[id] {
                        Nnf::Dia(body)
                            if !access[x].iter().any(|y| b.nodes[y].label.contains(body)) =>
                        {
                            Some((x, body))
                        }
                        _ => None,
                    })
                });
            if let Some((x, body)) = unfulfilled {
                add_child(b, x, [body]);
                continue;
            }
            if self.rules.serial {
                let needy = (0..b.nodes.len()).find(|&x| {
                    b.nodes[x].children.is_empty()
                        && b.nodes[x]
                            .label
                            .iter()
                            .any(|id| matches!(self.nodes[id], Nnf::Box(_)))
                });
                if let Some(x) = needy {
                    add_child(b, x, []);
                    continue;
                }
            }
            return Some(Step::Open);
        }
    }

    /// Depth-first search over ∨ choices, left disjunct first.
    fn run(&mut self, mut b: Branch) -> Option<Option<Branch>> {
        loop {
            match self.step(&mut b)? {
                Step::Closed => return Some(None),
                Step::Open => return Some(Some(b)),
                Step::Split(x, l, r) => {
                    let mut left = b.clone();
                    left.nodes[x].label.insert(l);
                    if let Some(open) = self.run(left)? {
                        return Some(Some(open));
                    }
                    b.nodes[x].label.insert(r);
                }
            }
        }
    }

    fn extract(&self, b: &Branch) -> Model {
        let n = b.nodes.len();
        let mut succ: Vec<BitSet> = b
            .nodes
            .iter()
            .map(|x| x.children.iter().copied().collect())
            .collect();
        for (x, z) in self.blocked(b).into_iter().enumerate() {
            if let Some(z) = z {
                if self.rules.reflexive {
                    succ[x].insert(z);
                } else {
                    let kids: BitSet = b.nodes[z].children.iter().copied().collect();
                    succ[x].union_with(&kids);
                }
            }
        }
        if self.rules.universal {
            succ = vec![BitSet::full(n); n];
        }
        if self.rules.symmetric {
            for x in 0..n {
                for y in succ[x].clone().iter() {
                    succ[y].insert(x);
                }
            }
        }
        if self.rules.transitive {
            loop {
                let mut changed = false;
                for x in 0..n {
                    let mut reach = succ[x].clone();
                    for y in succ[x].iter() {
                        reach.union_with(&succ[y]);
                    }
                    if reach != succ[x] {
                        succ[x] = reach;
                        changed = true;
                    }
                }
                if !changed {
                    break;
                }
            }
        }
        for (x, row) in succ.iter_mut().enumerate() {
            if self.rules.reflexive || (self.rules.serial && row.is_empty()) {
                row.insert(x);
            }
        }
        let mut val: std::collections::BTreeMap<String, BitSet> = Default::default();
        for (x, node) in b.nodes.iter().enumerate() {
            for id in node.label.iter() {
                if let Nnf::Lit(p, true) = &self.nodes[id] {
                    val.entry(p.clone()).or_default().insert(x);
                }
            }
        }
        Model::from_successors(succ, val)
    }
}

fn add_child<const N: usize>(b: &mut Branch, parent: usize, seed: [usize; N]) {
    let id = b.nodes.len();
    b.nodes.push(Node {
        label: seed.into_iter().collect(),
        parent: Some(parent),
        children: Vec::new(),
    });
    b.nodes[parent].children.push(id);
}

/// Runs the tableau on the modal translation of `f`. `None` means the budget
/// ran out; `Some(None)` means every branch closed.
fn tableau(f: &Formula, cls: FrameClass) -> Option<Option<(Model, usize)>> {
    let ml = translate(f);
    let mut interner = Interner::default();
    let root = interner.nnf(&ml, true);
    let mut t = Tableau {
        nodes: &interner.nodes,
        rules: Rules::of(cls),
        budget: TABLEAU_BUDGET,
    };
    let start = Branch {
        nodes: vec![Node {
            label: [root].into_iter().collect(),
            parent: None,
            children: Vec::new(),
        }],
    };
    let open = t.run(start)?;
    Some(open.map(|b| (t.extract(&b), 0)))
}

// `to_ml` rejects mixed formulas; here the boxes are already modal, so the
// essence nodes are rewritten wherever they occur.
fn translate(f: &Formula) -> Formula {
    match to_ml(f) {
        Ok(t) => t,
        Err(FragmentError::BoxInLea) => match f {
            Formula::Ess(a) => {
                let t = translate(a);
                Formula::implies(t.clone(), Formula::boxed(t))
            }
            _ => f.map_children(translate),
        },
        Err(FragmentError::EssInMl) => unreachable!("to_ml only rejects boxes"),
    }
}

/// Result of comparing the tableau with exhaustive search on one formula.
#[derive(Debug, Clone)]
pub struct CrossReport {
    pub verdict: Verdict,
    pub search_bound: usize,
    pub search_witness: Option<(Model, usize)>,
    pub hard_failures: Vec<String>,
    pub notes: Vec<String>,
}

impl CrossReport {
    pub fn is_coherent(&self) -> bool {
        self.hard_failures.is_empty()
    }
}

/// Checks `satisfiable(f, cls)` against exhaustive search over the frames of
/// `cls` with at most `max_n` worlds.
pub fn crosscheck(f: &Formula, cls: FrameClass, max_n: usize) -> CrossReport {
    assert!(max_n <= 4, "crosscheck searches at most 4 worlds");
    // Unchecked, so that a bad witness shows up here instead of being
    // silently withheld.
    let verdict = decide_unchecked(f, cls, Mode::Sat, DEFAULT_SEARCH_BOUND);
    let found = search(f, cls, max_n);
    let mut hard_failures = Vec::new();
    let mut notes = Vec::new();
    if let Err(e) = verdict.replay() {
        hard_failures.push(e);
    }
    if verdict.answer == Some(true) && verdict.witness.is_none() {
        hard_failures.push("satisfiable without a witness".into());
    }
    match (&found, verdict.answer) {
        (Some((m, w)), Some(true)) => {
            if !holds_at(m, *w, f) {
                hard_failures.push("search witness does not satisfy the formula".into());
            }
        }
        (Some((m, w)), answer) => hard_failures.push(format!(
            "search found {} but the verdict is {:?}",
            m.to_json_string(Some(*w)),
            answer
        )),
        (None, Some(true)) => notes.push(format!(
            "satisfiable, but no model with at most {max_n} worlds"
        )),
        (None, Some(false)) => {}
        (None, None) => notes.push("undecided by both".into()),
    }
    CrossReport {
        verdict,
        search_bound: max_n,
        search_witness: found,
        hard_failures,
        notes,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;
    use crate::semantics::satisfies;

    fn f(s: &str) -> Formula {
        parse(s).unwrap()
    }

    #[test]
    fn accident_is_satisfiable_over_k() {
        let v = satisfiable(&f("A p"), FrameClass::K);
        assert_eq!(v.answer, Some(true));
        assert_eq!(v.method, Method::Tableau);
        let (m, w) = v.witness.unwrap();
        assert!(holds_at(&m, w, &f("p")));
        assert!(m.successors(w).iter().any(|t| !holds_at(&m, t, &f("p"))));
    }

    #[test]
    fn axioms_are_valid() {
        assert_eq!(satisfiable(&f("~(o T)"), FrameClass::K).answer, Some(false));
        assert_eq!(
            satisfiable(&f("~((o p & p) -> o o p)"), FrameClass::K4).answer,
            Some(false)
        );
        for cls in FrameClass::ALL {
            assert_ne!(valid(&f("o T"), cls).answer, Some(false), "{cls}");
        }
        assert_eq!(valid(&f("p -> o(o ~p -> p)"), FrameClass::KB).answer, Some(true));
    }

    #[test]
    fn kwb_countermodel_over_k() {
        let v = valid(&f("p -> o(o ~p -> p)"), FrameClass::K);
        assert_eq!(v.answer, Some(false));
        let (m, w) = v.witness.clone().unwrap();
        assert!(!satisfies(&m, m.world_name(w), &f("p -> o(o ~p -> p)")).unwrap());
        assert_eq!(m.len(), 2);
        assert_eq!(m.edges().collect::<Vec<_>>(), vec![(0, 1)]);
        assert_eq!(m.truth_set("p").iter().collect::<Vec<_>>(), vec![0]);
        assert_eq!(v.replay(), Ok(()));
    }

    #[test]
    fn reflexive_point_refutes_box_bottom() {
        assert_eq!(satisfiable(&f("[]F"), FrameClass::T).answer, Some(false));
        assert_eq!(satisfiable(&f("[]F"), FrameClass::D).answer, Some(false));
        assert_eq!(satisfiable(&f("[]F"), FrameClass::K).answer, Some(true));
        assert!(search(&f("[]F"), FrameClass::T, 3).is_none());
    }

    #[test]
    fn search_classes_report_bounds() {
        let v = satisfiable(&f("A p"), FrameClass::B5);
        assert_eq!(v.method, Method::BoundedSearch);
        assert_eq!(v.bound, Some(DEFAULT_SEARCH_BOUND));
        assert_eq!(v.answer, Some(true));
        let v = satisfiable(&f("~(o T)"), FrameClass::TB);
        assert_eq!(v.answer, None);
        let v = valid(&f("o T"), FrameClass::TB);
        assert_eq!(v.answer, None);
    }

    #[test]
    fn transitive_classes_terminate_with_blocking() {
        // Forces an infinite ascending chain in naive expansion.
        let g = f("[]<>p & <>p");
        for cls in [FrameClass::K4, FrameClass::S4, FrameClass::S5] {
            let v = satisfiable(&g, cls);
            assert_eq!(v.answer, Some(true), "{cls}");
            assert_eq!(v.replay(), Ok(()));
        }
    }

    #[test]
    fn crosscheck_examples() {
        let r = crosscheck(&f("~(p -> o(o ~p -> p))"), FrameClass::KB, 3);
        assert!(r.is_coherent());
        assert_eq!(r.verdict.answer, Some(false));
        assert!(r.search_witness.is_none());
        let r = crosscheck(&f("A p & A ~p"), FrameClass::S5, 3);
        assert!(r.is_coherent(), "{:?}", r.hard_failures);
    }

    #[test]
    fn json_shape() {
        let v = satisfiable(&f("A p"), FrameClass::K);
        let j = serde_json::to_value(v.to_json()).unwrap();
        assert_eq!(j["answer"], true);
        assert_eq!(j["method"], "tableau");
        assert!(j["witness"]["worlds"].is_array());
    }
}
