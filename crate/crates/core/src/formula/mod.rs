//! Formulas of the combined language with the essence operator `o` and the
//! necessity operator `[]`, together with substitution and the two
//! translations between the essence fragment and plain modal logic.
//!
//! The accident operator `A` and the diamond `<>` are not separate tags:
//! `A φ` is `~o φ` and `<> φ` is `~[]~φ`. The renderer can put the sugar
//! back (see [`render_sugared`]).

mod parse;
mod render;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

pub use parse::{parse, ParseError};
pub use render::{render, render_sugared};

/// A formula tree. `Acc` and `Dia` are desugared on construction.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    Var(String),
    Top,
    Bot,
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
    /// `o φ`: if φ holds here it holds at every successor.
    Ess(Box<Formula>),
    /// `[] φ`: φ holds at every successor.
    Box(Box<Formula>),
}

/// Which modal operator a fragment is built on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Modality {
    Ess,
    Box,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FragmentError {
    #[error("formula contains `[]`, which is outside the essence fragment")]
    BoxInLea,
    #[error("formula contains `o`, which is outside the modal fragment")]
    EssInMl,
}

/// Simultaneous substitution of formulas for variables.
pub type Substitution = BTreeMap<String, Formula>;

impl Formula {
    pub fn var(name: impl Into<String>) -> Formula {
        Formula::Var(name.into())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn iff(a: Formula, b: Formula) -> Formula {
        Formula::Iff(Box::new(a), Box::new(b))
    }

    pub fn ess(f: Formula) -> Formula {
        Formula::Ess(Box::new(f))
    }

    pub fn boxed(f: Formula) -> Formula {
        Formula::Box(Box::new(f))
    }

    /// `A φ`, i.e. `~o φ`.
    pub fn acc(f: Formula) -> Formula {
        Formula::not(Formula::ess(f))
    }

    /// `<> φ`, i.e. `~[]~φ`.
    pub fn dia(f: Formula) -> Formula {
        Formula::not(Formula::boxed(Formula::not(f)))
    }

    /// `m φ` for the given modality.
    pub fn modal(m: Modality, f: Formula) -> Formula {
        match m {
            Modality::Ess => Formula::ess(f),
            Modality::Box => Formula::boxed(f),
        }
    }

    /// Left-nested conjunction; `T` when empty.
    pub fn conj(items: impl IntoIterator<Item = Formula>) -> Formula {
        items
            .into_iter()
            .reduce(Formula::and)
            .unwrap_or(Formula::Top)
    }

    /// Left-nested disjunction; `F` when empty.
    pub fn disj(items: impl IntoIterator<Item = Formula>) -> Formula {
        items
            .into_iter()
            .reduce(Formula::or)
            .unwrap_or(Formula::Bot)
    }

    pub fn contains_ess(&self) -> bool {
        self.any_node(&|f| matches!(f, Formula::Ess(_)))
    }

    pub fn contains_box(&self) -> bool {
        self.any_node(&|f| matches!(f, Formula::Box(_)))
    }

    /// No `[]` node occurs.
    pub fn is_lea(&self) -> bool {
        !self.contains_box()
    }

    /// No `o` node occurs.
    pub fn is_ml(&self) -> bool {
        !self.contains_ess()
    }

    fn any_node(&self, pred: &dyn Fn(&Formula) -> bool) -> bool {
        pred(self) || self.children().iter().any(|c| c.any_node(pred))
    }

    pub fn children(&self) -> Vec<&Formula> {
        match self {
            Formula::Var(_) | Formula::Top | Formula::Bot => vec![],
            Formula::Not(a) | Formula::Ess(a) | Formula::Box(a) => vec![a],
            Formula::And(a, b)
            | Formula::Or(a, b)
            | Formula::Implies(a, b)
            | Formula::Iff(a, b) => vec![a, b],
        }
    }

    /// Variables occurring in the formula, sorted.
    pub fn vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Formula::Var(v) => {
                out.insert(v.clone());
            }
            _ => self.children().into_iter().for_each(|c| c.collect_vars(out)),
        }
    }

    /// Nesting depth of modal operators.
    pub fn modal_depth(&self) -> usize {
        let below = self
            .children()
            .into_iter()
            .map(Formula::modal_depth)
            .max()
            .unwrap_or(0);
        match self {
            Formula::Ess(_) | Formula::Box(_) => below + 1,
            _ => below,
        }
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        1 + self.children().into_iter().map(Formula::size).sum::<usize>()
    }

    /// Rebuilds this node with `f` applied to each child.
    pub fn map_children(&self, mut f: impl FnMut(&Formula) -> Formula) -> Formula {
        let mut b = |x: &Formula| Box::new(f(x));
        match self {
            Formula::Var(_) | Formula::Top | Formula::Bot => self.clone(),
            Formula::Not(a) => Formula::Not(b(a)),
            Formula::Ess(a) => Formula::Ess(b(a)),
            Formula::Box(a) => Formula::Box(b(a)),
            Formula::And(x, y) => {
                let x = b(x);
                Formula::And(x, b(y))
            }
            Formula::Or(x, y) => {
                let x = b(x);
                Formula::Or(x, b(y))
            }
            Formula::Implies(x, y) => {
                let x = b(x);
                Formula::Implies(x, b(y))
            }
            Formula::Iff(x, y) => {
                let x = b(x);
                Formula::Iff(x, b(y))
            }
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render(self))
    }
}

impl fmt::Debug for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Formula({})", render(self))
    }
}

impl std::str::FromStr for Formula {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}

/// Replaces every variable in the domain of `subst` simultaneously.
pub fn substitute(f: &Formula, subst: &Substitution) -> Formula {
    match f {
        Formula::Var(v) => subst.get(v).cloned().unwrap_or_else(|| f.clone()),
        _ => f.map_children(|c| substitute(c, subst)),
    }
}

/// Translation into plain modal logic: `o φ` becomes `t(φ) -> [] t(φ)`.
pub fn to_ml(f: &Formula) -> Result<Formula, FragmentError> {
    if f.contains_box() {
        return Err(FragmentError::BoxInLea);
    }
    Ok(to_ml_unchecked(f))
}

fn to_ml_unchecked(f: &Formula) -> Formula {
    match f {
        Formula::Ess(a) => {
            let t = to_ml_unchecked(a);
            Formula::implies(t.clone(), Formula::boxed(t))
        }
        _ => f.map_children(to_ml_unchecked),
    }
}

/// Translation into the essence fragment: `[] φ` becomes `o t'(φ) & t'(φ)`.
/// Truth is preserved on reflexive models only.
pub fn to_lea(f: &Formula) -> Result<Formula, FragmentError> {
    if f.contains_ess() {
        return Err(FragmentError::EssInMl);
    }
    Ok(to_lea_unchecked(f))
}

fn to_lea_unchecked(f: &Formula) -> Formula {
    match f {
        Formula::Box(a) => {
            let t = to_lea_unchecked(a);
            Formula::and(Formula::ess(t.clone()), t)
        }
        _ => f.map_children(to_lea_unchecked),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> Formula {
        Formula::var("p")
    }

    fn f(s: &str) -> Formula {
        parse(s).unwrap()
    }

    #[test]
    fn substitution_is_simultaneous() {
        let mut s = Substitution::new();
        s.insert("p".into(), Formula::var("q"));
        s.insert("q".into(), Formula::var("p"));
        assert_eq!(substitute(&f("p & q"), &s), f("q & p"));
    }

    #[test]
    fn substitution_examples() {
        let mut s = Substitution::new();
        s.insert("p".into(), f("q & r"));
        assert_eq!(substitute(&f("~p -> o p"), &s), f("~(q & r) -> o (q & r)"));

        let e = f("p -> o(o ~p -> p)");
        assert_eq!(substitute(&e, &Substitution::new()), e);

        let mut s = Substitution::new();
        s.insert("p".into(), f("~~q"));
        assert_eq!(
            substitute(&e, &s),
            f("~~q -> o(o ~~~q -> ~~q)")
        );
    }

    #[test]
    fn to_ml_examples() {
        assert_eq!(to_ml(&f("o p")).unwrap(), f("p -> []p"));
        assert_eq!(to_ml(&p()).unwrap(), p());
        assert_eq!(
            to_ml(&f("o o p")).unwrap(),
            f("(p -> []p) -> [](p -> []p)")
        );
        assert_eq!(to_ml(&f("[]p")), Err(FragmentError::BoxInLea));
    }

    #[test]
    fn to_lea_examples() {
        assert_eq!(to_lea(&f("[]p")).unwrap(), f("o p & p"));
        assert_eq!(to_lea(&f("q")).unwrap(), f("q"));
        assert_eq!(
            to_lea(&f("[][]p")).unwrap(),
            f("o (o p & p) & (o p & p)")
        );
        assert_eq!(to_lea(&f("o p")), Err(FragmentError::EssInMl));
    }

    #[test]
    fn fragments_and_depth() {
        let e = f("o p & []q");
        assert!(!e.is_lea() && !e.is_ml());
        assert_eq!(f("o (p -> o q)").modal_depth(), 2);
        assert_eq!(f("A p"), Formula::acc(p()));
        assert_eq!(f("<> p"), Formula::dia(p()));
        assert_eq!(
            f("q & p1 -> p").vars().into_iter().collect::<Vec<_>>(),
            vec!["p", "p1", "q"]
        );
    }
}
