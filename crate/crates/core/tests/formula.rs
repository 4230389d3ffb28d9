mod common;

use std::collections::BTreeMap;

use lea_core::formula::{parse, render, substitute, to_lea, to_ml, Formula, Substitution};
use proptest::prelude::*;

use common::{eval, formula_strategy, model_strategy};

const VARS: &[&str] = &["p", "q", "r"];

fn f(s: &str) -> Formula {
    parse(s).unwrap()
}

#[test]
fn parse_examples() {
    assert_eq!(f("o T"), Formula::ess(Formula::Top));
    assert_eq!(
        f("~p -> o p"),
        Formula::implies(Formula::not(Formula::var("p")), Formula::ess(Formula::var("p")))
    );
    let err = parse("p &").unwrap_err();
    assert_eq!(err.offset, 3);
}

#[test]
fn render_examples() {
    assert_eq!(render(&Formula::ess(Formula::var("p"))), "o p");
    let p = Formula::var("p");
    let kwtr = Formula::implies(
        Formula::and(Formula::ess(p.clone()), p.clone()),
        Formula::ess(Formula::ess(p)),
    );
    assert_eq!(render(&kwtr), "(o p & p) -> o o p");
}

#[test]
fn substitution_examples() {
    let sigma: Substitution = BTreeMap::from([("p".into(), f("q & r"))]);
    assert_eq!(substitute(&f("~p -> o p"), &sigma), f("~(q & r) -> o (q & r)"));
    let sigma: Substitution = BTreeMap::from([("p".into(), f("~~q"))]);
    assert_eq!(
        substitute(&f("p -> o (o ~p -> p)"), &sigma),
        f("~~q -> o (o ~~~q -> ~~q)")
    );
}

#[test]
fn substitution_is_simultaneous() {
    let sigma: Substitution = BTreeMap::from([("p".into(), f("q")), ("q".into(), f("p"))]);
    assert_eq!(substitute(&f("p & o q"), &sigma), f("q & o p"));
}

#[test]
fn translation_examples() {
    assert_eq!(to_ml(&f("o p")).unwrap(), f("p -> [] p"));
    assert_eq!(to_ml(&f("p")).unwrap(), f("p"));
    assert_eq!(to_ml(&f("o o p")).unwrap(), f("(p -> [] p) -> [] (p -> [] p)"));
    assert_eq!(to_lea(&f("[] p")).unwrap(), f("o p & p"));
    assert_eq!(to_lea(&f("q")).unwrap(), f("q"));
    assert_eq!(to_lea(&f("[][] p")).unwrap(), f("o (o p & p) & (o p & p)"));
}

#[test]
fn translations_reject_the_other_fragment() {
    assert!(to_ml(&f("[] p")).is_err());
    assert!(to_lea(&f("o p")).is_err());
}

#[test]
fn sugar_desugars() {
    assert_eq!(f("A p"), Formula::not(Formula::ess(Formula::var("p"))));
    assert_eq!(f("<> p"), Formula::not(Formula::boxed(Formula::not(Formula::var("p")))));
}

#[test]
fn nonreflexive_translation_counterexample() {
    use lea_core::kripke::Model;
    let point = Model::from_strs(&["w"], &[], &[]).unwrap();
    let bottom = f("[]F");
    let t = to_lea(&bottom).unwrap();
    assert_eq!(t, f("o F & F"));
    assert!(eval(&point, 0, &bottom));
    assert!(!eval(&point, 0, &t));
}

fn mixed() -> BoxedStrategy<Formula> {
    formula_strategy(VARS, 6, true, true)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn render_round_trips(g in mixed()) {
        prop_assert_eq!(parse(&render(&g)).unwrap(), g);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn substitution_distributes(
        g in mixed(),
        a in formula_strategy(VARS, 2, true, true),
        b in formula_strategy(VARS, 2, true, true),
    ) {
        let sigma: Substitution = BTreeMap::from([("p".into(), a), ("q".into(), b)]);
        let whole = substitute(&g, &sigma);
        let piecewise = match &g {
            Formula::Var(v) => sigma.get(v).cloned().unwrap_or_else(|| g.clone()),
            _ => g.map_children(|c| substitute(c, &sigma)),
        };
        prop_assert_eq!(whole, piecewise);
    }

    // Truth of a substitution instance equals truth of the original under
    // the valuation that sends each variable to its image's extension.
    #[test]
    fn substitution_is_semantically_sound(
        g in formula_strategy(VARS, 3, true, true),
        a in formula_strategy(VARS, 2, true, true),
        m in model_strategy(4, VARS),
    ) {
        let sigma: Substitution = BTreeMap::from([("p".into(), a.clone())]);
        let inst = substitute(&g, &sigma);
        let mut val = m.valuation().clone();
        val.insert(
            "p".into(),
            (0..m.len()).filter(|&w| eval(&m, w, &a)).collect(),
        );
        let shifted = m.with_valuation(val);
        for w in 0..m.len() {
            prop_assert_eq!(eval(&m, w, &inst), eval(&shifted, w, &g));
        }
    }

    #[test]
    fn to_ml_preserves_truth(
        g in formula_strategy(VARS, 3, true, false),
        m in model_strategy(4, VARS),
    ) {
        let t = to_ml(&g).unwrap();
        prop_assert!(t.is_ml());
        for w in 0..m.len() {
            prop_assert_eq!(eval(&m, w, &g), eval(&m, w, &t));
        }
    }
}
