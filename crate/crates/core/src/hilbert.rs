//! Hilbert systems for the essence logic: derivation checking, axiom-instance
//! matching, a generator for the conjunction lemma, and soundness scans.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::formula::{parse, substitute, Formula, Substitution};
use crate::kripke::{enumerate_class_frames, FrameClass, Model};
use crate::semantics::frame_countermodel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum System {
    K,
    K4,
    KB,
    KB5,
}

/// Axiom schema names in declaration order across all systems.
pub const AXIOM_NAMES: [&str; 6] = ["KwTop", "EquiKw", "KwCon", "KwTr", "KwB", "KwEuc"];

fn schema_text(name: &str) -> Option<&'static str> {
    Some(match name {
        "KwTop" => "o T",
        "EquiKw" => "~p -> o p",
        "KwCon" => "o p & o q -> o (p & q)",
        "KwTr" => "o p & p -> o o p",
        "KwB" => "p -> o (o ~p -> p)",
        "KwEuc" => "~o ~p -> o (o ~p -> p)",
        _ => return None,
    })
}

/// The schema formula for an axiom name, if it exists in any system.
pub fn schema(name: &str) -> Option<Formula> {
    schema_text(name).map(|t| parse(t).expect("built-in schemas parse"))
}

impl System {
    pub const ALL: [System; 4] = [System::K, System::K4, System::KB, System::KB5];

    pub fn axiom_names(self) -> &'static [&'static str] {
        match self {
            System::K => &AXIOM_NAMES[..3],
            System::K4 => &AXIOM_NAMES[..4],
            System::KB => &["KwTop", "EquiKw", "KwCon", "KwB"],
            System::KB5 => &["KwTop", "EquiKw", "KwCon", "KwB", "KwEuc"],
        }
    }

    /// Named schemas in declaration order.
    pub fn axioms(self) -> Vec<(&'static str, Formula)> {
        self.axiom_names()
            .iter()
            .map(|&n| (n, schema(n).expect("known axiom")))
            .collect()
    }

    pub fn name(self) -> &'static str {
        match self {
            System::K => "K",
            System::K4 => "K4",
            System::KB => "KB",
            System::KB5 => "KB5",
        }
    }
}

impl fmt::Display for System {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown system `{0}` (expected K, K4, KB or KB5)")]
pub struct UnknownSystem(pub String);

impl FromStr for System {
    type Err = UnknownSystem;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.trim().to_ascii_uppercase();
        let key = key.trim_end_matches('O').trim_end_matches('∘');
        System::ALL
            .into_iter()
            .find(|sys| sys.name() == key)
            .ok_or_else(|| UnknownSystem(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Justification {
    Taut,
    /// An instance of a named schema. An empty substitution means "infer it".
    Axiom(String, Substitution),
    /// Modus ponens: the line `j` is `(line i) -> (this line)`.
    MP(usize, usize),
    Sub(usize, Substitution),
    /// From `φ -> ψ` infer `o φ & φ -> o ψ`.
    R(usize),
    Premise,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Line {
    pub formula: Formula,
    pub just: Justification,
}

/// Lines are numbered from 1.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Derivation {
    pub lines: Vec<Line>,
}

impl Derivation {
    pub fn push(&mut self, formula: Formula, just: Justification) -> usize {
        self.lines.push(Line { formula, just });
        self.lines.len()
    }

    pub fn conclusion(&self) -> Option<&Formula> {
        self.lines.last().map(|l| &l.formula)
    }

    pub fn len(&self) -> usize {
        self.lines.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lines.is_empty()
    }

    pub fn premises(&self) -> Vec<&Formula> {
        self.lines
            .iter()
            .filter(|l| l.just == Justification::Premise)
            .map(|l| &l.formula)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LineError {
    pub line: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckReport {
    pub ok: bool,
    pub first_error: Option<LineError>,
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.first_error {
            None => write!(f, "derivation accepted"),
            Some(e) => write!(f, "line {}: {}", e.line, e.reason),
        }
    }
}

/// Validates every line in order and stops at the first failure.
pub fn check_derivation(sys: System, d: &Derivation) -> CheckReport {
    for (k, line) in d.lines.iter().enumerate() {
        if let Err(reason) = check_line(sys, d, k + 1, line) {
            return CheckReport {
                ok: false,
                first_error: Some(LineError { line: k + 1, reason }),
            };
        }
    }
    CheckReport {
        ok: true,
        first_error: None,
    }
}

fn check_line(sys: System, d: &Derivation, index: usize, line: &Line) -> Result<(), String> {
    let cite = |i: usize| -> Result<&Formula, String> {
        if i == 0 || i >= index {
            Err(format!("line {i} is not an earlier line"))
        } else {
            Ok(&d.lines[i - 1].formula)
        }
    };
    let f = &line.formula;
    match &line.just {
        Justification::Premise => Ok(()),
        Justification::Taut => {
            if is_tautology(f) {
                Ok(())
            } else {
                Err("not a propositional tautology".into())
            }
        }
        Justification::Axiom(name, sigma) => {
            if !sys.axiom_names().contains(&name.as_str()) {
                return Err(format!("{name} is not an axiom of system {sys}"));
            }
            let schema = schema(name).expect("known axiom");
            let ok = if sigma.is_empty() {
                match_formula(&schema, f).is_some()
            } else {
                substitute(&schema, sigma) == *f
            };
            if ok {
                Ok(())
            } else {
                Err(format!("not an instance of {name}"))
            }
        }
        Justification::MP(i, j) => {
            let (a, b) = (cite(*i)?, cite(*j)?);
            match b {
                Formula::Implies(x, y) if **x == *a && **y == *f => Ok(()),
                Formula::Implies(..) => Err(format!("line {j} is not (line {i}) -> (this line)")),
                _ => Err(format!("line {j} is not an implication")),
            }
        }
        Justification::Sub(i, sigma) => {
            if substitute(cite(*i)?, sigma) == *f {
                Ok(())
            } else {
                Err(format!("not the substitution instance of line {i}"))
            }
        }
        Justification::R(i) => match cite(*i)? {
            Formula::Implies(phi, psi) => {
                let expected = Formula::implies(
                    Formula::and(Formula::ess((**phi).clone()), (**phi).clone()),
                    Formula::ess((**psi).clone()),
                );
                if expected == *f {
                    Ok(())
                } else {
                    Err(format!("expected {expected}"))
                }
            }
            _ => Err(format!("line {i} is not an implication")),
        },
    }
}

const MAX_TAUT_ATOMS: usize = 20;

/// Propositional tautology check with every maximal modal subformula
/// (and every variable) treated as an atom.
pub fn is_tautology(f: &Formula) -> bool {
    let mut atoms = Vec::new();
    collect_atoms(f, &mut atoms);
    if atoms.len() > MAX_TAUT_ATOMS {
        log::warn!("tautology check over {} atoms refused", atoms.len());
        return false;
    }
    (0u64..1 << atoms.len()).all(|row| eval_bool(f, &atoms, row))
}

fn collect_atoms<'a>(f: &'a Formula, atoms: &mut Vec<&'a Formula>) {
    match f {
        Formula::Var(_) | Formula::Ess(_) | Formula::Box(_) => {
            if !atoms.contains(&f) {
                atoms.push(f);
            }
        }
        _ => f.children().into_iter().for_each(|c| collect_atoms(c, atoms)),
    }
}

fn eval_bool(f: &Formula, atoms: &[&Formula], row: u64) -> bool {
    let ev = |g: &Formula| eval_bool(g, atoms, row);
    match f {
        Formula::Top => true,
        Formula::Bot => false,
        Formula::Not(a) => !ev(a),
        Formula::And(a, b) => ev(a) && ev(b),
        Formula::Or(a, b) => ev(a) || ev(b),
        Formula::Implies(a, b) => !ev(a) || ev(b),
        Formula::Iff(a, b) => ev(a) == ev(b),
        _ => {
            let i = atoms.iter().position(|a| *a == f).expect("atom collected");
            row & (1 << i) != 0
        }
    }
}

/// First-order matching: variables of `pattern` match any formula,
/// consistently. Identity bindings are omitted from the result.
pub fn match_formula(pattern: &Formula, f: &Formula) -> Option<Substitution> {
    let mut sigma = Substitution::new();
    if !match_into(pattern, f, &mut sigma) {
        return None;
    }
    sigma.retain(|k, v| *v != Formula::Var(k.clone()));
    Some(sigma)
}

fn match_into(pattern: &Formula, f: &Formula, sigma: &mut Substitution) -> bool {
    use Formula::*;
    match (pattern, f) {
        (Var(x), _) => match sigma.get(x) {
            Some(bound) => bound == f,
            None => {
                sigma.insert(x.clone(), f.clone());
                true
            }
        },
        (Top, Top) | (Bot, Bot) => true,
        (Not(a), Not(b)) | (Ess(a), Ess(b)) | (Box(a), Box(b)) => match_into(a, b, sigma),
        (And(a1, a2), And(b1, b2))
        | (Or(a1, a2), Or(b1, b2))
        | (Implies(a1, a2), Implies(b1, b2))
        | (Iff(a1, a2), Iff(b1, b2)) => match_into(a1, b1, sigma) && match_into(a2, b2, sigma),
        _ => false,
    }
}

/// The first schema of `sys` (in declaration order) that `f` instantiates.
pub fn is_axiom_instance(sys: System, f: &Formula) -> Option<(&'static str, Substitution)> {
    sys.axioms()
        .into_iter()
        .find_map(|(name, schema)| match_formula(&schema, f).map(|s| (name, s)))
}

fn conj_vars(n: usize) -> Vec<String> {
    const SHORT: [&str; 6] = ["p", "q", "r", "s", "t", "u"];
    if n <= SHORT.len() {
        SHORT[..n].iter().map(|s| s.to_string()).collect()
    } else {
        (1..=n).map(|i| format!("p{i}")).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("the conjunction lemma needs n >= 2, got {0}")]
pub struct TooFewConjuncts(pub usize);

/// A derivation in K of `o p1 & ... & o pn -> o (p1 & ... & pn)`.
///
/// Starts from KwCon and extends one conjunct at a time: substitute into
/// KwCon, then chain with the previous step through a tautology and two
/// applications of modus ponens.
pub fn gen_conj_derivation(n: usize) -> Result<Derivation, TooFewConjuncts> {
    if n < 2 {
        return Err(TooFewConjuncts(n));
    }
    let vars: Vec<Formula> = conj_vars(n).into_iter().map(Formula::Var).collect();
    let mut d = Derivation::default();
    let kwcon = schema("KwCon").expect("known axiom");
    let axiom = d.push(kwcon.clone(), Justification::Axiom("KwCon".into(), Substitution::new()));
    let mut prev = axiom;
    if vars[0] != Formula::var("p") || vars[1] != Formula::var("q") {
        let sigma: Substitution = [("p".to_string(), vars[0].clone()), ("q".to_string(), vars[1].clone())]
            .into_iter()
            .collect();
        prev = d.push(substitute(&kwcon, &sigma), Justification::Sub(axiom, sigma));
    }
    for k in 2..n {
        let (a, b) = match &d.lines[prev - 1].formula {
            Formula::Implies(a, b) => ((**a).clone(), (**b).clone()),
            _ => unreachable!("each step concludes an implication"),
        };
        let big = Formula::conj(vars[..k].iter().cloned());
        let sigma: Substitution = [("p".to_string(), big.clone()), ("q".to_string(), vars[k].clone())]
            .into_iter()
            .collect();
        let inst = substitute(&kwcon, &sigma);
        let (c, target) = match &inst {
            Formula::Implies(lhs, rhs) => match &**lhs {
                Formula::And(_, c) => ((**c).clone(), (**rhs).clone()),
                _ => unreachable!(),
            },
            _ => unreachable!(),
        };
        let sub = d.push(inst.clone(), Justification::Sub(axiom, sigma));
        let chained = Formula::implies(Formula::and(a.clone(), c.clone()), target);
        let bridge = Formula::implies(inst.clone(), chained.clone());
        let taut = d.push(
            Formula::implies(Formula::implies(a, b), bridge.clone()),
            Justification::Taut,
        );
        let mp1 = d.push(bridge, Justification::MP(prev, taut));
        prev = d.push(chained, Justification::MP(sub, mp1));
    }
    Ok(d)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DerivationParseError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
}

fn syntax(line: usize, message: impl Into<String>) -> DerivationParseError {
    DerivationParseError::Syntax {
        line,
        message: message.into(),
    }
}

fn parse_subst(text: &str, line: usize) -> Result<Substitution, DerivationParseError> {
    let mut sigma = Substitution::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (var, rhs) = part
            .split_once(":=")
            .ok_or_else(|| syntax(line, format!("expected `var:=formula`, found `{part}`")))?;
        let var = var.trim();
        match parse(var) {
            Ok(Formula::Var(v)) if v == var => {}
            _ => return Err(syntax(line, format!("`{var}` is not a variable"))),
        }
        let f = parse(rhs).map_err(|e| syntax(line, e.to_string()))?;
        if sigma.insert(var.to_string(), f).is_some() {
            return Err(syntax(line, format!("`{var}` substituted twice")));
        }
    }
    Ok(sigma)
}

fn render_subst(sigma: &Substitution) -> String {
    sigma
        .iter()
        .map(|(v, f)| format!("{v}:={f}"))
        .collect::<Vec<_>>()
        .join(", ")
}

fn parse_index(word: Option<&str>, line: usize) -> Result<usize, DerivationParseError> {
    word.and_then(|w| w.parse().ok())
        .ok_or_else(|| syntax(line, "expected a line number"))
}

fn parse_justification(text: &str, line: usize) -> Result<Justification, DerivationParseError> {
    let text = text.trim();
    let (head, rest) = text.split_once(char::is_whitespace).unwrap_or((text, ""));
    let rest = rest.trim();
    let mut words = rest.split_whitespace();
    let just = match head.to_ascii_lowercase().as_str() {
        "taut" => Justification::Taut,
        "premise" => Justification::Premise,
        "axiom" => {
            let (name, subst) = rest.split_once(char::is_whitespace).unwrap_or((rest, ""));
            if name.is_empty() {
                return Err(syntax(line, "expected an axiom name"));
            }
            Justification::Axiom(name.to_string(), parse_subst(subst, line)?)
        }
        "mp" => {
            let i = parse_index(words.next(), line)?;
            let j = parse_index(words.next(), line)?;
            if words.next().is_some() {
                return Err(syntax(line, "mp takes two line numbers"));
            }
            Justification::MP(i, j)
        }
        "r" => {
            let i = parse_index(words.next(), line)?;
            if words.next().is_some() {
                return Err(syntax(line, "r takes one line number"));
            }
            Justification::R(i)
        }
        "sub" => {
            let (i, subst) = rest.split_once(char::is_whitespace).unwrap_or((rest, ""));
            Justification::Sub(parse_index(Some(i), line)?, parse_subst(subst, line)?)
        }
        other => return Err(syntax(line, format!("unknown rule `{other}`"))),
    };
    Ok(just)
}

impl FromStr for Derivation {
    type Err = DerivationParseError;

    /// One line per step: `3. (o p & o q) -> o (p & q)   [axiom KwCon]`.
    /// Blank lines and lines starting with `#` are skipped.
    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let mut d = Derivation::default();
        for raw in text.lines() {
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let expected = d.len() + 1;
            let (num, rest) = trimmed
                .split_once('.')
                .ok_or_else(|| syntax(expected, "expected `<n>. <formula> [<rule>]`"))?;
            if num.trim().parse::<usize>().ok() != Some(expected) {
                return Err(syntax(expected, format!("expected line number {expected}")));
            }
            let open = rest
                .rfind('[')
                .ok_or_else(|| syntax(expected, "missing `[justification]`"))?;
            let close = rest[open..]
                .find(']')
                .map(|c| open + c)
                .filter(|&c| rest[c + 1..].trim().is_empty())
                .ok_or_else(|| syntax(expected, "justification must end the line with `]`"))?;
            // A trailing `[]` is a box, not a justification.
            if close == open + 1 {
                return Err(syntax(expected, "missing `[justification]`"));
            }
            let formula =
                parse(&rest[..open]).map_err(|e| syntax(expected, e.to_string()))?;
            let just = parse_justification(&rest[open + 1..close], expected)?;
            d.push(formula, just);
        }
        Ok(d)
    }
}

impl fmt::Display for Justification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Justification::Taut => write!(f, "taut"),
            Justification::Premise => write!(f, "premise"),
            Justification::Axiom(name, s) if s.is_empty() => write!(f, "axiom {name}"),
            Justification::Axiom(name, s) => write!(f, "axiom {name} {}", render_subst(s)),
            Justification::MP(i, j) => write!(f, "mp {i} {j}"),
            Justification::Sub(i, s) => write!(f, "sub {i} {}", render_subst(s)),
            Justification::R(i) => write!(f, "r {i}"),
        }
    }
}

impl fmt::Display for Derivation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, line) in self.lines.iter().enumerate() {
            writeln!(f, "{}. {}   [{}]", k + 1, line.formula, line.just)?;
        }
        Ok(())
    }
}

/// A frame of the scanned class on which an axiom is not valid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScanFailure {
    pub frame: Model,
    pub axiom: &'static str,
    /// Falsifying valuation and world.
    pub countermodel: (Model, usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScanReport {
    pub system: System,
    pub class: FrameClass,
    pub max_n: usize,
    pub frames_checked: usize,
    pub failures: Vec<ScanFailure>,
}

impl ScanReport {
    pub fn is_sound(&self) -> bool {
        self.failures.is_empty()
    }
}

impl fmt::Display for ScanReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} axioms over {} frames up to n={}: {} frames, {} failures",
            self.system,
            self.class,
            self.max_n,
            self.frames_checked,
            self.failures.len()
        )?;
        for fail in &self.failures {
            let (m, w) = &fail.countermodel;
            write!(f, "\n  {} fails: {}", fail.axiom, m.to_json_string(Some(*w)))?;
        }
        Ok(())
    }
}

/// Checks frame validity of every axiom of `sys` on every frame of `cls`
/// with at most `max_n` worlds.
pub fn soundness_scan(sys: System, cls: FrameClass, max_n: usize) -> ScanReport {
    assert!(max_n >= 1);
    let axioms = sys.axioms();
    let mut failures = Vec::new();
    let mut frames_checked = 0;
    for frame in enumerate_class_frames(cls, max_n) {
        frames_checked += 1;
        for (name, schema) in &axioms {
            if let Some(countermodel) = frame_countermodel(&frame, schema) {
                failures.push(ScanFailure {
                    frame: frame.clone(),
                    axiom: name,
                    countermodel,
                });
            }
        }
    }
    ScanReport {
        system: sys,
        class: cls,
        max_n,
        frames_checked,
        failures,
    }
}
