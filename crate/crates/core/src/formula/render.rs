use super::Formula;

// A binary operand of a different binary connective is always parenthesised,
// e.g. `(o p & p) -> o o p`. Chains of one connective only take parentheses
// against their associativity.

#[derive(Clone, Copy, PartialEq, Eq)]
enum Bin {
    And,
    Or,
    Implies,
    Iff,
}

impl Bin {
    fn symbol(self) -> &'static str {
        match self {
            Bin::And => "&",
            Bin::Or => "|",
            Bin::Implies => "->",
            Bin::Iff => "<->",
        }
    }

    fn right_assoc(self) -> bool {
        matches!(self, Bin::Implies | Bin::Iff)
    }
}

fn binary(f: &Formula) -> Option<(Bin, &Formula, &Formula)> {
    match f {
        Formula::And(a, b) => Some((Bin::And, a, b)),
        Formula::Or(a, b) => Some((Bin::Or, a, b)),
        Formula::Implies(a, b) => Some((Bin::Implies, a, b)),
        Formula::Iff(a, b) => Some((Bin::Iff, a, b)),
        _ => None,
    }
}

/// Renders in the canonical ASCII syntax without sugar.
pub fn render(f: &Formula) -> String {
    let mut out = String::new();
    write_formula(f, false, &mut out);
    out
}

/// Like [`render`], but writes `~o φ` as `A φ` and `~[]~φ` as `<>φ`.
pub fn render_sugared(f: &Formula) -> String {
    let mut out = String::new();
    write_formula(f, true, &mut out);
    out
}

fn write_formula(f: &Formula, sugar: bool, out: &mut String) {
    if let Some((op, a, b)) = binary(f) {
        let left_bare = binary(a).is_some_and(|(inner, _, _)| inner == op && !op.right_assoc());
        let right_bare = binary(b).is_some_and(|(inner, _, _)| inner == op && op.right_assoc());
        write_operand(a, left_bare, sugar, out);
        out.push(' ');
        out.push_str(op.symbol());
        out.push(' ');
        write_operand(b, right_bare, sugar, out);
        return;
    }
    match f {
        Formula::Var(v) => out.push_str(v),
        Formula::Top => out.push('T'),
        Formula::Bot => out.push('F'),
        Formula::Not(a) => {
            if sugar {
                match &**a {
                    Formula::Ess(inner) => {
                        out.push_str("A ");
                        write_operand(inner, false, sugar, out);
                        return;
                    }
                    Formula::Box(inner) => {
                        if let Formula::Not(body) = &**inner {
                            out.push_str("<>");
                            write_operand(body, false, sugar, out);
                            return;
                        }
                    }
                    _ => {}
                }
            }
            out.push('~');
            write_operand(a, false, sugar, out);
        }
        Formula::Ess(a) => {
            out.push_str("o ");
            write_operand(a, false, sugar, out);
        }
        Formula::Box(a) => {
            out.push_str("[]");
            write_operand(a, false, sugar, out);
        }
        _ => unreachable!("binary nodes handled above"),
    }
}

fn write_operand(f: &Formula, bare_binary: bool, sugar: bool, out: &mut String) {
    if binary(f).is_some() && !bare_binary {
        out.push('(');
        write_formula(f, sugar, out);
        out.push(')');
    } else {
        write_formula(f, sugar, out);
    }
}
