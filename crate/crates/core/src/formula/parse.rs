//! Recursive-descent parser for the ASCII formula syntax.
//!
//! ```text
//! formula := iff
//! iff     := impl ("<->" impl)*          right-associative
//! impl    := disj ("->" impl)?
//! disj    := conj ("|" conj)*
//! conj    := unary ("&" unary)*
//! unary   := "~" unary | "o" unary | "A" unary | "[]" unary | "<>" unary | atom
//! atom    := "T" | "F" | IDENT | "(" formula ")"
//! ```

use std::fmt;

use thiserror::Error;

use super::Formula;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct ParseError {
    /// Byte offset of the offending token (input length at end of input).
    pub offset: usize,
    pub expected: Vec<&'static str>,
    pub found: Option<String>,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "syntax error at offset {}: expected {}, found {}",
            self.offset,
            self.expected.join(" | "),
            self.found.as_deref().unwrap_or("end of input")
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Not,
    Ess,
    Acc,
    Box,
    Dia,
    And,
    Or,
    Implies,
    Iff,
    LParen,
    RParen,
    Top,
    Bot,
    Ident(String),
}

impl Tok {
    fn text(&self) -> String {
        match self {
            Tok::Not => "~".into(),
            Tok::Ess => "o".into(),
            Tok::Acc => "A".into(),
            Tok::Box => "[]".into(),
            Tok::Dia => "<>".into(),
            Tok::And => "&".into(),
            Tok::Or => "|".into(),
            Tok::Implies => "->".into(),
            Tok::Iff => "<->".into(),
            Tok::LParen => "(".into(),
            Tok::RParen => ")".into(),
            Tok::Top => "T".into(),
            Tok::Bot => "F".into(),
            Tok::Ident(s) => s.clone(),
        }
    }
}

const UNARY_START: &[&str] = &["~", "o", "A", "[]", "<>", "T", "F", "identifier", "("];

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let rest = &text[i..];
        let (tok, len) = if rest.starts_with("<->") {
            (Tok::Iff, 3)
        } else if rest.starts_with("->") {
            (Tok::Implies, 2)
        } else if rest.starts_with("[]") {
            (Tok::Box, 2)
        } else if rest.starts_with("<>") {
            (Tok::Dia, 2)
        } else {
            match c {
                b'~' => (Tok::Not, 1),
                b'&' => (Tok::And, 1),
                b'|' => (Tok::Or, 1),
                b'(' => (Tok::LParen, 1),
                b')' => (Tok::RParen, 1),
                b'T' => (Tok::Top, 1),
                b'F' => (Tok::Bot, 1),
                b'A' => (Tok::Acc, 1),
                b'o' => (Tok::Ess, 1),
                b'a'..=b'z' => {
                    let len = rest
                        .bytes()
                        .take_while(|b| b.is_ascii_alphanumeric())
                        .count();
                    (Tok::Ident(rest[..len].to_string()), len)
                }
                _ => {
                    let ch = rest.chars().next().unwrap_or('?');
                    return Err(ParseError {
                        offset: i,
                        expected: vec!["a token"],
                        found: Some(ch.to_string()),
                    });
                }
            }
        };
        out.push((i, tok));
        i += len;
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map(|(o, _)| *o).unwrap_or(self.end)
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == Some(t) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn error(&self, expected: &[&'static str]) -> ParseError {
        ParseError {
            offset: self.offset(),
            expected: expected.to_vec(),
            found: self.peek().map(Tok::text),
        }
    }

    fn iff(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.implication()?;
        if self.eat(&Tok::Iff) {
            let rhs = self.iff()?;
            return Ok(Formula::iff(lhs, rhs));
        }
        Ok(lhs)
    }

    fn implication(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.disjunction()?;
        if self.eat(&Tok::Implies) {
            let rhs = self.implication()?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<Formula, ParseError> {
        let mut acc = self.conjunction()?;
        while self.eat(&Tok::Or) {
            acc = Formula::or(acc, self.conjunction()?);
        }
        Ok(acc)
    }

    fn conjunction(&mut self) -> Result<Formula, ParseError> {
        let mut acc = self.unary()?;
        while self.eat(&Tok::And) {
            acc = Formula::and(acc, self.unary()?);
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        let Some(tok) = self.peek().cloned() else {
            return Err(self.error(UNARY_START));
        };
        let wrap: Option<fn(Formula) -> Formula> = match tok {
            Tok::Not => Some(Formula::not),
            Tok::Ess => Some(Formula::ess),
            Tok::Acc => Some(Formula::acc),
            Tok::Box => Some(Formula::boxed),
            Tok::Dia => Some(Formula::dia),
            _ => None,
        };
        if let Some(wrap) = wrap {
            self.pos += 1;
            return Ok(wrap(self.unary()?));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Formula, ParseError> {
        let atom = match self.peek().cloned() {
            Some(Tok::Top) => Formula::Top,
            Some(Tok::Bot) => Formula::Bot,
            Some(Tok::Ident(name)) => Formula::Var(name),
            Some(Tok::LParen) => {
                self.pos += 1;
                let inner = self.iff()?;
                if !self.eat(&Tok::RParen) {
                    return Err(self.error(&["&", "|", "->", "<->", ")"]));
                }
                return Ok(inner);
            }
            _ => return Err(self.error(UNARY_START)),
        };
        self.pos += 1;
        Ok(atom)
    }
}

/// Parses a formula. `A φ` and `<> φ` come back desugared.
pub fn parse(text: &str) -> Result<Formula, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser {
        toks,
        pos: 0,
        end: text.len(),
    };
    let f = p.iff()?;
    if p.pos != p.toks.len() {
        return Err(p.error(&["&", "|", "->", "<->", "end of input"]));
    }
    Ok(f)
}
