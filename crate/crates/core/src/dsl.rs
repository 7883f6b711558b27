//! Interconnection expressions over named series.
//!
//! ```text
//! expr   := term ('+' term)*
//! term   := factor ('*' factor)*
//! factor := atom ('<|' atom)*
//! atom   := identifier | '(' expr ')'
//! ```
//!
//! All three operators are left-associative; `<|` binds tightest. `B <| A` feeds
//! the output of `A` into `B`.

use std::collections::BTreeMap;
use std::fmt;

use crate::algebra::{compose_series, product_series, sum_series, Truncation};
use crate::error::{Result, VolterraError};
use crate::series::{elementary_series, Elementary, VolterraSeries};

/// Name that resolves to the identity series unless bound explicitly.
pub const IDENTITY_NAME: &str = "Id";

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    Name(String),
    Sum(Box<Expr>, Box<Expr>),
    Product(Box<Expr>, Box<Expr>),
    Compose(Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn name(n: &str) -> Self {
        Expr::Name(n.to_string())
    }

    pub fn sum(a: Expr, b: Expr) -> Self {
        Expr::Sum(Box::new(a), Box::new(b))
    }

    pub fn product(a: Expr, b: Expr) -> Self {
        Expr::Product(Box::new(a), Box::new(b))
    }

    pub fn compose(outer: Expr, inner: Expr) -> Self {
        Expr::Compose(Box::new(outer), Box::new(inner))
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Sum(..) => 1,
            Expr::Product(..) => 2,
            Expr::Compose(..) => 3,
            Expr::Name(_) => 4,
        }
    }

    /// Names referenced, in order of first appearance.
    pub fn names(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_names(&mut out);
        out
    }

    fn collect_names<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            Expr::Name(n) => {
                if !out.contains(&n.as_str()) {
                    out.push(n);
                }
            }
            Expr::Sum(a, b) | Expr::Product(a, b) | Expr::Compose(a, b) => {
                a.collect_names(out);
                b.collect_names(out);
            }
        }
    }
}

/// Minimal parentheses: a left operand is wrapped only when it binds looser, a
/// right operand also when it binds equally.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (a, b, op) = match self {
            Expr::Name(n) => return f.write_str(n),
            Expr::Sum(a, b) => (a, b, "+"),
            Expr::Product(a, b) => (a, b, "*"),
            Expr::Compose(a, b) => (a, b, "<|"),
        };
        let p = self.precedence();
        if a.precedence() < p {
            write!(f, "({a})")?;
        } else {
            write!(f, "{a}")?;
        }
        write!(f, " {op} ")?;
        if b.precedence() <= p {
            write!(f, "({b})")
        } else {
            write!(f, "{b}")
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Plus,
    Star,
    Compose,
    Open,
    Close,
    End,
}

struct Parser<'a> {
    text: &'a str,
    pos: usize,
    tok: Tok,
    tok_start: usize,
}

const ATOM_START: [&str; 2] = ["identifier", "'('"];

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Result<Self> {
        let mut p = Self { text, pos: 0, tok: Tok::End, tok_start: 0 };
        p.advance()?;
        Ok(p)
    }

    fn error<T>(&self, expected: &[&str]) -> Result<T> {
        Err(VolterraError::Syntax {
            offset: self.tok_start,
            expected: expected.iter().map(|s| s.to_string()).collect(),
        })
    }

    fn advance(&mut self) -> Result<()> {
        let bytes = self.text.as_bytes();
        while self.pos < bytes.len() && bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        self.tok_start = self.pos;
        let Some(&c) = bytes.get(self.pos) else {
            self.tok = Tok::End;
            return Ok(());
        };
        self.tok = match c {
            b'+' => Tok::Plus,
            b'*' => Tok::Star,
            b'(' => Tok::Open,
            b')' => Tok::Close,
            b'<' if bytes.get(self.pos + 1) == Some(&b'|') => {
                self.pos += 1;
                Tok::Compose
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                let end = bytes[self.pos..]
                    .iter()
                    .position(|b| !(b.is_ascii_alphanumeric() || *b == b'_'))
                    .map_or(bytes.len(), |n| self.pos + n);
                let name = self.text[self.pos..end].to_string();
                self.pos = end;
                self.tok = Tok::Ident(name);
                return Ok(());
            }
            _ => return self.error(&["identifier", "'('", "'+'", "'*'", "'<|'", "')'"]),
        };
        self.pos += 1;
        Ok(())
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut e = self.term()?;
        while self.tok == Tok::Plus {
            self.advance()?;
            e = Expr::sum(e, self.term()?);
        }
        Ok(e)
    }

    fn term(&mut self) -> Result<Expr> {
        let mut e = self.factor()?;
        while self.tok == Tok::Star {
            self.advance()?;
            e = Expr::product(e, self.factor()?);
        }
        Ok(e)
    }

    fn factor(&mut self) -> Result<Expr> {
        let mut e = self.atom()?;
        while self.tok == Tok::Compose {
            self.advance()?;
            e = Expr::compose(e, self.atom()?);
        }
        Ok(e)
    }

    fn atom(&mut self) -> Result<Expr> {
        match std::mem::replace(&mut self.tok, Tok::End) {
            Tok::Ident(n) => {
                self.advance()?;
                Ok(Expr::Name(n))
            }
            Tok::Open => {
                self.advance()?;
                let e = self.expr()?;
                if self.tok != Tok::Close {
                    return self.error(&["'+'", "'*'", "'<|'", "')'"]);
                }
                self.advance()?;
                Ok(e)
            }
            other => {
                self.tok = other;
                self.error(&ATOM_START)
            }
        }
    }
}

pub fn parse(text: &str) -> Result<Expr> {
    let mut p = Parser::new(text)?;
    let e = p.expr()?;
    if p.tok != Tok::End {
        return p.error(&["'+'", "'*'", "'<|'", "end of input"]);
    }
    Ok(e)
}

/// A built series with the truncations applied on the way, innermost first.
#[derive(Clone, Debug, PartialEq)]
pub struct Built {
    pub series: VolterraSeries,
    pub truncations: Vec<Truncation>,
}

pub fn build(expr: &Expr, bindings: &BTreeMap<String, VolterraSeries>, cap: usize) -> Result<Built> {
    let mut truncations = Vec::new();
    let series = build_into(expr, bindings, cap, &mut truncations)?;
    Ok(Built { series, truncations })
}

fn build_into(
    expr: &Expr,
    bindings: &BTreeMap<String, VolterraSeries>,
    cap: usize,
    truncations: &mut Vec<Truncation>,
) -> Result<VolterraSeries> {
    let (a, b) = match expr {
        Expr::Name(n) => {
            return match bindings.get(n) {
                Some(s) => Ok(s.clone()),
                None if n == IDENTITY_NAME => elementary_series(&Elementary::Identity, 1),
                None => Err(VolterraError::UnboundName(n.clone())),
            }
        }
        Expr::Sum(a, b) | Expr::Product(a, b) | Expr::Compose(a, b) => (a, b),
    };
    let a = build_into(a, bindings, cap, truncations)?;
    let b = build_into(b, bindings, cap, truncations)?;
    let capped = match expr {
        Expr::Sum(..) => return sum_series(&a, &b),
        Expr::Product(..) => product_series(&a, &b, cap)?,
        _ => compose_series(&a, &b, cap)?,
    };
    truncations.extend(capped.truncation);
    Ok(capped.series)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_series_without_constant, rng};
    use crate::DEFAULT_ORDER_CAP;
    use proptest::prelude::*;

    fn n(s: &str) -> Expr {
        Expr::name(s)
    }

    #[test]
    fn precedence_and_association() {
        assert_eq!(parse("(C <| B) <| A").unwrap(), Expr::compose(Expr::compose(n("C"), n("B")), n("A")));
        assert_eq!(parse("C <| B <| A").unwrap(), parse("(C <| B) <| A").unwrap());
        assert_eq!(parse("A + B * C").unwrap(), Expr::sum(n("A"), Expr::product(n("B"), n("C"))));
        assert_eq!(parse("A * B <| C").unwrap(), Expr::product(n("A"), Expr::compose(n("B"), n("C"))));
        assert!(matches!(parse("A - B"), Err(VolterraError::Syntax { offset: 2, .. })));
        assert_eq!(parse(" \tx_1+\n(y)").unwrap(), Expr::sum(n("x_1"), n("y")));
    }

    #[test]
    fn syntax_errors_carry_offset_and_expectations() {
        let cases: [(&str, usize, &str); 5] = [
            ("A +", 3, "identifier"),
            ("(A", 2, "')'"),
            ("A B", 2, "end of input"),
            ("", 0, "'('"),
            ("A <", 2, "'<|'"),
        ];
        for (text, at, want) in cases {
            match parse(text) {
                Err(VolterraError::Syntax { offset, expected }) => {
                    assert_eq!(offset, at, "{text}");
                    assert!(expected.iter().any(|e| e == want), "{text}: {expected:?}");
                }
                other => panic!("{text}: {other:?}"),
            }
        }
    }

    #[test]
    fn printer_uses_minimal_parentheses() {
        for text in
            ["A + B * C", "(A + B) * C", "C <| B <| A", "C <| (B <| A)", "A + (B + C)", "(A * B) <| C", "A * (B <| C)"]
        {
            let e = parse(text).unwrap();
            let printed = e.to_string();
            assert_eq!(parse(&printed).unwrap(), e);
        }
        assert_eq!(parse("((A)) + ((B * C))").unwrap().to_string(), "A + B * C");
        assert_eq!(parse("(A * B) <| C").unwrap().to_string(), "(A * B) <| C");
        assert_eq!(parse("A * (B <| C)").unwrap().to_string(), "A * B <| C");
    }

    fn bindings(seed: u64) -> BTreeMap<String, VolterraSeries> {
        let mut r = rng(seed);
        ["A", "B", "C"].iter().map(|k| (k.to_string(), random_series_without_constant(&mut r, 2, 3))).collect()
    }

    #[test]
    fn build_matches_algebra() {
        let b = bindings(3);
        let left = build(&parse("(C <| B) <| A").unwrap(), &b, DEFAULT_ORDER_CAP).unwrap();
        let right = build(&parse("C <| (B <| A)").unwrap(), &b, DEFAULT_ORDER_CAP).unwrap();
        let dev = crate::algebra::kernel_deviation(&left.series, &right.series).unwrap();
        assert!(dev.iter().all(|(_, d)| *d <= 1e-8), "{dev:?}");
        let a = &b["A"];
        let id = build(&parse("Id <| A").unwrap(), &b, DEFAULT_ORDER_CAP).unwrap().series;
        assert_eq!(id, a.symmetrized());
        let doubled = build(&parse("A + A").unwrap(), &b, DEFAULT_ORDER_CAP).unwrap().series;
        assert_eq!(doubled, a.to_canonical().map_kernels(|k| k.scaled(2.0.into())));
        assert!(matches!(build(&parse("A + Z").unwrap(), &b, 4), Err(VolterraError::UnboundName(z)) if z == "Z"));
    }

    #[test]
    fn truncations_are_collected() {
        let b = bindings(4);
        let built = build(&parse("(A * B) <| C").unwrap(), &b, 2).unwrap();
        assert!(!built.truncations.is_empty());
        assert!(built.series.max_order() <= 2);
    }

    fn arb_expr() -> impl Strategy<Value = Expr> {
        let leaf = prop::sample::select(vec!["A", "B", "C", "Id", "x_2"]).prop_map(Expr::name);
        leaf.prop_recursive(4, 32, 2, |inner| {
            (inner.clone(), inner, 0..3u8).prop_map(|(a, b, op)| match op {
                0 => Expr::sum(a, b),
                1 => Expr::product(a, b),
                _ => Expr::compose(a, b),
            })
        })
    }

    /// Prints with redundant parentheses and random spacing.
    fn noisy(e: &Expr, pad: &mut impl Iterator<Item = usize>) -> String {
        let sp = |pad: &mut dyn Iterator<Item = usize>| " ".repeat(pad.next().unwrap_or(0));
        match e {
            Expr::Name(s) => s.clone(),
            Expr::Sum(a, b) | Expr::Product(a, b) | Expr::Compose(a, b) => {
                let op = match e {
                    Expr::Sum(..) => "+",
                    Expr::Product(..) => "*",
                    _ => "<|",
                };
                let (l, r) = (noisy(a, pad), noisy(b, pad));
                format!("({}{l}{}{op}{}{r})", sp(pad), sp(pad), sp(pad))
            }
        }
    }

    proptest! {
        #[test]
        fn print_then_parse_is_identity(e in arb_expr()) {
            prop_assert_eq!(parse(&e.to_string()).unwrap(), e);
        }

        #[test]
        fn grammar_strings_round_trip(e in arb_expr(), pads in prop::collection::vec(0..3usize, 64)) {
            let text = noisy(&e, &mut pads.into_iter());
            let parsed = parse(&text).unwrap();
            prop_assert_eq!(&parsed, &e);
            prop_assert_eq!(parse(&parsed.to_string()).unwrap(), parsed);
        }
    }
}
