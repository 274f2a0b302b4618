use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::exponents::IndexPoint;
use crate::rational::Rational;

/// Byte range in the source text.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        Span { start, end }
    }

    pub fn to(self, other: Span) -> Span {
        Span::new(self.start, other.end)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Exp,
    Log,
    Inv,
    D,
}

impl Func {
    pub const NAMES: [&'static str; 4] = ["exp", "log", "inv", "D"];

    pub fn from_name(name: &str) -> Option<Func> {
        match name {
            "exp" => Some(Func::Exp),
            "log" => Some(Func::Log),
            "inv" => Some(Func::Inv),
            "D" => Some(Func::D),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Inv => "inv",
            Func::D => "D",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Basis {
    /// `e(i)`, the atom `1_i`.
    E,
    /// `tau(i)`, the tail element `Σ_{n≥1} 1_{σⁿ(i)}`.
    Tau,
}

/// Exponent as written: coefficients of `e(i)` and `tau(i)`, merged and
/// sorted. The shift giving `tau` its meaning is supplied at evaluation.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ExponentSyntax {
    terms: BTreeMap<(IndexPoint, Basis), Rational>,
}

impl ExponentSyntax {
    pub fn zero() -> Self {
        ExponentSyntax::default()
    }

    pub fn unit(i: i64) -> Self {
        let mut e = ExponentSyntax::zero();
        e.add(Rational::one(), IndexPoint::from(i), Basis::E);
        e
    }

    pub fn add(&mut self, q: Rational, index: IndexPoint, basis: Basis) {
        let key = (index, basis);
        let total = self.terms.remove(&key).unwrap_or_else(Rational::zero) + q;
        if !total.is_zero() {
            self.terms.insert(key, total);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&IndexPoint, Basis, &Rational)> {
        self.terms.iter().map(|((i, b), q)| (i, *b, q))
    }
}

impl fmt::Display for ExponentSyntax {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (n, (i, b, q)) in self.terms().enumerate() {
            let name = match b {
                Basis::E => "e",
                Basis::Tau => "tau",
            };
            let mag = q.abs();
            match (n, q.is_negative()) {
                (0, true) => write!(f, "-{mag}*{name}({i})")?,
                (0, false) => write!(f, "{mag}*{name}({i})")?,
                (_, true) => write!(f, " - {mag}*{name}({i})")?,
                (_, false) => write!(f, " + {mag}*{name}({i})")?,
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub enum ExprKind {
    Rat(Rational),
    Mono(ExponentSyntax),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i64),
    Apply(Func, Box<Expr>),
}

/// Expression tree. Equality is structural and ignores spans.
#[derive(Clone, Debug)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

impl PartialEq for ExprKind {
    fn eq(&self, other: &Self) -> bool {
        use ExprKind::*;
        match (self, other) {
            (Rat(a), Rat(b)) => a == b,
            (Mono(a), Mono(b)) => a == b,
            (Neg(a), Neg(b)) => a == b,
            (Add(a, b), Add(c, d))
            | (Sub(a, b), Sub(c, d))
            | (Mul(a, b), Mul(c, d))
            | (Div(a, b), Div(c, d)) => a == c && b == d,
            (Pow(a, n), Pow(b, m)) => a == b && n == m,
            (Apply(f, a), Apply(g, b)) => f == g && a == b,
            _ => false,
        }
    }
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

impl Expr {
    pub fn new(kind: ExprKind, span: Span) -> Self {
        Expr { kind, span }
    }

    fn precedence(&self) -> u8 {
        match self.kind {
            ExprKind::Add(..) | ExprKind::Sub(..) => 1,
            ExprKind::Mul(..) | ExprKind::Div(..) => 2,
            ExprKind::Neg(_) => 3,
            ExprKind::Pow(..) => 4,
            _ => 5,
        }
    }
}

/// Renders with the fewest parentheses that reparse to the same tree.
/// `fold_ok` is false where a bare `p/q` would not be read back as one
/// rational literal.
fn write_expr(e: &Expr, min_prec: u8, fold_ok: bool, out: &mut String) {
    if e.precedence() < min_prec {
        out.push('(');
        write_expr(e, 0, true, out);
        out.push(')');
        return;
    }
    match &e.kind {
        ExprKind::Rat(q) => {
            if q.is_negative() || (!q.is_integer() && !fold_ok) {
                out.push_str(&format!("({q})"));
            } else {
                out.push_str(&q.to_string());
            }
        }
        ExprKind::Mono(x) => out.push_str(&format!("t^{{{x}}}")),
        ExprKind::Neg(a) => {
            out.push('-');
            write_expr(a, 3, fold_ok, out);
        }
        ExprKind::Add(a, b) | ExprKind::Sub(a, b) => {
            write_expr(a, 1, fold_ok, out);
            out.push_str(if matches!(e.kind, ExprKind::Add(..)) {
                " + "
            } else {
                " - "
            });
            write_expr(b, 2, true, out);
        }
        ExprKind::Mul(a, b) => {
            write_expr(a, 2, fold_ok, out);
            out.push_str(" * ");
            write_expr(b, 3, true, out);
        }
        ExprKind::Div(a, b) => {
            write_expr(a, 2, fold_ok, out);
            out.push_str(" / ");
            if matches!(b.kind, ExprKind::Rat(_)) {
                out.push('(');
                write_expr(b, 0, true, out);
                out.push(')');
            } else {
                write_expr(b, 3, false, out);
            }
        }
        ExprKind::Pow(a, n) => {
            write_expr(a, 5, false, out);
            out.push_str(&format!("^{n}"));
        }
        ExprKind::Apply(f, a) => {
            out.push_str(f.name());
            out.push('(');
            write_expr(a, 0, true, out);
            out.push(')');
        }
    }
}

pub fn print(e: &Expr) -> String {
    let mut out = String::new();
    write_expr(e, 0, true, &mut out);
    out
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print(self))
    }
}
