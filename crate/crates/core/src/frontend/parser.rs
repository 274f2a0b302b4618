//! Recursive-descent parser.
//!
//! ```text
//! expr     := term (('+' | '-') term)*
//! term     := factor (('*' | '/') factor)*
//! factor   := '-' factor | power
//! power    := atom ('^' '-'? int)?
//! atom     := rational | 't' ('^' '{' exponent '}')? | '(' expr ')' | ident '(' expr ')'
//! exponent := ('+' | '-')? eterm (('+' | '-') eterm)*
//! eterm    := rational ('*' basis)? | basis
//! basis    := ('e' | 'tau') '(' '-'? rational ')'
//! ```
//!
//! `p/q` is read as one literal where it starts a term or follows `*`,
//! unless `q` carries a power. A bare `t` is `t^{1*e(0)}` and a bare
//! rational `q` inside braces is `q*e(0)`.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};

use super::ast::{Basis, ExponentSyntax, Expr, ExprKind, Func, Span};
use super::lexer::{lex, Tok, Token};
use super::ParseError;
use crate::exponents::IndexPoint;
use crate::rational::Rational;

struct Parser<'a> {
    src: &'a str,
    toks: Vec<Token>,
    pos: usize,
    expected: BTreeSet<String>,
}

type PResult<T> = Result<T, ParseError>;

impl<'a> Parser<'a> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn span(&self) -> Span {
        self.toks[self.pos].span
    }

    fn prev_span(&self) -> Span {
        self.toks[self.pos.saturating_sub(1)].span
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        self.expected.clear();
        t
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.bump();
            true
        } else {
            self.expected.insert(tok.describe());
            false
        }
    }

    fn expect(&mut self, tok: &Tok) -> PResult<Span> {
        let span = self.span();
        if self.eat(tok) {
            Ok(span)
        } else {
            Err(self.unexpected())
        }
    }

    fn hint(&mut self, what: &str) {
        self.expected.insert(what.to_string());
    }

    fn unexpected(&self) -> ParseError {
        ParseError::at(
            self.src,
            self.span(),
            format!("unexpected {}", self.peek().describe()),
            self.expected.iter().cloned().collect(),
        )
    }

    fn expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.term()?;
        loop {
            let add = if self.eat(&Tok::Plus) {
                true
            } else if self.eat(&Tok::Minus) {
                false
            } else {
                return Ok(lhs);
            };
            let rhs = self.term()?;
            let span = lhs.span.to(rhs.span);
            let kind = if add {
                ExprKind::Add(Box::new(lhs), Box::new(rhs))
            } else {
                ExprKind::Sub(Box::new(lhs), Box::new(rhs))
            };
            lhs = Expr::new(kind, span);
        }
    }

    fn term(&mut self) -> PResult<Expr> {
        let mut lhs = self.factor(true)?;
        loop {
            let mul = if self.eat(&Tok::Star) {
                true
            } else if self.eat(&Tok::Slash) {
                false
            } else {
                return Ok(lhs);
            };
            let rhs = self.factor(mul)?;
            let span = lhs.span.to(rhs.span);
            let kind = if mul {
                ExprKind::Mul(Box::new(lhs), Box::new(rhs))
            } else {
                ExprKind::Div(Box::new(lhs), Box::new(rhs))
            };
            lhs = Expr::new(kind, span);
        }
    }

    fn factor(&mut self, fold: bool) -> PResult<Expr> {
        let start = self.span();
        if self.eat(&Tok::Minus) {
            let inner = self.factor(fold)?;
            let span = start.to(inner.span);
            return Ok(Expr::new(ExprKind::Neg(Box::new(inner)), span));
        }
        let base = self.atom(fold)?;
        if !self.eat(&Tok::Caret) {
            return Ok(base);
        }
        let neg = self.eat(&Tok::Minus);
        let n = self.integer("integer power")?;
        let n = n
            .to_i64()
            .filter(|v| v.unsigned_abs() <= u32::MAX as u64)
            .ok_or_else(|| {
                ParseError::at(
                    self.src,
                    self.prev_span(),
                    "power is too large".into(),
                    vec![],
                )
            })?;
        let span = base.span.to(self.prev_span());
        Ok(Expr::new(
            ExprKind::Pow(Box::new(base), if neg { -n } else { n }),
            span,
        ))
    }

    fn integer(&mut self, what: &str) -> PResult<BigInt> {
        if let Tok::Num(n) = self.peek().clone() {
            self.bump();
            Ok(n)
        } else {
            self.hint(what);
            Err(self.unexpected())
        }
    }

    /// `p` or `p/q` with `q ≠ 0`.
    fn rational(&mut self, what: &str) -> PResult<Rational> {
        let p = self.integer(what)?;
        if !self.eat(&Tok::Slash) {
            return Ok(Rational::from_integer(p));
        }
        let q = self.integer("denominator")?;
        if q.is_zero() {
            return Err(ParseError::at(
                self.src,
                self.prev_span(),
                "zero denominator".into(),
                vec![],
            ));
        }
        Ok(Rational::new(p, q))
    }

    fn atom(&mut self, fold: bool) -> PResult<Expr> {
        let start = self.span();
        match self.peek().clone() {
            Tok::Num(p) => {
                let foldable = fold
                    && *self.peek_at(1) == Tok::Slash
                    && matches!(self.peek_at(2), Tok::Num(_))
                    && *self.peek_at(3) != Tok::Caret;
                if foldable {
                    let q = self.rational("number")?;
                    return Ok(Expr::new(ExprKind::Rat(q), start.to(self.prev_span())));
                }
                self.bump();
                Ok(Expr::new(ExprKind::Rat(Rational::from_integer(p)), start))
            }
            Tok::LParen => {
                self.bump();
                let inner = self.expr()?;
                let end = self.expect(&Tok::RParen)?;
                Ok(Expr::new(inner.kind, start.to(end)))
            }
            Tok::Ident(name) if name == "t" => {
                self.bump();
                if *self.peek() == Tok::Caret && *self.peek_at(1) == Tok::LBrace {
                    self.bump();
                    self.bump();
                    let x = self.exponent()?;
                    let end = self.expect(&Tok::RBrace)?;
                    return Ok(Expr::new(ExprKind::Mono(x), start.to(end)));
                }
                Ok(Expr::new(ExprKind::Mono(ExponentSyntax::unit(0)), start))
            }
            Tok::Ident(name) => {
                let Some(f) = Func::from_name(&name) else {
                    let mut expected: Vec<String> =
                        Func::NAMES.iter().map(|n| format!("`{n}`")).collect();
                    expected.push("`t`".into());
                    return Err(ParseError::at(
                        self.src,
                        start,
                        format!("unknown identifier `{name}`"),
                        expected,
                    ));
                };
                self.bump();
                self.expect(&Tok::LParen)?;
                let arg = self.expr()?;
                let end = self.expect(&Tok::RParen)?;
                Ok(Expr::new(ExprKind::Apply(f, Box::new(arg)), start.to(end)))
            }
            _ => {
                for h in ["number", "`t`", "`(`", "`-`", "function name"] {
                    self.hint(h);
                }
                Err(self.unexpected())
            }
        }
    }

    fn exponent(&mut self) -> PResult<ExponentSyntax> {
        let mut x = ExponentSyntax::zero();
        let mut negative = if self.eat(&Tok::Minus) {
            true
        } else {
            self.eat(&Tok::Plus);
            false
        };
        loop {
            let (q, index, basis) = self.exponent_term()?;
            x.add(if negative { -q } else { q }, index, basis);
            if self.eat(&Tok::Plus) {
                negative = false;
            } else if self.eat(&Tok::Minus) {
                negative = true;
            } else {
                return Ok(x);
            }
        }
    }

    fn exponent_term(&mut self) -> PResult<(Rational, IndexPoint, Basis)> {
        if matches!(self.peek(), Tok::Num(_)) {
            let q = self.rational("number")?;
            if !self.eat(&Tok::Star) {
                return Ok((q, IndexPoint::from(0), Basis::E));
            }
            let (index, basis) = self.basis()?;
            return Ok((q, index, basis));
        }
        self.hint("number");
        let (index, basis) = self.basis()?;
        Ok((Rational::from_integer(1.into()), index, basis))
    }

    fn basis(&mut self) -> PResult<(IndexPoint, Basis)> {
        let basis = match self.peek() {
            Tok::Ident(n) if n == "e" => Basis::E,
            Tok::Ident(n) if n == "tau" => Basis::Tau,
            _ => {
                self.hint("`e`");
                self.hint("`tau`");
                return Err(self.unexpected());
            }
        };
        self.bump();
        self.expect(&Tok::LParen)?;
        let neg = self.eat(&Tok::Minus);
        let i = self.rational("index")?;
        self.expect(&Tok::RParen)?;
        Ok((IndexPoint::new(if neg { -i } else { i }), basis))
    }
}

pub fn parse(src: &str) -> Result<Expr, ParseError> {
    let toks = lex(src)?;
    let mut p = Parser {
        src,
        toks,
        pos: 0,
        expected: BTreeSet::new(),
    };
    let e = p.expr()?;
    if *p.peek() != Tok::Eof {
        for h in ["`*`", "`/`", "`^`"] {
            p.hint(h);
        }
        p.hint("end of input");
        return Err(p.unexpected());
    }
    Ok(e)
}
