use num_traits::One;
use thiserror::Error as ThisError;

use super::ast::{Basis, ExponentSyntax, Expr, ExprKind, Func, Span};
use crate::deriv::{d_series, DerivationSpec};
use crate::error::Error;
use crate::exponents::Exponent;
use crate::rational::Rational;
use crate::series::Series;
use crate::translog::{s_exp, s_log};

#[derive(Clone, Debug)]
pub struct EvalContext {
    pub spec: Option<DerivationSpec>,
    /// Number of terms kept by `exp`, `log`, `inv` and negative powers.
    pub depth: usize,
}

impl Default for EvalContext {
    fn default() -> Self {
        EvalContext {
            spec: None,
            depth: 8,
        }
    }
}

/// An engine error tagged with the source range that raised it.
#[derive(Clone, Debug, PartialEq, ThisError)]
#[error("{error}")]
pub struct EvalError {
    pub error: Error,
    pub span: Span,
}

fn at<T>(span: Span, r: crate::Result<T>) -> Result<T, EvalError> {
    r.map_err(|error| EvalError { error, span })
}

pub fn exponent_value(x: &ExponentSyntax, ctx: &EvalContext) -> crate::Result<Exponent> {
    let mut g = Exponent::zero();
    for (i, basis, q) in x.terms() {
        let part = match basis {
            Basis::E => Exponent::scaled_unit(q.clone(), i.clone()),
            Basis::Tau => {
                let shift = ctx
                    .spec
                    .as_ref()
                    .and_then(DerivationSpec::shift)
                    .ok_or_else(|| {
                        Error::Configuration(
                            "tau(...) needs a shift-based derivation spec (case1 or el)".into(),
                        )
                    })?;
                Exponent::tail(i.clone(), shift)?.scaled(q)
            }
        };
        g = g.checked_add(&part)?;
    }
    Ok(g)
}

pub fn evaluate(e: &Expr, ctx: &EvalContext) -> Result<Series, EvalError> {
    let span = e.span;
    match &e.kind {
        ExprKind::Rat(q) => Ok(Series::constant(q.clone())),
        ExprKind::Mono(x) => at(
            span,
            exponent_value(x, ctx).map(|g| Series::monomial(Rational::one(), g)),
        ),
        ExprKind::Neg(a) => Ok(evaluate(a, ctx)?.negated()),
        ExprKind::Add(a, b) => {
            let (x, y) = (evaluate(a, ctx)?, evaluate(b, ctx)?);
            at(span, x.checked_add(&y))
        }
        ExprKind::Sub(a, b) => {
            let (x, y) = (evaluate(a, ctx)?, evaluate(b, ctx)?);
            at(span, x.checked_sub(&y))
        }
        ExprKind::Mul(a, b) => {
            let (x, y) = (evaluate(a, ctx)?, evaluate(b, ctx)?);
            at(span, x.checked_mul(&y))
        }
        ExprKind::Div(a, b) => {
            let x = evaluate(a, ctx)?;
            let y = evaluate(b, ctx)?;
            let inv = at(b.span, y.inv(ctx.depth))?;
            at(span, x.checked_mul(&inv))
        }
        ExprKind::Pow(a, n) => {
            let x = evaluate(a, ctx)?;
            let base = if *n < 0 {
                at(span, x.inv(ctx.depth))?
            } else {
                x
            };
            at(span, base.pow(n.unsigned_abs() as u32))
        }
        ExprKind::Apply(f, a) => {
            let x = evaluate(a, ctx)?;
            let r = match f {
                Func::Exp => s_exp(&x, ctx.depth),
                Func::Log => s_log(
                    &x,
                    ctx.depth,
                    ctx.spec.as_ref().and_then(DerivationSpec::el_shift),
                ),
                Func::Inv => x.inv(ctx.depth),
                Func::D => match &ctx.spec {
                    Some(spec) => d_series(spec, &x),
                    None => Err(Error::Usage("D(...) needs --spec".into())),
                },
            };
            at(span, r)
        }
    }
}
