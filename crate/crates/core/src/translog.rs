//! Exponential and logarithm as partial sums with sound guarantees.
//!
//! `exp` is defined on infinitesimals only and `log` on series whose
//! leading coefficient is 1: for rational coefficients `exp(c)` and
//! `log(c)` of nonzero constants leave `ℚ`.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::exponents::{Exponent, ShiftMap, Sign};
use crate::rational::{factorial, Rational};
use crate::series::{power_sum, Series};

/// `Σ_{k=0..depth} ε^k/k!`, exact below `(depth+1)·v_min(ε)`.
pub fn s_exp(eps: &Series, depth: usize) -> Result<Series> {
    check_infinitesimal(eps)?;
    let coeffs: Vec<Rational> = (0..=depth)
        .map(|k| Rational::new(BigInt::one(), factorial(k)))
        .collect();
    power_sum(eps, &coeffs)
}

fn check_infinitesimal(eps: &Series) -> Result<()> {
    let d = eps.decompose();
    if !d.negative_part.is_zero() {
        return Err(Error::Domain(format!(
            "exp argument has negative support ({})",
            d.negative_part
        )));
    }
    if !d.constant_term.is_zero() {
        return Err(Error::Domain(format!(
            "exp argument has constant part {}",
            d.constant_term
        )));
    }
    if let Some(w) = eps.guarantee() {
        if w.sign() != Sign::Positive {
            return Err(Error::Domain(format!(
                "exp argument is only known below t^{{{w}}}, its constant part is undetermined"
            )));
        }
    }
    Ok(())
}

/// Logarithm of `t^{g}` for an atom-only `g` in the EL structure:
/// `-Σ_φ g_φ t^{-1_{σ(φ)}}`.
pub fn log_monomial(g: &Exponent, shift: ShiftMap) -> Result<Series> {
    if !g.is_tail_free() {
        return Err(Error::Unsupported(format!(
            "log of t^{{{g}}}: exponents with tail components have no log formula"
        )));
    }
    let mut terms = Vec::with_capacity(g.atoms().len());
    for (phi, q) in g.atoms() {
        if !phi.is_integer() {
            return Err(Error::Domain(format!(
                "log of t^{{{g}}}: index {phi} is not an integer"
            )));
        }
        terms.push((Exponent::unit(shift.apply(phi)).negated(), -q.clone()));
    }
    Series::from_terms(terms)
}

/// `log(a) = log(t^{g0}) + Σ_{n=1..depth} (-1)^{n+1} ε^n / n` for
/// `a = t^{g0}(1 + ε)`. A non-constant leading monomial needs the EL
/// shift.
pub fn s_log(a: &Series, depth: usize, el_shift: Option<ShiftMap>) -> Result<Series> {
    let (g0, c) = a
        .leading_term()
        .ok_or_else(|| Error::Domain("log of zero".into()))?;
    if !c.is_one() {
        return Err(Error::Unsupported(format!(
            "log needs leading coefficient 1, found {c}"
        )));
    }
    let monomial_log = if g0.is_zero() {
        Series::zero()
    } else {
        let shift = el_shift.ok_or_else(|| {
            Error::Domain(format!(
                "log of a series led by t^{{{g0}}} needs an EL shift"
            ))
        })?;
        log_monomial(g0, shift)?
    };
    let eps = a.shifted(&g0.negated())?.checked_sub(&Series::one())?;
    let coeffs: Vec<Rational> = (0..=depth)
        .map(|n| {
            if n == 0 {
                Rational::zero()
            } else {
                let q = Rational::new(BigInt::one(), BigInt::from(n));
                if n % 2 == 1 {
                    q
                } else {
                    -q
                }
            }
        })
        .collect();
    monomial_log.checked_add(&power_sum(&eps, &coeffs)?)
}
