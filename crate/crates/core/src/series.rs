//! Generalized series `ℚ((G))` with finite term lists.
//!
//! A [`Series`] stores its terms in strictly ascending exponent order.
//! Infinite objects (inverses, exp, log) are represented by partial sums
//! together with a guarantee bound `ω`: every coefficient at an exponent
//! below `ω` is exact, nothing is claimed at or above it. Terms at or
//! above the bound are dropped when a series is assembled.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::exponents::{join_shift, Exponent, ShiftMap, Sign};
use crate::rational::Rational;

const MAX_POLY_POWER: u32 = 4096;

#[derive(Clone, Debug)]
pub struct Series {
    terms: Vec<(Exponent, Rational)>,
    guarantee: Option<Exponent>,
    shift: Option<ShiftMap>,
}

/// `y = a + c + ε` with `a` supported below zero, `c` constant and `ε`
/// infinitesimal.
#[derive(Clone, Debug, PartialEq)]
pub struct Decomposition {
    pub negative_part: Series,
    pub constant_term: Rational,
    pub infinitesimal_part: Series,
}

impl PartialEq for Series {
    fn eq(&self, other: &Self) -> bool {
        self.terms == other.terms && self.guarantee == other.guarantee
    }
}

fn min_bound(a: Option<&Exponent>, b: Option<&Exponent>) -> Option<Exponent> {
    match (a, b) {
        (Some(x), Some(y)) => Some(if x <= y { x.clone() } else { y.clone() }),
        (Some(x), None) | (None, Some(x)) => Some(x.clone()),
        (None, None) => None,
    }
}

impl Series {
    pub fn zero() -> Self {
        Series {
            terms: Vec::new(),
            guarantee: None,
            shift: None,
        }
    }

    pub fn one() -> Self {
        Series::constant(Rational::one())
    }

    pub fn constant(q: Rational) -> Self {
        Series::monomial(q, Exponent::zero())
    }

    pub fn monomial(q: Rational, g: Exponent) -> Self {
        if q.is_zero() {
            return Series::zero();
        }
        let shift = g.shift();
        Series {
            terms: vec![(g, q)],
            guarantee: None,
            shift,
        }
    }

    /// Collects terms, merging equal exponents and dropping zeros.
    pub fn from_terms(terms: impl IntoIterator<Item = (Exponent, Rational)>) -> Result<Self> {
        let mut shift = None;
        let mut acc: BTreeMap<Exponent, Rational> = BTreeMap::new();
        for (g, q) in terms {
            shift = join_shift(shift, g.shift())?;
            *acc.entry(g).or_insert_with(Rational::zero) += q;
        }
        Ok(Series::assemble(acc, None, shift))
    }

    fn assemble(
        acc: BTreeMap<Exponent, Rational>,
        guarantee: Option<Exponent>,
        shift: Option<ShiftMap>,
    ) -> Series {
        let terms = acc
            .into_iter()
            .filter(|(g, q)| !q.is_zero() && guarantee.as_ref().is_none_or(|w| g < w))
            .collect();
        let mut s = Series {
            terms,
            guarantee,
            shift,
        };
        s.refresh_shift();
        s
    }

    fn refresh_shift(&mut self) {
        self.shift = self
            .terms
            .iter()
            .map(|(g, _)| g.shift())
            .chain(self.guarantee.iter().map(Exponent::shift))
            .find(Option::is_some)
            .flatten();
    }

    /// Tightens the guarantee to `min(ω, bound)` and drops the terms it
    /// no longer covers.
    pub fn with_guarantee(mut self, bound: Exponent) -> Result<Self> {
        self.shift = join_shift(self.shift, bound.shift())?;
        let g = min_bound(self.guarantee.as_ref(), Some(&bound));
        if let Some(w) = &g {
            self.terms.retain(|(e, _)| e < w);
        }
        self.guarantee = g;
        self.refresh_shift();
        Ok(self)
    }

    /// Forgets the guarantee, treating the stored partial sum as exact.
    pub fn into_exact(mut self) -> Self {
        self.guarantee = None;
        self.refresh_shift();
        self
    }

    pub fn terms(&self) -> &[(Exponent, Rational)] {
        &self.terms
    }

    pub fn guarantee(&self) -> Option<&Exponent> {
        self.guarantee.as_ref()
    }

    pub fn shift(&self) -> Option<ShiftMap> {
        self.shift
    }

    pub fn is_exact(&self) -> bool {
        self.guarantee.is_none()
    }

    /// No stored terms (the value may still be a jet).
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, g: &Exponent) -> Rational {
        self.terms
            .binary_search_by(|(e, _)| e.cmp(g))
            .map(|i| self.terms[i].1.clone())
            .unwrap_or_else(|_| Rational::zero())
    }

    pub fn constant_term(&self) -> Rational {
        self.coeff(&Exponent::zero())
    }

    pub fn leading_term(&self) -> Option<&(Exponent, Rational)> {
        self.terms.first()
    }

    pub fn v_min(&self) -> Result<Exponent> {
        self.terms
            .first()
            .map(|(g, _)| g.clone())
            .ok_or(Error::UndefinedValuation)
    }

    /// Lower bound on the support of the true value: `v_min` when terms
    /// are known, the guarantee for a jet with no known terms, and `None`
    /// (no support at all) for the exact zero.
    pub fn lower_bound(&self) -> Option<Exponent> {
        self.terms
            .first()
            .map(|(g, _)| g.clone())
            .or_else(|| self.guarantee.clone())
    }

    pub fn checked_add(&self, other: &Series) -> Result<Series> {
        let shift = join_shift(self.shift, other.shift)?;
        let guarantee = min_bound(self.guarantee.as_ref(), other.guarantee.as_ref());
        let mut acc: BTreeMap<Exponent, Rational> = BTreeMap::new();
        for (g, q) in self.terms.iter().chain(other.terms.iter()) {
            *acc.entry(g.clone()).or_insert_with(Rational::zero) += q;
        }
        Ok(Series::assemble(acc, guarantee, shift))
    }

    pub fn checked_sub(&self, other: &Series) -> Result<Series> {
        self.checked_add(&other.negated())
    }

    pub fn negated(&self) -> Series {
        self.scaled(&-Rational::one())
    }

    /// Multiplies by a rational. Scaling by zero yields the exact zero.
    pub fn scaled(&self, q: &Rational) -> Series {
        if q.is_zero() {
            return Series::zero();
        }
        Series {
            terms: self.terms.iter().map(|(g, c)| (g.clone(), c * q)).collect(),
            guarantee: self.guarantee.clone(),
            shift: self.shift,
        }
    }

    /// Multiplies by `t^g`.
    pub fn shifted(&self, g: &Exponent) -> Result<Series> {
        let shift = join_shift(self.shift, g.shift())?;
        let mut s = Series {
            terms: self.terms.iter().map(|(e, c)| (e + g, c.clone())).collect(),
            guarantee: self.guarantee.as_ref().map(|w| w + g),
            shift,
        };
        s.refresh_shift();
        Ok(s)
    }

    pub fn checked_mul(&self, other: &Series) -> Result<Series> {
        let shift = join_shift(self.shift, other.shift)?;
        let guarantee = mul_guarantee(self, other);
        let mut acc: BTreeMap<Exponent, Rational> = BTreeMap::new();
        for (ga, ca) in &self.terms {
            for (gb, cb) in &other.terms {
                let g = ga + gb;
                if guarantee.as_ref().is_some_and(|w| &g >= w) {
                    break;
                }
                *acc.entry(g).or_insert_with(Rational::zero) += ca * cb;
            }
        }
        Ok(Series::assemble(acc, guarantee, shift))
    }

    pub fn pow(&self, n: u32) -> Result<Series> {
        if self.terms.len() > 1 && n > MAX_POLY_POWER {
            return Err(Error::Resource(format!(
                "power {n} of a {}-term series",
                self.terms.len()
            )));
        }
        let mut acc = Series::one();
        let mut base = self.clone();
        let mut k = n;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.checked_mul(&base)?;
            }
            k >>= 1;
            if k > 0 {
                base = base.checked_mul(&base)?;
            }
        }
        Ok(acc)
    }

    pub fn decompose(&self) -> Decomposition {
        let zero = Exponent::zero();
        let neg_guarantee = self.guarantee.clone().filter(|w| w <= &zero);
        let negative_part = Series::assemble(
            self.terms
                .iter()
                .filter(|(g, _)| g.sign() == Sign::Negative)
                .cloned()
                .collect(),
            neg_guarantee,
            self.shift,
        );
        let infinitesimal_part = Series::assemble(
            self.terms
                .iter()
                .filter(|(g, _)| g.sign() == Sign::Positive)
                .cloned()
                .collect(),
            self.guarantee.clone(),
            self.shift,
        );
        Decomposition {
            negative_part,
            constant_term: self.constant_term(),
            infinitesimal_part,
        }
    }

    /// Neumann-series inverse: `a = c·t^g·(1 + ε)` gives
    /// `c⁻¹ t^{-g} Σ_{k≤depth} (-ε)^k`.
    pub fn inv(&self, depth: usize) -> Result<Series> {
        let (g, c) = self.terms.first().ok_or(Error::DivisionByZero)?;
        let normalizer = Series::monomial(c.recip(), g.negated());
        let eps = self.checked_mul(&normalizer)?.checked_sub(&Series::one())?;
        let coeffs: Vec<Rational> = (0..=depth)
            .map(|k| {
                if k % 2 == 0 {
                    Rational::one()
                } else {
                    -Rational::one()
                }
            })
            .collect();
        power_sum(&eps, &coeffs)?.checked_mul(&normalizer)
    }

    /// True when both series have the same coefficient at every exponent
    /// strictly below `bound`.
    pub fn agrees_below(&self, other: &Series, bound: Option<&Exponent>) -> bool {
        let below = |g: &Exponent| bound.is_none_or(|w| g < w);
        let lhs: Vec<_> = self.terms.iter().filter(|(g, _)| below(g)).collect();
        let rhs: Vec<_> = other.terms.iter().filter(|(g, _)| below(g)).collect();
        lhs == rhs
    }

    /// Guarantee of the pair: the lesser of the two bounds.
    pub fn common_bound(&self, other: &Series) -> Option<Exponent> {
        min_bound(self.guarantee.as_ref(), other.guarantee.as_ref())
    }
}

/// `ω_ab = min(ω_a + L(b), ω_b + L(a))`, where `L` is a lower bound on
/// the true support. An exact zero factor makes the product exact.
fn mul_guarantee(a: &Series, b: &Series) -> Option<Exponent> {
    let la = a.lower_bound();
    let lb = b.lower_bound();
    let from_a = a.guarantee.as_ref().zip(lb.as_ref()).map(|(w, l)| w + l);
    let from_b = b.guarantee.as_ref().zip(la.as_ref()).map(|(w, l)| w + l);
    min_bound(from_a.as_ref(), from_b.as_ref())
}

/// `Σ_k coeffs[k]·ε^k` for infinitesimal `ε`, truncated at
/// `(depth+1)·L(ε)` where `depth = coeffs.len() - 1`.
pub(crate) fn power_sum(eps: &Series, coeffs: &[Rational]) -> Result<Series> {
    let c0 = coeffs.first().cloned().unwrap_or_else(Rational::zero);
    let Some(lower) = eps.lower_bound() else {
        return Ok(Series::constant(c0));
    };
    if lower.sign() != Sign::Positive {
        return Err(Error::Domain(format!(
            "power series argument is not infinitesimal (valuation {lower})"
        )));
    }
    let depth = coeffs.len().saturating_sub(1);
    let bound = lower.scaled(&Rational::from_integer((depth as i64 + 1).into()));
    let mut acc = Series::constant(c0).with_guarantee(bound.clone())?;
    let mut power = Series::one().with_guarantee(bound.clone())?;
    for c in coeffs.iter().skip(1) {
        power = power.checked_mul(eps)?.with_guarantee(bound.clone())?;
        if !c.is_zero() {
            acc = acc.checked_add(&power.scaled(c))?;
        }
    }
    Ok(acc)
}

pub fn s_add(a: &Series, b: &Series) -> Result<Series> {
    a.checked_add(b)
}

pub fn s_mul(a: &Series, b: &Series) -> Result<Series> {
    a.checked_mul(b)
}

pub fn v_min(a: &Series) -> Result<Exponent> {
    a.v_min()
}

pub fn decompose(y: &Series) -> Decomposition {
    y.decompose()
}

pub fn s_inv(a: &Series, depth: usize) -> Result<Series> {
    a.inv(depth)
}

impl fmt::Display for Series {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (g, q)) in self.terms.iter().enumerate() {
            let mag = q.abs();
            let body = if g.is_zero() {
                format!("{mag}")
            } else {
                format!("{mag}*t^{{{g}}}")
            };
            match (i, q.is_negative()) {
                (0, true) => write!(f, "-{body}")?,
                (0, false) => write!(f, "{body}")?,
                (_, true) => write!(f, " - {body}")?,
                (_, false) => write!(f, " + {body}")?,
            }
        }
        Ok(())
    }
}
