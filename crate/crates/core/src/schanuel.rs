//! The ℚ-linear independence hypothesis for Ax-type transcendence bounds:
//! if `y_i - co_A(y_i)` are ℚ-linearly independent then
//! `td C(y_1..y_n, exp(y_1)..exp(y_n)) ≥ n+1`. The checker decides the
//! hypothesis exactly and emits a [`Certificate`].

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::exponents::{join_shift, Exponent};
use crate::linalg::{rank_and_kernel, Reduction};
use crate::rational::Rational;
use crate::series::Series;

/// `y - co_A(y)`: the series without its constant term.
pub fn shift_by_co_a(y: &Series) -> Series {
    let d = y.decompose();
    d.negative_part
        .checked_add(&d.infinitesimal_part)
        .expect("parts of one series share a mode")
}

/// Exact coefficient matrix of a family of series: one row per exponent
/// in the union of supports below the trusted region, one column per
/// series.
#[derive(Clone, Debug)]
pub struct CoefficientMatrix {
    pub rows: Vec<Vec<Rational>>,
    pub exponents: Vec<Exponent>,
    pub trusted_region: Option<Exponent>,
}

pub fn coefficient_matrix(columns: &[Series]) -> Result<CoefficientMatrix> {
    let mut shift = None;
    for s in columns {
        shift = join_shift(shift, s.shift())?;
    }
    let trusted_region = columns.iter().filter_map(Series::guarantee).min().cloned();
    let exponents: Vec<Exponent> = columns
        .iter()
        .flat_map(|s| s.terms().iter().map(|(g, _)| g.clone()))
        .filter(|g| trusted_region.as_ref().is_none_or(|w| g < w))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let rows = exponents
        .iter()
        .map(|g| columns.iter().map(|s| s.coeff(g)).collect())
        .collect();
    Ok(CoefficientMatrix {
        rows,
        exponents,
        trusted_region,
    })
}

/// Rank of the family over ℚ on its trusted coefficients, with a
/// normalized basis of the relations among the columns.
pub fn qlin_rank(vectors: &[Series]) -> Result<Reduction> {
    if vectors.is_empty() {
        return Err(Error::Usage("rank of an empty family".into()));
    }
    let m = coefficient_matrix(vectors)?;
    Ok(rank_and_kernel(&m.rows, vectors.len()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Certified,
    Dependent,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Certificate {
    pub inputs: Vec<String>,
    pub shifted_inputs: Vec<String>,
    pub rank: usize,
    pub outcome: Outcome,
    #[serde(serialize_with = "serialize_witness")]
    pub witness: Option<Vec<BigInt>>,
    pub conclusion: Option<String>,
    pub trusted_region: Option<String>,
    pub reason: Option<String>,
}

/// Integers that fit in `i64` are JSON numbers, larger ones strings.
pub(crate) fn serialize_witness<S: Serializer>(
    w: &Option<Vec<BigInt>>,
    ser: S,
) -> std::result::Result<S::Ok, S::Error> {
    #[derive(Serialize)]
    #[serde(untagged)]
    enum Entry {
        Small(i64),
        Big(String),
    }
    w.as_ref()
        .map(|v| {
            v.iter()
                .map(|x| {
                    x.to_i64()
                        .map_or_else(|| Entry::Big(x.to_string()), Entry::Small)
                })
                .collect::<Vec<_>>()
        })
        .serialize(ser)
}

impl Certificate {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serializes")
    }
}

pub fn check_corollary(ys: &[Series]) -> Result<Certificate> {
    if ys.is_empty() {
        return Err(Error::Usage("no series to check".into()));
    }
    let n = ys.len();
    let shifted: Vec<Series> = ys.iter().map(shift_by_co_a).collect();
    let matrix = coefficient_matrix(&shifted)?;
    let red = rank_and_kernel(&matrix.rows, n);
    let exact = ys.iter().all(Series::is_exact);
    let region = matrix.trusted_region.as_ref().map(|w| w.to_string());
    let (outcome, witness, conclusion, reason) = if red.rank == n {
        (
            Outcome::Certified,
            None,
            Some(format!("td >= {}", n + 1)),
            None,
        )
    } else if exact {
        (
            Outcome::Dependent,
            red.kernel.into_iter().next(),
            None,
            None,
        )
    } else {
        let bound = region.as_deref().unwrap_or("?");
        let reason = format!(
            "rank {} < {n} on coefficients below t^{{{bound}}}; a relation there may fail at higher order",
            red.rank
        );
        (Outcome::Inconclusive, None, None, Some(reason))
    };
    Ok(Certificate {
        inputs: ys.iter().map(ToString::to_string).collect(),
        shifted_inputs: shifted.iter().map(ToString::to_string).collect(),
        rank: red.rank,
        outcome,
        witness,
        conclusion,
        trusted_region: region,
        reason,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Lemma2Verdict {
    /// `Σ m_i y_i` is a constant.
    pub premise: bool,
    /// `Σ m_i (y_i - co_A(y_i)) = 0`.
    pub conclusion: bool,
}

impl Lemma2Verdict {
    pub fn holds(&self) -> bool {
        !self.premise || self.conclusion
    }

    pub fn vacuous(&self) -> bool {
        !self.premise
    }
}

/// For jets both sides are read below the guarantee of the combination,
/// and the premise additionally needs that guarantee to be positive.
pub fn verify_lemma2(ys: &[Series], m: &[Rational]) -> Result<Lemma2Verdict> {
    if ys.len() != m.len() {
        return Err(Error::Usage(format!(
            "{} series but {} multipliers",
            ys.len(),
            m.len()
        )));
    }
    let mut sum = Series::zero();
    let mut shifted_sum = Series::zero();
    for (y, q) in ys.iter().zip(m) {
        if q.is_zero() {
            continue;
        }
        sum = sum.checked_add(&y.scaled(q))?;
        shifted_sum = shifted_sum.checked_add(&shift_by_co_a(y).scaled(q))?;
    }
    let d = sum.decompose();
    let constant_known = sum
        .guarantee()
        .is_none_or(|w| w.sign() == crate::exponents::Sign::Positive);
    let premise = d.negative_part.is_zero() && d.infinitesimal_part.is_zero() && constant_known;
    Ok(Lemma2Verdict {
        premise,
        conclusion: shifted_sum.is_zero(),
    })
}
