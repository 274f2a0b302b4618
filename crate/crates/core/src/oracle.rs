//! Bounded-degree search for polynomial relations over ℚ among series.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::rank_and_kernel;
use crate::rational::Rational;
use crate::schanuel::{coefficient_matrix, serialize_witness};
use crate::series::Series;

pub const DEFAULT_MONOMIAL_CAP: usize = 5000;

#[derive(Clone, Debug, PartialEq)]
pub enum RelationOutcome {
    /// Exact inputs; the combination multiplies out to the zero series.
    Verified {
        coeffs: Vec<BigInt>,
    },
    /// The combination vanishes below `valid_below` only.
    Candidate {
        coeffs: Vec<BigInt>,
        valid_below: crate::exponents::Exponent,
    },
    NoneFound {
        trusted_constraints: usize,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct RelationReport {
    pub degree_bound: u32,
    pub monomial_count: usize,
    /// Exponent tuples of the monomial basis, in graded-lex order.
    pub monomials: Vec<Vec<u32>>,
    pub outcome: RelationOutcome,
}

/// All exponent tuples of length `n` with total degree at most `d`:
/// ascending degree, lexicographically descending within a degree.
pub fn monomial_basis(n: usize, d: u32) -> Vec<Vec<u32>> {
    fn fill(prefix: &mut Vec<u32>, left: u32, slots: usize, out: &mut Vec<Vec<u32>>) {
        if slots == 1 {
            prefix.push(left);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for e in (0..=left).rev() {
            prefix.push(e);
            fill(prefix, left - e, slots - 1, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    for deg in 0..=d {
        fill(&mut Vec::with_capacity(n), deg, n, &mut out);
    }
    out
}

/// `C(n+d, d)`, saturating.
pub fn monomial_count(n: usize, d: u32) -> usize {
    let mut acc: u128 = 1;
    for k in 1..=d as u128 {
        acc = acc.saturating_mul(n as u128 + k) / k;
        if acc > usize::MAX as u128 {
            return usize::MAX;
        }
    }
    acc as usize
}

pub fn monomial_name(exps: &[u32]) -> String {
    let factors: Vec<String> = exps
        .iter()
        .enumerate()
        .filter(|(_, &e)| e > 0)
        .map(|(j, &e)| match e {
            1 => format!("w{}", j + 1),
            _ => format!("w{}^{e}", j + 1),
        })
        .collect();
    if factors.is_empty() {
        "1".into()
    } else {
        factors.join("*")
    }
}

/// Renders `Σ c_k m_k` as e.g. `w2 - w1^2`.
pub fn relation_string(coeffs: &[BigInt], monomials: &[Vec<u32>]) -> String {
    let mut out = String::new();
    for (c, m) in coeffs.iter().zip(monomials) {
        if c.is_zero() {
            continue;
        }
        let name = monomial_name(m);
        let mag = c.abs();
        let body = match (mag.is_one(), name.as_str()) {
            (true, "1") => "1".to_string(),
            (true, _) => name,
            (false, "1") => mag.to_string(),
            (false, _) => format!("{mag}*{name}"),
        };
        match (out.is_empty(), c.is_negative()) {
            (true, false) => out.push_str(&body),
            (true, true) => out.push_str(&format!("-{body}")),
            (false, false) => out.push_str(&format!(" + {body}")),
            (false, true) => out.push_str(&format!(" - {body}")),
        }
    }
    if out.is_empty() {
        "0".into()
    } else {
        out
    }
}

fn expand(ws: &[Series], monomials: &[Vec<u32>], degree: u32) -> Result<Vec<Series>> {
    let powers: Vec<Vec<Series>> = ws
        .iter()
        .map(|w| {
            let mut p = vec![Series::one()];
            for k in 1..=degree as usize {
                let next = p[k - 1].checked_mul(w)?;
                p.push(next);
            }
            Ok(p)
        })
        .collect::<Result<_>>()?;
    monomials
        .par_iter()
        .map(|m| {
            m.iter()
                .enumerate()
                .try_fold(Series::one(), |acc, (j, &e)| {
                    acc.checked_mul(&powers[j][e as usize])
                })
        })
        .collect()
}

pub fn find_relation(ws: &[Series], degree: u32, cap: usize) -> Result<RelationReport> {
    if ws.is_empty() {
        return Err(Error::Usage("no series given".into()));
    }
    if degree == 0 {
        return Err(Error::Usage("degree bound must be at least 1".into()));
    }
    let count = monomial_count(ws.len(), degree);
    if count > cap {
        return Err(Error::Resource(format!(
            "{count} monomials of degree <= {degree} in {} series exceed the cap {cap}",
            ws.len()
        )));
    }
    let monomials = monomial_basis(ws.len(), degree);
    let columns = expand(ws, &monomials, degree)?;
    let matrix = coefficient_matrix(&columns)?;
    let red = rank_and_kernel(&matrix.rows, columns.len());
    let outcome = match red.kernel.into_iter().next() {
        None => RelationOutcome::NoneFound {
            trusted_constraints: matrix.rows.len(),
        },
        Some(coeffs) => match matrix.trusted_region {
            Some(valid_below) => RelationOutcome::Candidate {
                coeffs,
                valid_below,
            },
            None => {
                let mut combo = Series::zero();
                for (c, col) in coeffs.iter().zip(&columns) {
                    combo = combo.checked_add(&col.scaled(&Rational::from_integer(c.clone())))?;
                }
                if !combo.is_zero() || !combo.is_exact() {
                    return Err(Error::Domain(format!(
                        "relation failed the re-multiplication check: {combo}"
                    )));
                }
                RelationOutcome::Verified { coeffs }
            }
        },
    };
    Ok(RelationReport {
        degree_bound: degree,
        monomial_count: monomials.len(),
        monomials,
        outcome,
    })
}

#[derive(Serialize)]
struct ReportJson {
    degree_bound: u32,
    monomial_count: usize,
    monomials: Vec<String>,
    outcome: &'static str,
    #[serde(serialize_with = "serialize_witness")]
    coefficients: Option<Vec<BigInt>>,
    relation: Option<String>,
    valid_below: Option<String>,
    trusted_constraints: Option<usize>,
}

impl RelationReport {
    pub fn coefficients(&self) -> Option<&[BigInt]> {
        match &self.outcome {
            RelationOutcome::Verified { coeffs } | RelationOutcome::Candidate { coeffs, .. } => {
                Some(coeffs)
            }
            RelationOutcome::NoneFound { .. } => None,
        }
    }

    pub fn relation(&self) -> Option<String> {
        self.coefficients()
            .map(|c| relation_string(c, &self.monomials))
    }

    pub fn to_json(&self) -> String {
        let (outcome, valid_below, trusted_constraints) = match &self.outcome {
            RelationOutcome::Verified { .. } => ("verified", None, None),
            RelationOutcome::Candidate { valid_below, .. } => {
                ("candidate", Some(valid_below.to_string()), None)
            }
            RelationOutcome::NoneFound {
                trusted_constraints,
            } => ("noneFound", None, Some(*trusted_constraints)),
        };
        let json = ReportJson {
            degree_bound: self.degree_bound,
            monomial_count: self.monomial_count,
            monomials: self.monomials.iter().map(|m| monomial_name(m)).collect(),
            outcome,
            coefficients: self.coefficients().map(<[BigInt]>::to_vec),
            relation: self.relation(),
            valid_below,
            trusted_constraints,
        };
        serde_json::to_string_pretty(&json).expect("report serializes")
    }
}
