//! The Hahn group `G` over an index set of rationals.
//!
//! An [`Exponent`] is a finite rational combination of basis elements
//! `1_φ` ("atoms") and, when a [`ShiftMap`] `σ` is in play, tail elements
//! `tail(φ) = 1_{σ(φ)} + 1_{σ²(φ)} + …`. Reading off the coefficient of
//! every basis point gives a function `c: Φ → ℚ` that is a finite spike
//! pattern plus, on each residue class of `σ`, an eventually constant
//! step. The order is lexicographic: the sign of `g` is the sign of `c`
//! at the least point of its support, so `1_0 > 1_1 > 0`.
//!
//! Every value is kept in a canonical form (no zero coefficients, at most
//! one tail per residue class, placed as late as possible), which makes
//! structural and semantic equality coincide.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::Rational;

/// A point of the index set `Φ ⊆ ℚ`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct IndexPoint(Rational);

impl IndexPoint {
    pub fn new(value: Rational) -> Self {
        IndexPoint(value)
    }

    pub fn value(&self) -> &Rational {
        &self.0
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    fn offset_by(&self, step: &Rational) -> IndexPoint {
        IndexPoint(&self.0 + step)
    }
}

impl From<i64> for IndexPoint {
    fn from(v: i64) -> Self {
        IndexPoint(Rational::from_integer(BigInt::from(v)))
    }
}

impl fmt::Display for IndexPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Right shift `σ(φ) = φ + offset`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ShiftMap {
    offset: u32,
}

impl ShiftMap {
    pub fn new(offset: u32) -> Result<Self> {
        if offset == 0 {
            return Err(Error::Configuration(
                "shift offset must be at least 1".into(),
            ));
        }
        Ok(ShiftMap { offset })
    }

    pub fn offset(&self) -> u32 {
        self.offset
    }

    pub fn apply(&self, phi: &IndexPoint) -> IndexPoint {
        phi.offset_by(&self.step())
    }

    fn step(&self) -> Rational {
        Rational::from_integer(BigInt::from(self.offset))
    }

    fn class_of(&self, phi: &IndexPoint) -> BigInt {
        phi.0.numer().mod_floor(&BigInt::from(self.offset))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sign {
    Negative,
    Zero,
    Positive,
}

impl Sign {
    fn of(q: &Rational) -> Sign {
        if q.is_positive() {
            Sign::Positive
        } else if q.is_negative() {
            Sign::Negative
        } else {
            Sign::Zero
        }
    }

    fn as_ordering(self) -> Ordering {
        match self {
            Sign::Negative => Ordering::Less,
            Sign::Zero => Ordering::Equal,
            Sign::Positive => Ordering::Greater,
        }
    }
}

/// Joins the shift modes of two values; tail-free values fit any mode.
pub(crate) fn join_shift(a: Option<ShiftMap>, b: Option<ShiftMap>) -> Result<Option<ShiftMap>> {
    match (a, b) {
        (Some(x), Some(y)) if x != y => Err(Error::ModeMismatch(format!(
            "tail elements built over shifts +{} and +{}",
            x.offset, y.offset
        ))),
        (Some(x), _) | (_, Some(x)) => Ok(Some(x)),
        (None, None) => Ok(None),
    }
}

/// Element of the Hahn group. See the module docs for the representation.
#[derive(Clone, Debug, Default)]
pub struct Exponent {
    atoms: BTreeMap<IndexPoint, Rational>,
    tails: BTreeMap<IndexPoint, Rational>,
    shift: Option<ShiftMap>,
}

impl Exponent {
    pub fn zero() -> Self {
        Exponent::default()
    }

    /// The basis element `1_φ`.
    pub fn unit(phi: impl Into<IndexPoint>) -> Self {
        Exponent::scaled_unit(Rational::one(), phi)
    }

    pub fn scaled_unit(q: Rational, phi: impl Into<IndexPoint>) -> Self {
        let mut atoms = BTreeMap::new();
        if !q.is_zero() {
            atoms.insert(phi.into(), q);
        }
        Exponent {
            atoms,
            tails: BTreeMap::new(),
            shift: None,
        }
    }

    /// `tail(φ) = Σ_{n≥1} 1_{σⁿ(φ)}`; `φ` must be an integer.
    pub fn tail(phi: impl Into<IndexPoint>, shift: ShiftMap) -> Result<Self> {
        let phi = phi.into();
        let mut tails = BTreeMap::new();
        tails.insert(phi, Rational::one());
        Exponent::from_parts(BTreeMap::new(), tails, Some(shift))
    }

    /// Builds an exponent from raw coefficient maps and brings it to
    /// canonical form.
    pub fn from_parts(
        atoms: BTreeMap<IndexPoint, Rational>,
        tails: BTreeMap<IndexPoint, Rational>,
        shift: Option<ShiftMap>,
    ) -> Result<Self> {
        let has_tails = tails.values().any(|q| !q.is_zero());
        if has_tails {
            if shift.is_none() {
                return Err(Error::Configuration(
                    "tail elements need a shift map".into(),
                ));
            }
            if let Some((p, _)) = tails.iter().find(|(p, _)| !p.is_integer()) {
                return Err(Error::Domain(format!("tail index {p} is not an integer")));
            }
        }
        let mut e = Exponent {
            atoms,
            tails,
            shift: if has_tails { shift } else { None },
        };
        e.normalize();
        Ok(e)
    }

    pub fn atoms(&self) -> &BTreeMap<IndexPoint, Rational> {
        &self.atoms
    }

    pub fn tails(&self) -> &BTreeMap<IndexPoint, Rational> {
        &self.tails
    }

    /// The shift this value depends on, `None` when tail-free.
    pub fn shift(&self) -> Option<ShiftMap> {
        self.shift
    }

    pub fn is_zero(&self) -> bool {
        self.atoms.is_empty() && self.tails.is_empty()
    }

    pub fn is_tail_free(&self) -> bool {
        self.tails.is_empty()
    }

    /// Coefficient of `1_θ` once every tail is expanded.
    pub fn coefficient_at(&self, theta: &IndexPoint) -> Rational {
        let mut c = self
            .atoms
            .get(theta)
            .cloned()
            .unwrap_or_else(Rational::zero);
        if let Some(shift) = self.shift {
            let step = shift.step();
            for (psi, q) in &self.tails {
                if psi < theta {
                    let n = (&theta.0 - &psi.0) / &step;
                    if n.is_integer() {
                        c += q;
                    }
                }
            }
        }
        c
    }

    /// Least point of the support and the coefficient there.
    pub fn leading(&self) -> Option<(IndexPoint, Rational)> {
        let atom = self
            .atoms
            .iter()
            .next()
            .map(|(p, q)| (p.clone(), q.clone()));
        let tail = self.shift.and_then(|shift| {
            self.tails
                .iter()
                .map(|(p, q)| (shift.apply(p), q.clone()))
                .min_by(|a, b| a.0.cmp(&b.0))
        });
        match (atom, tail) {
            (Some(a), Some(t)) => Some(if a.0 < t.0 { a } else { t }),
            (a, t) => a.or(t),
        }
    }

    pub fn sign(&self) -> Sign {
        self.leading()
            .map(|(_, q)| Sign::of(&q))
            .unwrap_or(Sign::Zero)
    }

    pub fn checked_add(&self, other: &Exponent) -> Result<Exponent> {
        let shift = join_shift(self.shift, other.shift)?;
        let mut atoms = self.atoms.clone();
        for (p, q) in &other.atoms {
            *atoms.entry(p.clone()).or_insert_with(Rational::zero) += q;
        }
        let mut tails = self.tails.clone();
        for (p, q) in &other.tails {
            *tails.entry(p.clone()).or_insert_with(Rational::zero) += q;
        }
        let mut e = Exponent {
            atoms,
            tails,
            shift,
        };
        e.normalize();
        Ok(e)
    }

    pub fn checked_sub(&self, other: &Exponent) -> Result<Exponent> {
        self.checked_add(&other.negated())
    }

    pub fn negated(&self) -> Exponent {
        self.scaled(&-Rational::one())
    }

    pub fn scaled(&self, q: &Rational) -> Exponent {
        if q.is_zero() {
            return Exponent::zero();
        }
        Exponent {
            atoms: self.atoms.iter().map(|(p, c)| (p.clone(), c * q)).collect(),
            tails: self.tails.iter().map(|(p, c)| (p.clone(), c * q)).collect(),
            shift: self.shift,
        }
    }

    pub fn checked_cmp(&self, other: &Exponent) -> Result<Ordering> {
        if self.tails.is_empty() && other.tails.is_empty() {
            return Ok(cmp_tail_free(self, other));
        }
        Ok(self.checked_sub(other)?.sign().as_ordering())
    }

    /// Rewrites into canonical form. On each residue class of the shift
    /// the coefficient function only changes at atom/tail points and one
    /// step after them, so evaluating there is enough to find the point
    /// `θ*` after which it stays at the class total.
    fn normalize(&mut self) {
        self.atoms.retain(|_, q| !q.is_zero());
        self.tails.retain(|_, q| !q.is_zero());
        let Some(shift) = self.shift else {
            return;
        };
        if self.tails.is_empty() {
            self.shift = None;
            return;
        }
        let step = shift.step();
        let mut classes: BTreeMap<BigInt, Vec<(IndexPoint, Rational)>> = BTreeMap::new();
        for (p, q) in std::mem::take(&mut self.tails) {
            classes.entry(shift.class_of(&p)).or_default().push((p, q));
        }
        for (class, tails) in classes {
            let class_atoms: Vec<IndexPoint> = self
                .atoms
                .keys()
                .filter(|p| p.is_integer() && shift.class_of(p) == class)
                .cloned()
                .collect();
            let mut local_atoms = BTreeMap::new();
            for p in class_atoms {
                let q = self.atoms.remove(&p).expect("key collected above");
                local_atoms.insert(p, q);
            }
            let mut candidates = BTreeSet::new();
            for p in local_atoms.keys().chain(tails.iter().map(|(p, _)| p)) {
                candidates.insert(p.clone());
                candidates.insert(p.offset_by(&step));
            }
            // tails arrive sorted from the BTreeMap walk
            let mut values = Vec::with_capacity(candidates.len());
            let mut cum = Rational::zero();
            let mut next_tail = 0;
            for k in candidates {
                while next_tail < tails.len() && tails[next_tail].0 < k {
                    cum += &tails[next_tail].1;
                    next_tail += 1;
                }
                let v = local_atoms
                    .get(&k)
                    .map(|a| a + &cum)
                    .unwrap_or_else(|| cum.clone());
                values.push((k, v));
            }
            let total: Rational = tails.iter().map(|(_, q)| q.clone()).sum();
            let mut cut = values.len() - 1;
            while cut > 0 && values[cut - 1].1 == total {
                cut -= 1;
            }
            for j in 0..cut {
                let (k, v) = &values[j];
                if v.is_zero() {
                    continue;
                }
                let mut p = k.clone();
                while p < values[j + 1].0 {
                    self.atoms.insert(p.clone(), v.clone());
                    p = p.offset_by(&step);
                }
            }
            if !total.is_zero() {
                let anchor = IndexPoint(&values[cut].0 .0 - &step);
                self.tails.insert(anchor, total);
            }
        }
        if self.tails.is_empty() {
            self.shift = None;
        }
    }
}

fn cmp_tail_free(a: &Exponent, b: &Exponent) -> Ordering {
    let mut ia = a.atoms.iter().peekable();
    let mut ib = b.atoms.iter().peekable();
    loop {
        match (ia.peek(), ib.peek()) {
            (None, None) => return Ordering::Equal,
            (Some((_, va)), None) => return Sign::of(va).as_ordering(),
            (None, Some((_, vb))) => return Sign::of(vb).as_ordering().reverse(),
            (Some((ka, va)), Some((kb, vb))) => match ka.cmp(kb) {
                Ordering::Less => return Sign::of(va).as_ordering(),
                Ordering::Greater => return Sign::of(vb).as_ordering().reverse(),
                Ordering::Equal => {
                    if va != vb {
                        return va.cmp(vb);
                    }
                    ia.next();
                    ib.next();
                }
            },
        }
    }
}

/// `tail(φ) = 1_{σ(φ)} + tail(σ(φ))`, returned as the pair of summands.
pub fn tail_unfold(phi: &IndexPoint, shift: ShiftMap) -> Result<(Exponent, Exponent)> {
    if !phi.is_integer() {
        return Err(Error::Domain(format!("tail index {phi} is not an integer")));
    }
    let next = shift.apply(phi);
    Ok((Exponent::unit(next.clone()), Exponent::tail(next, shift)?))
}

impl PartialEq for Exponent {
    fn eq(&self, other: &Self) -> bool {
        matches!(self.checked_cmp(other), Ok(Ordering::Equal))
    }
}

impl Eq for Exponent {}

impl PartialOrd for Exponent {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Panics when both sides carry tails over different shifts; series
/// operations check modes before comparing.
impl Ord for Exponent {
    fn cmp(&self, other: &Self) -> Ordering {
        self.checked_cmp(other)
            .expect("compared exponents built over different shifts")
    }
}

impl Add for &Exponent {
    type Output = Exponent;
    fn add(self, rhs: &Exponent) -> Exponent {
        self.checked_add(rhs)
            .expect("added exponents built over different shifts")
    }
}

impl Sub for &Exponent {
    type Output = Exponent;
    fn sub(self, rhs: &Exponent) -> Exponent {
        self.checked_sub(rhs)
            .expect("subtracted exponents built over different shifts")
    }
}

impl Neg for &Exponent {
    type Output = Exponent;
    fn neg(self) -> Exponent {
        self.negated()
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut entries: Vec<(&IndexPoint, u8, &Rational)> = self
            .atoms
            .iter()
            .map(|(p, q)| (p, 0u8, q))
            .chain(self.tails.iter().map(|(p, q)| (p, 1u8, q)))
            .collect();
        entries.sort_by(|a, b| a.0.cmp(b.0).then(a.1.cmp(&b.1)));
        for (i, (p, kind, q)) in entries.into_iter().enumerate() {
            let name = if kind == 0 { "e" } else { "tau" };
            let mag = q.abs();
            match (i, q.is_negative()) {
                (0, true) => write!(f, "-{mag}*{name}({p})")?,
                (0, false) => write!(f, "{mag}*{name}({p})")?,
                (_, true) => write!(f, " - {mag}*{name}({p})")?,
                (_, false) => write!(f, " + {mag}*{name}({p})")?,
            }
        }
        Ok(())
    }
}
