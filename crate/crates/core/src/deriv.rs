//! Series derivations defined on the basis monomials `t^{1_φ}` and
//! extended by the strong Leibniz rule
//! `D(t^g) = Σ_φ g_φ · t^g · D(t^{1_φ})/t^{1_φ}` and strong linearity.
//!
//! Each construction is determined by its logarithmic derivative on the
//! basis, `D(t^{1_φ})/t^{1_φ} = t^{h(φ)}`:
//!
//! | mode           | `h(φ)`                                   |
//! |----------------|------------------------------------------|
//! | `Case1`        | `-1_{σ(φ)}`                              |
//! | `Case2Max`     | `f(φ)·1_{φ_M}`                           |
//! | `Case2Cofinal` | `f(φ)·1_{φ_{n+1}}`, `φ ∈ [φ_n, φ_{n+1})` |
//! | `El`           | `-tail(φ)`                               |

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::exponents::{Exponent, IndexPoint, ShiftMap};
use crate::rational::Rational;
use crate::series::Series;

/// Order-preserving embedding `f: Φ → ℚ`.
#[derive(Clone, Debug, PartialEq)]
pub enum Embedding {
    /// `f(φ) = slope·φ + intercept`, `slope > 0`.
    Affine {
        slope: Rational,
        intercept: Rational,
    },
    /// Finite table; lookups outside it are configuration errors.
    Table(BTreeMap<IndexPoint, Rational>),
}

impl Embedding {
    pub fn eval(&self, phi: &IndexPoint) -> Result<Rational> {
        match self {
            Embedding::Affine { slope, intercept } => Ok(slope * phi.value() + intercept),
            Embedding::Table(table) => table.get(phi).cloned().ok_or_else(|| {
                Error::Configuration(format!("index {phi} is outside the embedding table"))
            }),
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            Embedding::Affine { slope, .. } if !slope.is_positive() => Err(Error::Configuration(
                format!("affine embedding slope {slope} is not positive"),
            )),
            Embedding::Table(table) => {
                let values: Vec<&Rational> = table.values().collect();
                if values.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(Error::Configuration(
                        "embedding table is not strictly increasing".into(),
                    ));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

/// Strictly increasing cofinal sequence `φ_0 < φ_1 < …`. Its intervals
/// `[φ_n, φ_{n+1})` partition `[φ_0, ∞)`, the index domain of the mode.
#[derive(Clone, Debug, PartialEq)]
pub enum CofinalSeq {
    /// `0, 1, 2, 4, 8, …`
    Powers2,
    /// `0, 1, 2, 3, …`
    Naturals,
    /// `start + n·step`, `step > 0`.
    Arithmetic { start: Rational, step: Rational },
}

impl CofinalSeq {
    pub fn term(&self, n: u64) -> Rational {
        match self {
            CofinalSeq::Powers2 if n == 0 => Rational::zero(),
            CofinalSeq::Powers2 => Rational::from_integer(BigInt::one() << (n - 1)),
            CofinalSeq::Naturals => Rational::from_integer(BigInt::from(n)),
            CofinalSeq::Arithmetic { start, step } => {
                start + step * Rational::from_integer(BigInt::from(n))
            }
        }
    }

    /// `φ_{n+1}` for the unique `n` with `φ_n ≤ φ < φ_{n+1}`.
    pub fn interval_end(&self, phi: &IndexPoint) -> Result<IndexPoint> {
        let x = phi.value();
        if x < &self.term(0) {
            return Err(Error::Configuration(format!(
                "index {phi} lies below the first cofinal point {}",
                self.term(0)
            )));
        }
        // exponential search for an upper end, then bisect the prefix
        let mut hi: u64 = 1;
        while &self.term(hi) <= x {
            hi = hi.checked_mul(2).ok_or_else(|| {
                Error::Resource(format!("cofinal sequence search overflowed at {phi}"))
            })?;
        }
        let mut lo = 0u64;
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if &self.term(mid) <= x {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(IndexPoint::new(self.term(hi)))
    }

    fn validate(&self) -> Result<()> {
        match self {
            CofinalSeq::Arithmetic { step, .. } if !step.is_positive() => Err(
                Error::Configuration(format!("arithmetic sequence step {step} is not positive")),
            ),
            _ => Ok(()),
        }
    }
}

pub const DEFAULT_TAIL_TERMS: usize = 8;

#[derive(Clone, Debug, PartialEq)]
pub enum DerivationSpec {
    Case1 {
        shift: ShiftMap,
    },
    Case2Max {
        f: Embedding,
        phi_max: IndexPoint,
    },
    Case2Cofinal {
        f: Embedding,
        seq: CofinalSeq,
    },
    /// `tail_terms` bounds how many terms of `D(t^g)` are produced when
    /// `g` itself carries tails and the expansion is infinite.
    El {
        shift: ShiftMap,
        tail_terms: usize,
    },
}

impl DerivationSpec {
    pub fn case1(offset: u32) -> Result<Self> {
        Ok(DerivationSpec::Case1 {
            shift: ShiftMap::new(offset)?,
        })
    }

    pub fn el(offset: u32) -> Result<Self> {
        Ok(DerivationSpec::El {
            shift: ShiftMap::new(offset)?,
            tail_terms: DEFAULT_TAIL_TERMS,
        })
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            DerivationSpec::Case1 { .. } => Ok(()),
            DerivationSpec::Case2Max { f, .. } => f.validate(),
            DerivationSpec::Case2Cofinal { f, seq } => {
                f.validate()?;
                seq.validate()
            }
            DerivationSpec::El { tail_terms, .. } if *tail_terms == 0 => Err(Error::Configuration(
                "EL tail expansion needs at least one term".into(),
            )),
            DerivationSpec::El { .. } => Ok(()),
        }
    }

    /// The shift of a shift-based mode, if any.
    pub fn shift(&self) -> Option<ShiftMap> {
        match self {
            DerivationSpec::Case1 { shift } | DerivationSpec::El { shift, .. } => Some(*shift),
            _ => None,
        }
    }

    pub fn el_shift(&self) -> Option<ShiftMap> {
        match self {
            DerivationSpec::El { shift, .. } => Some(*shift),
            _ => None,
        }
    }

    pub fn with_tail_terms(self, n: usize) -> Self {
        match self {
            DerivationSpec::El { shift, .. } => DerivationSpec::El {
                shift,
                tail_terms: n.max(1),
            },
            other => other,
        }
    }

    /// Exponent of the logarithmic derivative of `t^{1_φ}`.
    pub fn log_derivative_exponent(&self, phi: &IndexPoint) -> Result<Exponent> {
        match self {
            DerivationSpec::Case1 { shift } => {
                require_integer(phi)?;
                Ok(Exponent::unit(shift.apply(phi)).negated())
            }
            DerivationSpec::Case2Max { f, phi_max } => {
                if phi > phi_max {
                    return Err(Error::Configuration(format!(
                        "index {phi} exceeds the greatest element {phi_max}"
                    )));
                }
                Ok(Exponent::scaled_unit(f.eval(phi)?, phi_max.clone()))
            }
            DerivationSpec::Case2Cofinal { f, seq } => {
                let fp = f.eval(phi)?;
                if !fp.is_positive() {
                    return Err(Error::Configuration(format!(
                        "embedding value f({phi}) = {fp} is not positive"
                    )));
                }
                Ok(Exponent::scaled_unit(fp, seq.interval_end(phi)?))
            }
            DerivationSpec::El { shift, .. } => {
                require_integer(phi)?;
                Ok(Exponent::tail(phi.clone(), *shift)?.negated())
            }
        }
    }

    /// Lower bound on the support of `D(δ)` for any `δ` supported at or
    /// above `ω`. The leading index and coefficient of `g + h(φ_0(g))`
    /// are those of `g`, which makes `g ↦ v_min(D t^g)` monotone; the
    /// only exception is `Case2Max` at multiples of `1_{φ_M}`.
    pub fn jet_bound(&self, omega: &Exponent) -> Result<Exponent> {
        let Some((lead, _)) = omega.leading() else {
            return Ok(match self {
                DerivationSpec::Case2Max { f, phi_max } => {
                    let top = Exponent::scaled_unit(f.eval(phi_max)?, phi_max.clone());
                    std::cmp::min(top, Exponent::zero())
                }
                _ => Exponent::zero(),
            });
        };
        match self {
            DerivationSpec::Case2Cofinal { .. } => Ok(omega.clone()),
            _ => omega.checked_add(&self.log_derivative_exponent(&lead)?),
        }
    }
}

fn require_integer(phi: &IndexPoint) -> Result<()> {
    if phi.is_integer() {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "index {phi} is not an integer; shift-based derivations act on integer indices"
        )))
    }
}

/// `D(t^g) = Σ_φ g_φ t^{g + h(φ)}`.
pub fn d_monomial(spec: &DerivationSpec, g: &Exponent) -> Result<Series> {
    spec.validate()?;
    if g.is_zero() {
        return Ok(Series::zero());
    }
    if let DerivationSpec::El { shift, tail_terms } = spec {
        if !g.is_tail_free() {
            return d_tail_monomial(g, *shift, *tail_terms);
        }
    } else if !g.is_tail_free() {
        return Err(Error::Domain(format!(
            "t^{{{g}}} has tail components, which only the EL derivation handles"
        )));
    }
    let mut terms = Vec::with_capacity(g.atoms().len());
    for (phi, q) in g.atoms() {
        let h = spec.log_derivative_exponent(phi)?;
        terms.push((g.checked_add(&h)?, q.clone()));
    }
    Series::from_terms(terms)
}

/// EL derivative of a monomial whose exponent has infinite support: the
/// terms `c(θ)·t^{g - tail(θ)}` increase with `θ`, so a prefix of the
/// support yields a jet bounded by the first omitted point.
fn d_tail_monomial(g: &Exponent, shift: ShiftMap, tail_terms: usize) -> Result<Series> {
    let step = Rational::from_integer(BigInt::from(shift.offset()));
    let horizon = g
        .tails()
        .keys()
        .map(|psi| psi.value() + &step * Rational::from_integer(BigInt::from(tail_terms + 1)))
        .min()
        .expect("caller checked tails are present");
    let mut points: BTreeMap<IndexPoint, Rational> = BTreeMap::new();
    for (phi, q) in g.atoms() {
        if phi.value() < &horizon {
            points.insert(phi.clone(), q.clone());
        }
    }
    for psi in g.tails().keys() {
        let mut theta = shift.apply(psi);
        while theta.value() < &horizon {
            let c = g.coefficient_at(&theta);
            if !c.is_zero() {
                points.insert(theta.clone(), c);
            }
            theta = shift.apply(&theta);
        }
    }
    let mut terms = Vec::with_capacity(points.len());
    for (theta, c) in points {
        require_integer(&theta)?;
        terms.push((g.checked_sub(&Exponent::tail(theta, shift)?)?, c));
    }
    let first_omitted = IndexPoint::new(horizon);
    let bound = g.checked_sub(&Exponent::tail(first_omitted, shift)?)?;
    Series::from_terms(terms)?.with_guarantee(bound)
}

/// Strong linearity: `D(Σ a_g t^g) = Σ a_g D(t^g)`. For a jet the result
/// is trusted below [`DerivationSpec::jet_bound`] of the input bound.
pub fn d_series(spec: &DerivationSpec, a: &Series) -> Result<Series> {
    let mut acc = Series::zero();
    for (g, c) in a.terms() {
        acc = acc.checked_add(&d_monomial(spec, g)?.scaled(c))?;
    }
    match a.guarantee() {
        Some(w) => acc.with_guarantee(spec.jet_bound(w)?),
        None => Ok(acc),
    }
}

fn split_top_level(s: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0usize;
    let mut start = 0;
    for (i, ch) in s.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth = depth.saturating_sub(1),
            ',' if depth == 0 => {
                out.push(s[start..i].trim());
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(s[start..].trim());
    out
}

fn parse_rational(s: &str) -> Result<Rational> {
    Rational::from_str(s.trim())
        .map_err(|_| Error::Usage(format!("expected a rational number, found `{s}`")))
}

fn call_args<'a>(s: &'a str, name: &str) -> Option<Vec<&'a str>> {
    let inner = s
        .strip_prefix(name)?
        .trim()
        .strip_prefix('(')?
        .strip_suffix(')')?;
    Some(split_top_level(inner))
}

impl FromStr for Embedding {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(args) = call_args(s, "affine") {
            if args.len() != 2 {
                return Err(Error::Usage(format!("affine takes two arguments: `{s}`")));
            }
            return Ok(Embedding::Affine {
                slope: parse_rational(args[0])?,
                intercept: parse_rational(args[1])?,
            });
        }
        if let Some(args) = call_args(s, "table") {
            let mut table = BTreeMap::new();
            for entry in args.into_iter().filter(|a| !a.is_empty()) {
                let (k, v) = entry.split_once(':').ok_or_else(|| {
                    Error::Usage(format!("table entry `{entry}` is not `index:value`"))
                })?;
                table.insert(IndexPoint::new(parse_rational(k)?), parse_rational(v)?);
            }
            return Ok(Embedding::Table(table));
        }
        Err(Error::Usage(format!(
            "unknown embedding `{s}` (expected affine(q,r) or table(i:v,...))"
        )))
    }
}

impl FromStr for CofinalSeq {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "powers2" => Ok(CofinalSeq::Powers2),
            "naturals" => Ok(CofinalSeq::Naturals),
            _ => match call_args(s, "arith") {
                Some(args) if args.len() == 2 => Ok(CofinalSeq::Arithmetic {
                    start: parse_rational(args[0])?,
                    step: parse_rational(args[1])?,
                }),
                _ => Err(Error::Usage(format!(
                    "unknown sequence `{s}` (expected powers2, naturals or arith(start,step))"
                ))),
            },
        }
    }
}

/// Parses `case1:shift=1`, `case2max:f=affine(1,0),phiM=10`,
/// `case2cof:f=affine(1,1),seq=powers2` and `el:shift=1[,terms=8]`.
impl FromStr for DerivationSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (mode, rest) = s
            .split_once(':')
            .ok_or_else(|| Error::Usage(format!("derivation spec `{s}` has no `mode:` prefix")))?;
        let mut params = BTreeMap::new();
        for kv in split_top_level(rest)
            .into_iter()
            .filter(|kv| !kv.is_empty())
        {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::Usage(format!("spec parameter `{kv}` is not `key=value`")))?;
            params.insert(k.trim().to_string(), v.trim().to_string());
        }
        let take = |params: &mut BTreeMap<String, String>, key: &str| {
            params
                .remove(key)
                .ok_or_else(|| Error::Usage(format!("spec `{s}` is missing `{key}=`")))
        };
        let shift_of = |v: String| -> Result<ShiftMap> {
            let n: u32 = v
                .parse()
                .map_err(|_| Error::Usage(format!("shift `{v}` is not a positive integer")))?;
            ShiftMap::new(n)
        };
        let spec = match mode.trim() {
            "case1" => DerivationSpec::Case1 {
                shift: shift_of(take(&mut params, "shift")?)?,
            },
            "case2max" => DerivationSpec::Case2Max {
                f: take(&mut params, "f")?.parse()?,
                phi_max: IndexPoint::new(parse_rational(&take(&mut params, "phiM")?)?),
            },
            "case2cof" => DerivationSpec::Case2Cofinal {
                f: take(&mut params, "f")?.parse()?,
                seq: take(&mut params, "seq")?.parse()?,
            },
            "el" => {
                let shift = shift_of(take(&mut params, "shift")?)?;
                let tail_terms = match params.remove("terms") {
                    Some(v) => v
                        .parse()
                        .map_err(|_| Error::Usage(format!("terms `{v}` is not a count")))?,
                    None => DEFAULT_TAIL_TERMS,
                };
                DerivationSpec::El { shift, tail_terms }
            }
            other => {
                return Err(Error::Usage(format!(
                    "unknown derivation mode `{other}` (expected case1, case2max, case2cof, el)"
                )))
            }
        };
        if let Some(k) = params.keys().next() {
            return Err(Error::Usage(format!("unexpected spec parameter `{k}`")));
        }
        spec.validate()?;
        Ok(spec)
    }
}

impl fmt::Display for Embedding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Embedding::Affine { slope, intercept } => write!(f, "affine({slope},{intercept})"),
            Embedding::Table(t) => {
                let entries: Vec<String> = t.iter().map(|(k, v)| format!("{k}:{v}")).collect();
                write!(f, "table({})", entries.join(","))
            }
        }
    }
}

impl fmt::Display for CofinalSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CofinalSeq::Powers2 => write!(f, "powers2"),
            CofinalSeq::Naturals => write!(f, "naturals"),
            CofinalSeq::Arithmetic { start, step } => write!(f, "arith({start},{step})"),
        }
    }
}

impl fmt::Display for DerivationSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DerivationSpec::Case1 { shift } => write!(f, "case1:shift={}", shift.offset()),
            DerivationSpec::Case2Max { f: emb, phi_max } => {
                write!(f, "case2max:f={emb},phiM={phi_max}")
            }
            DerivationSpec::Case2Cofinal { f: emb, seq } => write!(f, "case2cof:f={emb},seq={seq}"),
            DerivationSpec::El { shift, tail_terms } if *tail_terms == DEFAULT_TAIL_TERMS => {
                write!(f, "el:shift={}", shift.offset())
            }
            DerivationSpec::El { shift, tail_terms } => {
                write!(f, "el:shift={},terms={tail_terms}", shift.offset())
            }
        }
    }
}
