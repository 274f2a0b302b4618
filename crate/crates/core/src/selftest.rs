//! Randomized invariant suites behind the `selftest` command.

use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::deriv::{d_series, DerivationSpec};
use crate::exponents::{Exponent, IndexPoint, ShiftMap};
use crate::frontend::{parse, print, Basis, ExponentSyntax, Expr, ExprKind, Func, Span};
use crate::gen;
use crate::linalg::rank_and_kernel;
use crate::oracle::{find_relation, monomial_basis, RelationOutcome, DEFAULT_MONOMIAL_CAP};
use crate::rational::{int, rat, Rational};
use crate::schanuel::verify_lemma2;
use crate::series::Series;
use crate::translog::{log_monomial, s_exp, s_log};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SuiteResult {
    pub name: &'static str,
    pub passed: usize,
    pub failed: usize,
    pub first_failure: Option<String>,
}

#[derive(Clone, Debug)]
pub struct SelftestReport {
    pub suites: Vec<SuiteResult>,
    pub elapsed: Duration,
}

impl SelftestReport {
    pub fn passed(&self) -> usize {
        self.suites.iter().map(|s| s.passed).sum()
    }

    pub fn failed(&self) -> usize {
        self.suites.iter().map(|s| s.failed).sum()
    }
}

type Check = std::result::Result<(), String>;

fn run_suite(
    name: &'static str,
    cases: usize,
    rng: &mut ChaCha8Rng,
    mut case: impl FnMut(&mut ChaCha8Rng) -> Check,
) -> SuiteResult {
    let mut r = SuiteResult {
        name,
        passed: 0,
        failed: 0,
        first_failure: None,
    };
    for _ in 0..cases {
        match case(rng) {
            Ok(()) => r.passed += 1,
            Err(msg) => {
                r.failed += 1;
                r.first_failure.get_or_insert(msg);
            }
        }
    }
    r
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Check {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

pub fn leibniz_case(spec: &DerivationSpec, a: &Series, b: &Series) -> Check {
    let lhs = d_series(spec, &a.checked_mul(b).map_err(err)?).map_err(err)?;
    let rhs = a
        .checked_mul(&d_series(spec, b).map_err(err)?)
        .and_then(|x| x.checked_add(&b.checked_mul(&d_series(spec, a)?)?))
        .map_err(err)?;
    ensure(lhs == rhs, || {
        format!("{spec}: D(ab) != aDb + bDa for a = {a}, b = {b}")
    })
}

pub fn exp_compat_case(spec: &DerivationSpec, eps: &Series, depth: usize) -> Check {
    let ex = s_exp(eps, depth).map_err(err)?;
    let lhs = d_series(spec, &ex).map_err(err)?;
    let rhs = d_series(spec, eps)
        .and_then(|d| d.checked_mul(&ex))
        .map_err(err)?;
    let bound = lhs.common_bound(&rhs);
    ensure(lhs.agrees_below(&rhs, bound.as_ref()), || {
        format!("{spec}: D exp(ε) != Dε·exp(ε) for ε = {eps}")
    })
}

fn leibniz(rng: &mut ChaCha8Rng, per_spec: usize) -> SuiteResult {
    let specs = gen::standard_specs();
    run_suite("leibniz", per_spec * specs.len(), rng, {
        let mut i = 0;
        move |rng| {
            let spec = &specs[i % specs.len()];
            i += 1;
            leibniz_case(spec, &gen::exact_series(rng, 3), &gen::exact_series(rng, 3))
        }
    })
}

fn exp_compat(rng: &mut ChaCha8Rng, per_spec: usize) -> SuiteResult {
    let specs = gen::standard_specs();
    run_suite("exp-derivation", per_spec * specs.len(), rng, {
        let mut i = 0;
        move |rng| {
            let spec = &specs[i % specs.len()];
            i += 1;
            exp_compat_case(spec, &gen::infinitesimal(rng, 3), 8)
        }
    })
}

fn homomorphism(rng: &mut ChaCha8Rng, cases: usize) -> SuiteResult {
    run_suite("exp-homomorphism", cases, rng, |rng| {
        let x = gen::infinitesimal(rng, 3);
        let y = gen::infinitesimal(rng, 3);
        let lhs = x.checked_add(&y).and_then(|s| s_exp(&s, 8)).map_err(err)?;
        let rhs = s_exp(&x, 8)
            .and_then(|a| a.checked_mul(&s_exp(&y, 8)?))
            .map_err(err)?;
        let bound = lhs.common_bound(&rhs);
        ensure(lhs.agrees_below(&rhs, bound.as_ref()), || {
            format!("exp(x+y) != exp(x)exp(y) for x = {x}, y = {y}")
        })
    })
}

fn round_trips(rng: &mut ChaCha8Rng, cases: usize) -> SuiteResult {
    run_suite("log-exp-round-trip", cases, rng, |rng| {
        let eps = gen::infinitesimal(rng, 3);
        let back = s_exp(&eps, 8)
            .and_then(|e| s_log(&e, 8, None))
            .map_err(err)?;
        ensure(back.agrees_below(&eps, back.guarantee()), || {
            format!("log(exp(ε)) != ε for ε = {eps}")
        })?;
        let one_plus = Series::one().checked_add(&eps).map_err(err)?;
        let back = s_log(&one_plus, 8, None)
            .and_then(|l| s_exp(&l, 8))
            .map_err(err)?;
        ensure(back.agrees_below(&one_plus, back.guarantee()), || {
            format!("exp(log(1+ε)) != 1+ε for ε = {eps}")
        })
    })
}

fn el_exactness(rng: &mut ChaCha8Rng, cases: usize) -> SuiteResult {
    run_suite("el-log-derivative", cases, rng, |rng| {
        let offset = rng.gen_range(1..=3);
        let spec = DerivationSpec::el(offset).map_err(err)?;
        let shift = ShiftMap::new(offset).map_err(err)?;
        let g = gen::atom_exponent(rng, 3);
        let a = Series::monomial(Rational::one(), g.clone());
        let lhs = log_monomial(&g, shift)
            .and_then(|l| d_series(&spec, &l))
            .map_err(err)?;
        let rhs = d_series(&spec, &a)
            .and_then(|d| d.checked_mul(&a.inv(1)?))
            .map_err(err)?;
        ensure(lhs == rhs && lhs.is_exact(), || {
            format!("D(log t^g) != D(t^g)/t^g for g = {g}, offset {offset}")
        })?;
        let phi = IndexPoint::from(rng.gen_range(-10..=10i64));
        let tail = Exponent::tail(phi.clone(), shift).map_err(err)?;
        let next = shift.apply(&phi);
        let unfolded = Exponent::unit(next.clone())
            .checked_add(&Exponent::tail(next, shift).map_err(err)?)
            .map_err(err)?;
        ensure(tail == unfolded, || {
            format!("tail identity fails at {phi}, offset {offset}")
        })
    })
}

fn lemma2(rng: &mut ChaCha8Rng, cases: usize) -> SuiteResult {
    run_suite("lemma2", cases, rng, |rng| {
        let (ys, m) = engineered_family(rng);
        let v = verify_lemma2(&ys, &m).map_err(err)?;
        ensure(v.premise && v.conclusion, || {
            format!("lemma 2 verdict {v:?} for an engineered family")
        })
    })
}

/// Family `y_1..y_n` with multipliers `m`, `m_n ≠ 0`, such that
/// `Σ m_i y_i` is a random constant.
pub fn engineered_family(rng: &mut ChaCha8Rng) -> (Vec<Series>, Vec<Rational>) {
    let n = rng.gen_range(1..=4);
    let mut ys: Vec<Series> = (0..n - 1).map(|_| gen::exact_series(rng, 4)).collect();
    let mut m: Vec<Rational> = (0..n - 1)
        .map(|_| {
            if rng.gen_bool(0.2) {
                Rational::zero()
            } else {
                gen::small_rational(rng)
            }
        })
        .collect();
    let last = gen::small_rational(rng);
    let c = if rng.gen_bool(0.2) {
        Rational::zero()
    } else {
        gen::small_rational(rng)
    };
    let mut rest = Series::constant(c);
    for (y, q) in ys.iter().zip(&m) {
        rest = rest.checked_sub(&y.scaled(q)).expect("atom-only family");
    }
    ys.push(rest.scaled(&last.recip()));
    m.push(last);
    (ys, m)
}

fn guarantee_soundness(rng: &mut ChaCha8Rng, cases: usize) -> SuiteResult {
    run_suite("guarantee-soundness", cases, rng, |rng| {
        let eps = gen::infinitesimal(rng, 3);
        let one_plus = Series::one().checked_add(&eps).map_err(err)?;
        let a = gen::exact_series(rng, 3);
        type Op = fn(&Series, usize) -> crate::Result<Series>;
        let ops: [(&str, &Series, Op); 4] = [
            ("exp", &eps, |s, d| s_exp(s, d)),
            ("log", &one_plus, |s, d| s_log(s, d, None)),
            ("inv", &one_plus, |s, d| s.inv(d)),
            ("inv", &a, |s, d| s.inv(d)),
        ];
        for (name, x, op) in ops {
            let shallow = op(x, 6).map_err(err)?;
            let deep = op(x, 10).map_err(err)?;
            ensure(deep.agrees_below(&shallow, shallow.guarantee()), || {
                format!("{name}({x}) at depth 10 changes coefficients below the depth-6 bound")
            })?;
        }
        Ok(())
    })
}

fn naive_rank(rows: &[Vec<Rational>], ncols: usize) -> usize {
    let mut m: Vec<Vec<Rational>> = rows.to_vec();
    let mut rank = 0;
    for c in 0..ncols {
        let Some(p) = (rank..m.len()).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(rank, p);
        let pivot_row = m[rank].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i != rank && !row[c].is_zero() {
                let f = &row[c] / &pivot_row[c];
                for (x, p) in row.iter_mut().zip(&pivot_row).take(ncols).skip(c) {
                    *x -= p * &f;
                }
            }
        }
        rank += 1;
    }
    rank
}

fn rank_suite(rng: &mut ChaCha8Rng, cases: usize) -> SuiteResult {
    run_suite("rank", cases, rng, |rng| {
        let rows = rng.gen_range(1..=8);
        let cols = rng.gen_range(1..=8);
        let m = gen::rational_matrix(rng, rows, cols);
        let red = rank_and_kernel(&m, cols);
        let expected = naive_rank(&m, cols);
        ensure(red.rank == expected, || {
            format!("rank {} != elimination rank {expected}", red.rank)
        })?;
        ensure(red.kernel.len() + red.rank == cols, || {
            "kernel dimension".into()
        })?;
        for v in &red.kernel {
            for row in &m {
                let s: Rational = row
                    .iter()
                    .zip(v)
                    .map(|(a, b)| a * Rational::from_integer(b.clone()))
                    .sum();
                ensure(s.is_zero(), || "kernel vector does not annihilate".into())?;
            }
        }
        Ok(())
    })
}

/// Short series over exponents `q·1_φ`, `φ ∈ {0, 1}`, so products share
/// many exponents.
pub fn small_series(rng: &mut ChaCha8Rng) -> Series {
    loop {
        let k = rng.gen_range(1..=2);
        let terms: Vec<(Exponent, Rational)> = (0..k)
            .map(|_| {
                let g = Exponent::scaled_unit(int(rng.gen_range(-2..=2)), rng.gen_range(0..=1i64));
                (g, int(*[-2i64, -1, 1, 2].choose(rng).unwrap()))
            })
            .collect();
        let s = Series::from_terms(terms).expect("atom-only");
        if !s.is_zero() {
            return s;
        }
    }
}

/// `w_1..w_{n-1}` random and `w_n = Q(w_1..w_{n-1})` for a random `Q` of
/// degree at most `d`.
pub fn planted_family(rng: &mut ChaCha8Rng) -> (Vec<Series>, u32) {
    let n = rng.gen_range(2..=4);
    let d = rng.gen_range(1..=3u32);
    let mut ws: Vec<Series> = (0..n - 1).map(|_| small_series(rng)).collect();
    let basis = monomial_basis(n - 1, d);
    let mut q = Series::zero();
    for _ in 0..rng.gen_range(1..=2) {
        let mono = basis.choose(rng).unwrap();
        let mut term = Series::constant(int(rng.gen_range(1..=3)));
        for (w, &e) in ws.iter().zip(mono) {
            term = term
                .checked_mul(&w.pow(e).expect("small power"))
                .expect("atom-only");
        }
        q = q.checked_add(&term).expect("atom-only");
    }
    ws.push(q);
    (ws, d)
}

/// `Σ c_k Π w_j^{e_kj}`, recomputed without the oracle's expansion.
pub fn apply_relation(
    ws: &[Series],
    basis: &[Vec<u32>],
    coeffs: &[BigInt],
) -> crate::Result<Series> {
    let mut acc = Series::zero();
    for (mono, c) in basis.iter().zip(coeffs) {
        if c.is_zero() {
            continue;
        }
        let mut term = Series::constant(Rational::from_integer(c.clone()));
        for (w, &e) in ws.iter().zip(mono) {
            for _ in 0..e {
                term = term.checked_mul(w)?;
            }
        }
        acc = acc.checked_add(&term)?;
    }
    Ok(acc)
}

fn planted_relations(rng: &mut ChaCha8Rng, cases: usize) -> SuiteResult {
    run_suite("planted-relations", cases, rng, |rng| {
        let (ws, d) = planted_family(rng);
        let r = find_relation(&ws, d, DEFAULT_MONOMIAL_CAP).map_err(err)?;
        let RelationOutcome::Verified { coeffs } = &r.outcome else {
            return Err(format!("no verified relation at degree {d} among {ws:?}"));
        };
        let combo = apply_relation(&ws, &r.monomials, coeffs).map_err(err)?;
        ensure(combo.is_zero() && combo.is_exact(), || {
            format!(
                "relation {} does not vanish",
                r.relation().unwrap_or_default()
            )
        })
    })
}

fn random_exponent_syntax(rng: &mut ChaCha8Rng) -> ExponentSyntax {
    let mut x = ExponentSyntax::zero();
    for _ in 0..rng.gen_range(0..=3) {
        let basis = if rng.gen_bool(0.25) {
            Basis::Tau
        } else {
            Basis::E
        };
        let index = if basis == Basis::E && rng.gen_bool(0.2) {
            rat(rng.gen_range(-5..=5), rng.gen_range(1..=3))
        } else {
            int(rng.gen_range(-3..=3))
        };
        x.add(gen::small_rational(rng), IndexPoint::new(index), basis);
    }
    x
}

/// Random tree of the shape the parser produces: literals are
/// non-negative, signs come from `Neg`.
pub fn random_expr(rng: &mut ChaCha8Rng, depth: u32) -> Expr {
    let leaf = depth == 0 || rng.gen_bool(0.3);
    let b = |e: Expr| Box::new(e);
    let kind = if leaf {
        if rng.gen_bool(0.5) {
            ExprKind::Rat(rat(rng.gen_range(0..=9), rng.gen_range(1..=4)))
        } else {
            ExprKind::Mono(random_exponent_syntax(rng))
        }
    } else {
        match rng.gen_range(0..8) {
            0 => ExprKind::Neg(b(random_expr(rng, depth - 1))),
            1 => ExprKind::Add(
                b(random_expr(rng, depth - 1)),
                b(random_expr(rng, depth - 1)),
            ),
            2 => ExprKind::Sub(
                b(random_expr(rng, depth - 1)),
                b(random_expr(rng, depth - 1)),
            ),
            3 => ExprKind::Mul(
                b(random_expr(rng, depth - 1)),
                b(random_expr(rng, depth - 1)),
            ),
            4 => ExprKind::Div(
                b(random_expr(rng, depth - 1)),
                b(random_expr(rng, depth - 1)),
            ),
            5 => ExprKind::Pow(b(random_expr(rng, depth - 1)), rng.gen_range(-3..=3)),
            _ => {
                let f = *[Func::Exp, Func::Log, Func::Inv, Func::D]
                    .choose(rng)
                    .unwrap();
                ExprKind::Apply(f, b(random_expr(rng, depth - 1)))
            }
        }
    };
    Expr::new(kind, Span::default())
}

fn parser_round_trip(rng: &mut ChaCha8Rng, cases: usize) -> SuiteResult {
    run_suite("parser-round-trip", cases, rng, |rng| {
        let e = random_expr(rng, 4);
        let text = print(&e);
        let back = parse(&text).map_err(|p| format!("`{text}`: {p}"))?;
        ensure(back == e, || {
            format!("`{text}` reparses to `{}`", print(&back))
        })
    })
}

pub fn run(seed: u64) -> SelftestReport {
    let start = Instant::now();
    let mut rng = gen::rng(seed);
    let suites = vec![
        leibniz(&mut rng, 200),
        exp_compat(&mut rng, 100),
        homomorphism(&mut rng, 100),
        round_trips(&mut rng, 100),
        el_exactness(&mut rng, 100),
        lemma2(&mut rng, 200),
        guarantee_soundness(&mut rng, 50),
        rank_suite(&mut rng, 100),
        planted_relations(&mut rng, 20),
        parser_round_trip(&mut rng, 200),
    ];
    SelftestReport {
        suites,
        elapsed: start.elapsed(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suites_pass_on_a_fixed_seed() {
        let report = run(7);
        for s in &report.suites {
            assert_eq!(s.failed, 0, "{}: {:?}", s.name, s.first_failure);
        }
        assert!(report.passed() > 1000);
    }
}
