//! Seeded random inputs shared by the self-test suites and the tests.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::deriv::DerivationSpec;
use crate::exponents::{Exponent, IndexPoint, Sign};
use crate::rational::{int, rat, Rational};
use crate::series::Series;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// One spec per derivation mode, all sharing the index domain `0..=4`.
pub fn standard_specs() -> Vec<DerivationSpec> {
    [
        "case1:shift=1",
        "case2max:f=affine(1,0),phiM=10",
        "case2cof:f=affine(1,1),seq=powers2",
        "el:shift=1",
    ]
    .iter()
    .map(|s| s.parse().expect("built-in spec"))
    .collect()
}

/// Small nonzero rational, occasionally with denominator 2 or 3.
pub fn small_rational<R: Rng>(rng: &mut R) -> Rational {
    let n = *[-3i64, -2, -1, 1, 2, 3].choose(rng).unwrap();
    let d = *[1i64, 1, 1, 2, 3].choose(rng).unwrap();
    rat(n, d)
}

/// Atom-only exponent with up to `max_atoms` integer indices in `0..=4`.
pub fn atom_exponent<R: Rng>(rng: &mut R, max_atoms: usize) -> Exponent {
    let k = rng.gen_range(1..=max_atoms);
    let mut g = Exponent::zero();
    for _ in 0..k {
        let phi = IndexPoint::from(rng.gen_range(0..=4i64));
        g = &g + &Exponent::scaled_unit(small_rational(rng), phi);
    }
    g
}

pub fn positive_exponent<R: Rng>(rng: &mut R, max_atoms: usize) -> Exponent {
    loop {
        let g = atom_exponent(rng, max_atoms);
        match g.sign() {
            Sign::Positive => return g,
            Sign::Negative => return g.negated(),
            Sign::Zero => continue,
        }
    }
}

/// Exact finite series with up to `max_terms` terms, constants allowed.
pub fn exact_series<R: Rng>(rng: &mut R, max_terms: usize) -> Series {
    let k = rng.gen_range(1..=max_terms);
    let terms: Vec<(Exponent, Rational)> = (0..k)
        .map(|_| {
            let g = if rng.gen_bool(0.2) {
                Exponent::zero()
            } else {
                atom_exponent(rng, 2)
            };
            (g, small_rational(rng))
        })
        .collect();
    Series::from_terms(terms).expect("atom-only exponents share a mode")
}

/// Nonzero exact infinitesimal with up to `max_terms` terms.
pub fn infinitesimal<R: Rng>(rng: &mut R, max_terms: usize) -> Series {
    loop {
        let k = rng.gen_range(1..=max_terms);
        let terms: Vec<(Exponent, Rational)> = (0..k)
            .map(|_| (positive_exponent(rng, 2), small_rational(rng)))
            .collect();
        let s = Series::from_terms(terms).expect("atom-only exponents share a mode");
        if !s.is_zero() {
            return s;
        }
    }
}

/// Random `rows × cols` matrix with entries in `-3..=3`, mostly zeros
/// when `sparse`, sometimes with a row built from two others.
pub fn rational_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> Vec<Vec<Rational>> {
    let sparse = rng.gen_bool(0.5);
    let mut m: Vec<Vec<Rational>> = (0..rows)
        .map(|_| {
            (0..cols)
                .map(|_| {
                    if sparse && rng.gen_bool(0.6) {
                        int(0)
                    } else {
                        rat(rng.gen_range(-3..=3), rng.gen_range(1..=3))
                    }
                })
                .collect()
        })
        .collect();
    if rows >= 3 && rng.gen_bool(0.5) {
        let (a, b) = (rng.gen_range(0..rows), rng.gen_range(0..rows));
        let target = rng.gen_range(0..rows);
        let combo: Vec<Rational> = (0..cols).map(|j| &m[a][j] * int(2) - &m[b][j]).collect();
        m[target] = combo;
    }
    m
}
