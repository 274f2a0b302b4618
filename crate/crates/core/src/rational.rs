//! Exact rational helpers shared across the engine.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type Rational = BigRational;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

/// Scales a rational vector to coprime integers with a positive first
/// nonzero entry. The zero vector stays zero.
pub fn normalize_integer_vector(v: &[Rational]) -> Vec<BigInt> {
    let lcm = v.iter().fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
    let mut ints: Vec<BigInt> = v
        .iter()
        .map(|q| (q * Rational::from_integer(lcm.clone())).to_integer())
        .collect();
    let gcd = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if gcd.is_zero() {
        return ints;
    }
    let flip = ints
        .iter()
        .find(|x| !x.is_zero())
        .map(|x| x.is_negative())
        .unwrap_or(false);
    for x in &mut ints {
        *x = &*x / &gcd;
        if flip {
            *x = -&*x;
        }
    }
    ints
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalization_is_coprime_and_leading_positive() {
        let v = vec![rat(-1, 2), rat(1, 3), Rational::zero()];
        let n = normalize_integer_vector(&v);
        assert_eq!(n, vec![BigInt::from(3), BigInt::from(-2), BigInt::zero()]);
        let z = normalize_integer_vector(&[Rational::zero(), Rational::zero()]);
        assert!(z.iter().all(Zero::is_zero));
    }

    #[test]
    fn factorials() {
        assert_eq!(factorial(0), BigInt::one());
        assert_eq!(factorial(6), BigInt::from(720));
    }
}
