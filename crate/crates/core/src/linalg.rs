//! Exact rank and right kernel of rational matrices by fraction-free
//! (Bareiss) elimination.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::rational::{normalize_integer_vector, Rational};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Reduction {
    pub rank: usize,
    /// Basis of the right kernel, each vector integral with gcd 1 and a
    /// positive first nonzero entry.
    pub kernel: Vec<Vec<BigInt>>,
}

fn integer_rows(rows: &[Vec<Rational>], ncols: usize) -> Vec<Vec<BigInt>> {
    rows.iter()
        .map(|row| {
            assert_eq!(row.len(), ncols, "ragged matrix");
            let lcm = row.iter().fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
            row.iter()
                .map(|q| (q * Rational::from_integer(lcm.clone())).to_integer())
                .collect()
        })
        .filter(|row: &Vec<BigInt>| row.iter().any(|x| !x.is_zero()))
        .collect()
}

/// Row echelon form with the pivot column of each nonzero row.
fn bareiss(mut a: Vec<Vec<BigInt>>, ncols: usize) -> (Vec<Vec<BigInt>>, Vec<usize>) {
    let mut prev = BigInt::one();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r == a.len() {
            break;
        }
        let Some(p) = (r..a.len()).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, p);
        let (head, tail) = a.split_at_mut(r + 1);
        let pivot_row = &head[r];
        let pivot = &pivot_row[c];
        tail.par_iter_mut().for_each(|row| {
            let factor = std::mem::take(&mut row[c]);
            for j in c + 1..ncols {
                let v = pivot * &row[j] - &factor * &pivot_row[j];
                row[j] = v / &prev;
            }
        });
        prev = a[r][c].clone();
        pivots.push(c);
        r += 1;
    }
    a.truncate(r);
    (a, pivots)
}

pub fn rank(rows: &[Vec<Rational>], ncols: usize) -> usize {
    bareiss(integer_rows(rows, ncols), ncols).1.len()
}

pub fn rank_and_kernel(rows: &[Vec<Rational>], ncols: usize) -> Reduction {
    let (echelon, pivots) = bareiss(integer_rows(rows, ncols), ncols);
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    let kernel = free
        .iter()
        .map(|&f| {
            let mut x = vec![Rational::zero(); ncols];
            x[f] = Rational::one();
            for (row, &p) in echelon.iter().zip(&pivots).rev() {
                let s: Rational = (p + 1..ncols)
                    .filter(|&k| !row[k].is_zero() && !x[k].is_zero())
                    .map(|k| Rational::from_integer(row[k].clone()) * &x[k])
                    .sum();
                x[p] = -s / Rational::from_integer(row[p].clone());
            }
            normalize_integer_vector(&x)
        })
        .collect();
    Reduction {
        rank: pivots.len(),
        kernel,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    fn m(rows: &[&[i64]]) -> Vec<Vec<Rational>> {
        rows.iter()
            .map(|r| r.iter().map(|&x| int(x)).collect())
            .collect()
    }

    fn annihilates(rows: &[Vec<Rational>], v: &[BigInt]) -> bool {
        rows.iter().all(|row| {
            row.iter()
                .zip(v)
                .map(|(a, b)| a * Rational::from_integer(b.clone()))
                .sum::<Rational>()
                .is_zero()
        })
    }

    #[test]
    fn full_rank() {
        let a = m(&[&[1, 0], &[0, 1]]);
        let r = rank_and_kernel(&a, 2);
        assert_eq!(r.rank, 2);
        assert!(r.kernel.is_empty());
    }

    #[test]
    fn single_dependency() {
        let a = m(&[&[1, 2]]);
        let r = rank_and_kernel(&a, 2);
        assert_eq!(r.rank, 1);
        assert_eq!(r.kernel, vec![vec![BigInt::from(2), BigInt::from(-1)]]);
    }

    #[test]
    fn zero_column() {
        let r = rank_and_kernel(&[], 1);
        assert_eq!(r.rank, 0);
        assert_eq!(r.kernel, vec![vec![BigInt::one()]]);
    }

    #[test]
    fn rational_entries_and_skipped_columns() {
        let a = vec![
            vec![rat(1, 2), int(1), int(0), rat(3, 4)],
            vec![int(1), int(2), int(1), int(0)],
            vec![rat(3, 2), int(3), int(1), rat(3, 4)],
        ];
        let r = rank_and_kernel(&a, 4);
        assert_eq!(r.rank, 2);
        assert_eq!(r.kernel.len(), 2);
        for v in &r.kernel {
            assert!(annihilates(&a, v));
        }
    }

    #[test]
    fn bareiss_divisions_are_exact() {
        let a = m(&[
            &[2, 3, 5, 7],
            &[11, 13, 17, 19],
            &[23, 29, 31, 37],
            &[41, 43, 47, 53],
        ]);
        assert_eq!(rank(&a, 4), 4);
    }

    mod props {
        use super::*;
        use crate::gen;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn rank_is_transpose_invariant_and_kernel_annihilates(
                seed in any::<u64>(), rows in 1usize..=8, cols in 1usize..=8
            ) {
                let mut rng = gen::rng(seed);
                let a = gen::rational_matrix(&mut rng, rows, cols);
                let red = rank_and_kernel(&a, cols);
                let transposed: Vec<Vec<Rational>> =
                    (0..cols).map(|j| a.iter().map(|r| r[j].clone()).collect()).collect();
                prop_assert_eq!(red.rank, rank(&transposed, rows));
                prop_assert_eq!(red.rank + red.kernel.len(), cols);
                for v in &red.kernel {
                    prop_assert!(annihilates(&a, v));
                    let first = v.iter().find(|x| !x.is_zero()).unwrap();
                    prop_assert!(first > &BigInt::zero());
                }
            }
        }
    }
}
