//! Exact generalized power series over Hahn groups.
//!
//! The crate provides arithmetic in `ℚ((G))` for a Hahn group `G` over
//! rational index points, the valuation `v_min`, the split
//! `K = A ⊕ C ⊕ M_v`, exp/log as partial sums with sound accuracy bounds,
//! several explicit series derivations, and a checker that decides the
//! ℚ-linear independence hypothesis behind Ax-style transcendence bounds
//! and emits a certificate.

pub mod deriv;
pub mod error;
pub mod exponents;
pub mod frontend;
pub mod gen;
pub mod linalg;
pub mod oracle;
pub mod rational;
pub mod schanuel;
pub mod selftest;
pub mod series;
pub mod translog;

pub use deriv::{d_monomial, d_series, CofinalSeq, DerivationSpec, Embedding};
pub use error::{Error, Result};
pub use exponents::{tail_unfold, Exponent, IndexPoint, ShiftMap, Sign};
pub use frontend::{evaluate, parse, print, run_cli, EvalContext, Expr, ParseError};
pub use linalg::{rank_and_kernel, Reduction};
pub use oracle::{find_relation, RelationOutcome, RelationReport};

pub use rational::Rational;

pub use schanuel::{
    check_corollary, qlin_rank, shift_by_co_a, verify_lemma2, Certificate, Lemma2Verdict, Outcome,
};
pub use series::{Decomposition, Series};
pub use translog::{s_exp, s_log};
