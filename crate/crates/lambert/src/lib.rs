//! Exact-arithmetic Lambert series factorization toolkit.
//!
//! A Lambert series sum_{n>=1} a_n q^n/(1-q^n) enumerates divisor sums:
//! its q^n coefficient is sum_{d|n} a_d. This crate builds the
//! lower-triangular matrix factorizations that rewrite such series as
//! 1/(q;q)_inf times a matrix-weighted ordinary power series, together
//! with their exact rational inverses:
//!
//! - the base sequence s_{n,k} = [q^n] (q;q)_inf q^k/(1-q^k),
//! - Hadamard-product factorizations and their closed-form inverses,
//! - higher-order derivative factorizations (with the t=1 closed form),
//! - convolution factorizations of products of two Lambert series,
//! - the coefficient-reconstruction matrix C_{n,k}.
//!
//! Everything is computed in exact `BigRational` arithmetic, and every
//! identity can be replayed against an independent truncated q-series
//! oracle ([`qseries`]). Downstream consequences (exotic sums for
//! classical multiplicative functions, zeta series, the 2^omega
//! identity, classical partition recurrences) live in [`applications`].

pub mod applications;
pub mod arith;
pub mod derivatives;
pub mod error;
pub mod factorization;
pub mod qseries;
pub mod registry;
pub mod verify;

pub use error::Error;

/// Exact rational scalar used for every matrix entry and series coefficient.
/// `BigRational` keeps lowest terms and a positive denominator internally.
pub type Rat = num::BigRational;
/// Arbitrary-precision integer.
pub type Int = num::BigInt;

pub(crate) fn rat_int(v: i64) -> Rat {
    Rat::from_integer(Int::from(v))
}
