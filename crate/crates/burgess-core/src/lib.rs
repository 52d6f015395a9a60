//! A computational laboratory for multi-dimensional Burgess-method
//! character sums.
//!
//! The crate evaluates every finite object in the pipeline that turns short
//! mixed character sums into Vinogradov-system counts: Dirichlet characters
//! of prescribed order, admissible forms, complete multiplicative and
//! additive box sums with their exact product identity, solution counts of
//! translation-dilation invariant systems, stratification tallies, and the
//! closed-form exponent calculus of the resulting bounds.
//!
//! Polynomial arithmetic is generic over the coefficient scalar (see
//! [`coeff::Coeff`]); the three rings in play are fixed here as aliases.

pub mod charsum;
pub mod coeff;
pub mod error;
pub mod exponents;
pub mod ff;
pub mod poly;
pub(crate) mod util;
pub mod vinogradov;

pub use error::{Error, Result};

use num_bigint::BigInt;

/// Polynomials with integer coefficients (the forms `F`).
pub type IntPoly = poly::MultiPoly<BigInt>;
/// Polynomials with real coefficients (the additive phases `g`).
pub type RealPoly = poly::MultiPoly<f64>;
/// Polynomials over a prime field (reductions mod `q`).
pub type ModPoly = poly::MultiPoly<coeff::Fq>;
/// Exact rational scalars used throughout the exponent calculus.
pub type Rational = num_rational::BigRational;
