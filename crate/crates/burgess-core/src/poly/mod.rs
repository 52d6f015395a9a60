//! Sparse multivariate polynomials with exponent-vector terms.
//!
//! A polynomial is a map from multi-indices to nonzero coefficients in a
//! [`Coeff`] ring. Terms are kept in a `BTreeMap` ordered lexicographically
//! on the exponent vector, which fixes the canonical printing order and
//! makes iteration deterministic.

mod admissible;
mod gcd;
mod parse;
mod system;

pub use admissible::{
    gl_matrices, invariant_under_direction, is_admissible, is_inadmissible_gl,
    product_polynomial, projective_directions, AdmissibilityMethod, AdmissibilityReport, Verdict,
};
pub use gcd::{multiplicity_decompose, multivariate_gcd, power_free_decompose};
pub use parse::parse_poly;
pub use system::{standard_rank, standard_weight, MonomialSystem, SystemKind, TdiCheck};

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::coeff::{Coeff, Fq};
use crate::ff::PrimeField;

/// A multi-index `beta`; the exponent vector of one monomial.
///
/// Ordering is lexicographic on the exponent vector.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
pub struct Monomial(pub Vec<u32>);

impl Monomial {
    pub fn constant(n: usize) -> Self {
        Monomial(vec![0; n])
    }

    pub fn unit(n: usize, var: usize) -> Self {
        let mut e = vec![0; n];
        e[var] = 1;
        Monomial(e)
    }

    pub fn arity(&self) -> usize {
        self.0.len()
    }

    /// Total degree `|beta|`.
    pub fn total_degree(&self) -> u64 {
        self.0.iter().map(|&e| e as u64).sum()
    }

    pub fn is_constant(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a + b)
                .collect(),
        )
    }

    /// Componentwise `other <= self`.
    pub fn divisible_by(&self, other: &Monomial) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a >= b)
    }

    pub fn div(&self, other: &Monomial) -> Monomial {
        debug_assert!(self.divisible_by(other));
        Monomial(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a - b)
                .collect(),
        )
    }

    /// `point^beta` as an exact integer; panics on (desk-scale absurd)
    /// overflow rather than wrapping.
    pub fn eval_int(&self, point: &[i64]) -> i128 {
        let mut acc: i128 = 1;
        for (&e, &x) in self.0.iter().zip(point) {
            for _ in 0..e {
                acc = acc
                    .checked_mul(x as i128)
                    .expect("moment value exceeds 128 bits");
            }
        }
        acc
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_constant() {
            return write!(f, "1");
        }
        let mut first = true;
        for (i, &e) in self.0.iter().enumerate() {
            if e == 0 {
                continue;
            }
            if !first {
                write!(f, "*")?;
            }
            first = false;
            if e == 1 {
                write!(f, "x{}", i + 1)?;
            } else {
                write!(f, "x{}^{}", i + 1, e)?;
            }
        }
        Ok(())
    }
}

/// A sparse multivariate polynomial over the coefficient ring `C`.
#[derive(Clone, PartialEq, Debug)]
pub struct MultiPoly<C> {
    n: usize,
    terms: BTreeMap<Monomial, C>,
}

impl<C: Coeff> MultiPoly<C> {
    pub fn zero(n: usize) -> Self {
        MultiPoly {
            n,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(n: usize, c: C) -> Self {
        let mut p = MultiPoly::zero(n);
        if !c.is_zero() {
            p.terms.insert(Monomial::constant(n), c);
        }
        p
    }

    pub fn one(n: usize) -> Self {
        MultiPoly::constant(n, C::one())
    }

    /// The monomial `c * x^beta`.
    pub fn monomial(n: usize, beta: Monomial, c: C) -> Self {
        assert_eq!(beta.arity(), n);
        let mut p = MultiPoly::zero(n);
        if !c.is_zero() {
            p.terms.insert(beta, c);
        }
        p
    }

    pub fn variable(n: usize, var: usize) -> Self {
        MultiPoly::monomial(n, Monomial::unit(n, var), C::one())
    }

    pub fn from_terms<I: IntoIterator<Item = (Monomial, C)>>(n: usize, terms: I) -> Self {
        let mut p = MultiPoly::zero(n);
        for (m, c) in terms {
            assert_eq!(m.arity(), n, "term arity mismatch");
            p.add_term(m, c);
        }
        p
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &C)> {
        self.terms.iter()
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty()
            || (self.terms.len() == 1 && self.terms.keys().next().unwrap().is_constant())
    }

    pub fn coefficient(&self, beta: &Monomial) -> Option<&C> {
        self.terms.get(beta)
    }

    /// Total degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u64> {
        self.terms.keys().map(|m| m.total_degree()).max()
    }

    /// Largest monomial in lexicographic order, with its coefficient.
    pub fn leading_term(&self) -> Option<(&Monomial, &C)> {
        self.terms.iter().next_back()
    }

    /// A coefficient to clone ring context from, if any term exists.
    pub fn prototype(&self) -> Option<&C> {
        self.terms.values().next()
    }

    pub fn add_term(&mut self, beta: Monomial, c: C) {
        if c.is_zero() {
            return;
        }
        match self.terms.remove(&beta) {
            None => {
                self.terms.insert(beta, c);
            }
            Some(old) => {
                let sum = old + c;
                if !sum.is_zero() {
                    self.terms.insert(beta, sum);
                }
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        let mut out = MultiPoly::zero(self.n);
        for (m, c) in &self.terms {
            out.terms.insert(m.clone(), -c.clone());
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        let mut out = MultiPoly::zero(self.n);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.add_term(ma.mul(mb), ca.clone() * cb.clone());
            }
        }
        out
    }

    pub fn scale(&self, c: &C) -> Self {
        let mut out = MultiPoly::zero(self.n);
        if c.is_zero() {
            return out;
        }
        for (m, v) in &self.terms {
            out.add_term(m.clone(), v.clone() * c.clone());
        }
        out
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = match self.prototype() {
            Some(p) => MultiPoly::constant(self.n, p.one_like()),
            None => MultiPoly::one(self.n),
        };
        let mut base = self.clone();
        let mut e = e;
        if e == 0 {
            return acc;
        }
        loop {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e == 0 {
                break;
            }
            base = base.mul(&base);
        }
        acc
    }

    /// Evaluate at a point of the coefficient ring.
    pub fn eval(&self, point: &[C]) -> C {
        assert_eq!(point.len(), self.n);
        let mut acc = C::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (i, &e) in m.0.iter().enumerate() {
                for _ in 0..e {
                    t = t * point[i].clone();
                }
            }
            acc = acc + t;
        }
        acc
    }

    /// Substitute `subs[i]` for variable `i`; the substituting polynomials
    /// may live in a different dimension.
    pub fn compose(&self, subs: &[MultiPoly<C>]) -> MultiPoly<C> {
        assert_eq!(subs.len(), self.n);
        let m = subs.first().map_or(self.n, |p| p.n);
        let mut out = MultiPoly::zero(m);
        for (mono, c) in &self.terms {
            let mut t = MultiPoly::constant(m, c.clone());
            for (i, &e) in mono.0.iter().enumerate() {
                if e > 0 {
                    t = t.mul(&subs[i].pow(e));
                }
            }
            out = out.add(&t);
        }
        out
    }

    /// Shift of the argument: `p(x_1 + a_1, ..., x_n + a_n)` by exact
    /// binomial expansion.
    pub fn shift(&self, offsets: &[C]) -> MultiPoly<C> {
        assert_eq!(offsets.len(), self.n);
        let mut out = MultiPoly::zero(self.n);
        for (mono, c) in &self.terms {
            // Expand prod_i (x_i + a_i)^{e_i} term by term.
            let mut partial: Vec<(Monomial, C)> = vec![(Monomial::constant(self.n), c.clone())];
            for (i, &e) in mono.0.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                if offsets[i].is_zero() {
                    for (m, _) in partial.iter_mut() {
                        m.0[i] += e;
                    }
                    continue;
                }
                let mut powers = Vec::with_capacity(e as usize + 1);
                powers.push(c.one_like());
                for _ in 0..e {
                    let last = powers.last().unwrap().clone();
                    powers.push(last * offsets[i].clone());
                }
                let mut next = Vec::with_capacity(partial.len() * (e as usize + 1));
                for (m, coef) in &partial {
                    for k in 0..=e {
                        let binom = binomial(e, k);
                        let mut mono2 = m.clone();
                        mono2.0[i] += k;
                        let c2 = coef
                            .clone()
                            .mul_nat(&binom)
                            * powers[(e - k) as usize].clone();
                        next.push((mono2, c2));
                    }
                }
                partial = next;
            }
            for (m, coef) in partial {
                out.add_term(m, coef);
            }
        }
        out
    }

    /// Partial derivative with respect to variable `var`.
    pub fn derivative(&self, var: usize) -> MultiPoly<C> {
        let mut out = MultiPoly::zero(self.n);
        for (m, c) in &self.terms {
            let e = m.0[var];
            if e == 0 {
                continue;
            }
            let mut m2 = m.clone();
            m2.0[var] -= 1;
            out.add_term(m2, c.mul_nat(&BigUint::from(e)));
        }
        out
    }

    /// Embed into a larger dimension, keeping variable indices.
    pub fn extend_dimension(&self, n_new: usize) -> MultiPoly<C> {
        assert!(n_new >= self.n);
        let mut out = MultiPoly::zero(n_new);
        for (m, c) in &self.terms {
            let mut e = m.0.clone();
            e.resize(n_new, 0);
            out.terms.insert(Monomial(e), c.clone());
        }
        out
    }

    pub fn map_coeffs<D: Coeff>(&self, f: impl Fn(&C) -> D) -> MultiPoly<D> {
        let mut out = MultiPoly::zero(self.n);
        for (m, c) in &self.terms {
            out.add_term(m.clone(), f(c));
        }
        out
    }
}

fn binomial(n: u32, k: u32) -> BigUint {
    debug_assert!(k <= n);
    let k = k.min(n - k);
    let mut num = BigUint::one();
    let mut den = BigUint::one();
    for i in 0..k {
        num *= BigUint::from(n - i);
        den *= BigUint::from(i + 1);
    }
    num / den
}

impl<C: Coeff> fmt::Display for MultiPoly<C> {
    /// Canonical form: terms in descending lexicographic monomial order,
    /// every coefficient explicit, `*` separators and `^` powers.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (idx, (m, c)) in self.terms.iter().rev().enumerate() {
            let (neg, abs) = c.display_parts();
            if idx == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            if m.is_constant() {
                write!(f, "{abs}")?;
            } else {
                write!(f, "{abs}*{m}")?;
            }
        }
        Ok(())
    }
}

/// Integer polynomials: reduction mod q and real embedding.
impl MultiPoly<BigInt> {
    pub fn reduce_mod(&self, field: &PrimeField) -> MultiPoly<Fq> {
        self.map_coeffs(|c| Fq::from_bigint(c, field.q()))
    }

    pub fn to_real(&self) -> MultiPoly<f64> {
        self.map_coeffs(|c| c.to_f64().unwrap_or(f64::INFINITY))
    }

    /// Exact evaluation at an integer point.
    pub fn eval_int(&self, point: &[i64]) -> BigInt {
        let mut acc = BigInt::zero();
        for (m, c) in &self.terms {
            acc += c * BigInt::from(m.eval_int(point));
        }
        acc
    }
}

impl MultiPoly<Fq> {
    /// Modulus shared by the attached coefficients, if any.
    pub fn modulus(&self) -> Option<u64> {
        self.terms.values().find_map(|c| c.modulus())
    }

    /// Evaluate at a reduced residue point.
    pub fn eval_residues(&self, field: &PrimeField, point: &[u64]) -> u64 {
        let q = field.q() as u128;
        let mut acc = 0u128;
        for (m, c) in &self.terms {
            let mut t = c.value() as u128;
            for (i, &e) in m.0.iter().enumerate() {
                let base = point[i] as u128 % q;
                for _ in 0..e {
                    t = t * base % q;
                }
            }
            acc = (acc + t) % q;
        }
        acc as u64
    }
}

impl MultiPoly<f64> {
    /// Evaluate at an integer point, in floating point.
    pub fn eval_real(&self, point: &[i64]) -> f64 {
        let mut acc = 0.0;
        for (m, c) in &self.terms {
            let mut t = *c;
            for (i, &e) in m.0.iter().enumerate() {
                t *= (point[i] as f64).powi(e as i32);
            }
            acc += t;
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn int(v: i64) -> BigInt {
        BigInt::from(v)
    }

    fn p(text: &str, n: usize) -> MultiPoly<BigInt> {
        parse_poly(text, n).unwrap()
    }

    #[test]
    fn monomial_order_is_lexicographic() {
        let a = Monomial(vec![2, 0]);
        let b = Monomial(vec![1, 5]);
        let c = Monomial(vec![2, 1]);
        assert!(a > b);
        assert!(c > a);
    }

    #[test]
    fn arithmetic_basics() {
        let f = p("x1^2*x2 + 3*x2^3", 2);
        let g = p("x1^2*x2 - x2^3", 2);
        let sum = f.add(&g);
        assert_eq!(sum, p("2*x1^2*x2 + 2*x2^3", 2));
        let diff = f.sub(&f);
        assert!(diff.is_zero());
        let prod = p("x1 + x2", 2).mul(&p("x1 - x2", 2));
        assert_eq!(prod, p("x1^2 - x2^2", 2));
    }

    #[test]
    fn pow_and_eval() {
        let f = p("x1 + 1", 1);
        assert_eq!(f.pow(3), p("x1^3 + 3*x1^2 + 3*x1 + 1", 1));
        assert_eq!(f.pow(0), MultiPoly::one(1));
        let g = p("x1^2*x2 + 3*x2^3", 2);
        assert_eq!(g.eval_int(&[2, 3]), int(4 * 3 + 3 * 27));
    }

    #[test]
    fn shift_matches_compose() {
        let f = p("x1^3*x2 - 2*x1*x2^2 + 7", 2);
        let shifted = f.shift(&[int(2), int(-1)]);
        let subs = vec![p("x1 + 2", 2), p("x2 - 1", 2)];
        assert_eq!(shifted, f.compose(&subs));
        // Spot value check: f(x+a) at x equals f at x+a.
        assert_eq!(shifted.eval_int(&[1, 1]), f.eval_int(&[3, 0]));
    }

    #[test]
    fn derivative_product_rule_spot() {
        let f = p("x1^2*x2", 2);
        assert_eq!(f.derivative(0), p("2*x1*x2", 2));
        assert_eq!(f.derivative(1), p("x1^2", 2));
        assert!(p("3", 2).derivative(0).is_zero());
    }

    #[test]
    fn display_descending_lex_with_explicit_coefficients() {
        let f = p("x1^2*x2 + 3*x2^3", 2);
        assert_eq!(f.to_string(), "1*x1^2*x2 + 3*x2^3");
        let g = p("-x1 + 2", 1);
        assert_eq!(g.to_string(), "-1*x1 + 2");
        assert_eq!(MultiPoly::<BigInt>::zero(2).to_string(), "0");
    }

    #[test]
    fn residue_reduction_and_eval() {
        let f = p("x1*x2 + 6", 2);
        let field = PrimeField::new(5).unwrap();
        let fm = f.reduce_mod(&field);
        assert_eq!(fm.eval_residues(&field, &[2, 3]), (6 + 6) % 5);
        assert_eq!(fm.coefficient(&Monomial::constant(2)).unwrap().value(), 1);
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn arb_poly() -> impl Strategy<Value = MultiPoly<BigInt>> {
            proptest::collection::vec(
                (proptest::collection::vec(0u32..3, 2), -5i64..=5),
                0..5,
            )
            .prop_map(|terms| {
                MultiPoly::from_terms(
                    2,
                    terms
                        .into_iter()
                        .map(|(e, c)| (Monomial(e), BigInt::from(c))),
                )
            })
        }

        proptest! {
            #[test]
            fn distributivity(a in arb_poly(), b in arb_poly(), c in arb_poly()) {
                prop_assert_eq!(a.add(&b).mul(&c), a.mul(&c).add(&b.mul(&c)));
            }

            #[test]
            fn shifts_compose(a in arb_poly(), u in -4i64..=4, v in -4i64..=4) {
                let one = a.shift(&[BigInt::from(u), BigInt::from(0)])
                    .shift(&[BigInt::from(0), BigInt::from(v)]);
                let both = a.shift(&[BigInt::from(u), BigInt::from(v)]);
                prop_assert_eq!(one, both);
            }
        }
    }

    #[test]
    fn binomial_values() {
        assert_eq!(binomial(6, 2), BigUint::from(15u32));
        assert_eq!(binomial(5, 0), BigUint::one());
        assert_eq!(binomial(5, 5), BigUint::one());
    }
}
