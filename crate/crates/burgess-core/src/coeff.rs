//! Coefficient scalars for polynomial arithmetic.
//!
//! All polynomial code is generic over a [`Coeff`] ring; the three rings the
//! laboratory works in are `BigInt` (integer forms), [`Fq`] (prime-field
//! residues) and `f64` (real phase polynomials). Concrete aliases live at the
//! crate root.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

/// Ring of polynomial coefficients.
///
/// On top of the `num-traits` ring operations, a coefficient knows how to
/// absorb a natural number (for binomial and derivative scaling), how to
/// split itself into sign and magnitude for canonical printing, and how to
/// read itself out of a numeric literal.
pub trait Coeff:
    Clone
    + PartialEq
    + fmt::Debug
    + fmt::Display
    + Zero
    + One
    + Neg<Output = Self>
    + Sub<Output = Self>
{
    /// Additive identity in the same ring instance as `self`.
    ///
    /// For context-free rings this is `Self::zero()`; for residues it carries
    /// the modulus of `self` so that generic code never manufactures an
    /// unattached constant when a prototype is at hand.
    fn zero_like(&self) -> Self {
        Self::zero()
    }

    /// Multiplicative identity in the same ring instance as `self`.
    fn one_like(&self) -> Self {
        Self::one()
    }

    /// `self` times the image of the natural number `k` in the ring.
    fn mul_nat(&self, k: &BigUint) -> Self;

    /// Parse a bare numeric literal (integer, or decimal where the ring has
    /// them). Returns `None` when the literal has no image in the ring.
    fn parse_literal(text: &str) -> Option<Self>;

    /// Sign/magnitude split used by the canonical printer: `(negative, abs)`.
    fn display_parts(&self) -> (bool, String);
}

impl Coeff for BigInt {
    fn mul_nat(&self, k: &BigUint) -> Self {
        self * BigInt::from(k.clone())
    }

    fn parse_literal(text: &str) -> Option<Self> {
        text.parse().ok()
    }

    fn display_parts(&self) -> (bool, String) {
        (self.is_negative(), self.abs().to_string())
    }
}

impl Coeff for f64 {
    fn mul_nat(&self, k: &BigUint) -> Self {
        self * k.to_f64().unwrap_or(f64::INFINITY)
    }

    fn parse_literal(text: &str) -> Option<Self> {
        // The tokenizer only passes digit strings with an optional dot, so
        // special values like "inf" never reach this point.
        text.parse().ok()
    }

    fn display_parts(&self) -> (bool, String) {
        if self.is_sign_negative() {
            (true, format!("{}", -self))
        } else {
            (false, format!("{self}"))
        }
    }
}

/// A residue in the prime field `F_q`.
///
/// `modulus == 0` marks the *unattached* constants produced by
/// `Zero::zero()` / `One::one()` in generic code before any field element is
/// in scope; they adopt the modulus of the first attached operand they meet.
/// Comparisons treat an unattached value as its canonical image, so
/// `Fq::one() == Fq::new(1, q)` holds.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Fq {
    value: u64,
    modulus: u64,
}

impl Fq {
    pub fn new(value: u64, modulus: u64) -> Self {
        debug_assert!(modulus > 0);
        Fq {
            value: value % modulus,
            modulus,
        }
    }

    /// Reduce an arbitrary signed integer into `F_q`.
    pub fn from_int(value: i64, modulus: u64) -> Self {
        let m = modulus as i128;
        Fq::new(((value as i128).rem_euclid(m)) as u64, modulus)
    }

    pub fn from_bigint(value: &BigInt, modulus: u64) -> Self {
        let m = BigInt::from(modulus);
        let v = ((value % &m) + &m) % &m;
        Fq::new(v.to_u64().expect("reduced residue fits u64"), modulus)
    }

    pub fn value(&self) -> u64 {
        self.value
    }

    /// The modulus this residue is attached to, or `None` for the neutral
    /// constants of generic code.
    pub fn modulus(&self) -> Option<u64> {
        (self.modulus != 0).then_some(self.modulus)
    }

    fn join_modulus(a: &Fq, b: &Fq) -> u64 {
        match (a.modulus, b.modulus) {
            (0, m) | (m, 0) => m,
            (m1, m2) => {
                assert_eq!(m1, m2, "mixed moduli {m1} and {m2} in F_q arithmetic");
                m1
            }
        }
    }

    pub fn pow(&self, mut e: u64) -> Fq {
        if self.modulus == 0 {
            assert!(self.value <= 1, "unattached residue {} has no power", self.value);
            return *self;
        }
        let m = self.modulus as u128;
        let mut base = self.value as u128;
        let mut acc = 1u128;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base % m;
            }
            base = base * base % m;
            e >>= 1;
        }
        Fq::new(acc as u64, self.modulus)
    }

    /// Multiplicative inverse; the modulus is prime, so Fermat applies.
    pub fn inv(&self) -> Fq {
        if self.modulus == 0 {
            assert_eq!(self.value, 1, "unattached residue {} has no inverse", self.value);
            return *self;
        }
        assert!(self.value != 0, "zero has no inverse in F_{}", self.modulus);
        self.pow(self.modulus - 2)
    }
}

impl PartialEq for Fq {
    fn eq(&self, other: &Self) -> bool {
        match (self.modulus, other.modulus) {
            (0, 0) => self.value == other.value,
            (0, m) => self.value % m == other.value,
            (m, 0) => self.value == other.value % m,
            (m1, m2) => m1 == m2 && self.value == other.value,
        }
    }
}

impl Eq for Fq {}

impl fmt::Display for Fq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

impl Add for Fq {
    type Output = Fq;
    fn add(self, rhs: Fq) -> Fq {
        let m = Fq::join_modulus(&self, &rhs);
        if m == 0 {
            return Fq {
                value: self.value + rhs.value,
                modulus: 0,
            };
        }
        Fq::new((self.value % m + rhs.value % m) % m, m)
    }
}

impl Sub for Fq {
    type Output = Fq;
    fn sub(self, rhs: Fq) -> Fq {
        let m = Fq::join_modulus(&self, &rhs);
        if m == 0 {
            assert!(
                self.value >= rhs.value,
                "unattached residue subtraction would go negative"
            );
            return Fq {
                value: self.value - rhs.value,
                modulus: 0,
            };
        }
        Fq::new((self.value % m + m - rhs.value % m) % m, m)
    }
}

impl Mul for Fq {
    type Output = Fq;
    fn mul(self, rhs: Fq) -> Fq {
        let m = Fq::join_modulus(&self, &rhs);
        if m == 0 {
            return Fq {
                value: self.value * rhs.value,
                modulus: 0,
            };
        }
        Fq::new((self.value as u128 % m as u128 * (rhs.value as u128 % m as u128) % m as u128) as u64, m)
    }
}

impl Neg for Fq {
    type Output = Fq;
    fn neg(self) -> Fq {
        if self.modulus == 0 {
            assert_eq!(self.value, 0, "cannot negate unattached residue {}", self.value);
            return self;
        }
        Fq::new(self.modulus - self.value % self.modulus, self.modulus)
    }
}

impl Zero for Fq {
    fn zero() -> Self {
        Fq {
            value: 0,
            modulus: 0,
        }
    }
    fn is_zero(&self) -> bool {
        self.value == 0
    }
}

impl One for Fq {
    fn one() -> Self {
        Fq {
            value: 1,
            modulus: 0,
        }
    }
    fn is_one(&self) -> bool {
        if self.modulus == 1 {
            // F_1 does not arise (q is prime), but stay total.
            return true;
        }
        self.value == 1
    }
}

impl Coeff for Fq {
    fn zero_like(&self) -> Self {
        Fq {
            value: 0,
            modulus: self.modulus,
        }
    }

    fn one_like(&self) -> Self {
        if self.modulus == 0 {
            Fq::one()
        } else {
            Fq::new(1, self.modulus)
        }
    }

    fn mul_nat(&self, k: &BigUint) -> Self {
        if self.modulus == 0 {
            return Fq {
                value: self.value * k.to_u64().expect("unattached scaling must stay small"),
                modulus: 0,
            };
        }
        let k = (k % BigUint::from(self.modulus))
            .to_u64()
            .expect("reduced factor fits u64");
        *self * Fq::new(k, self.modulus)
    }

    fn parse_literal(_text: &str) -> Option<Self> {
        // Residue polynomials are never built from text; integer polynomials
        // are parsed and then reduced mod q.
        None
    }

    fn display_parts(&self) -> (bool, String) {
        (false, self.value.to_string())
    }
}

/// Coefficients that form a field; needed by gcd-based decompositions.
pub trait FieldCoeff: Coeff {
    fn inv(&self) -> Self;
    /// Characteristic of the field instance this element belongs to, when it
    /// is already attached to one.
    fn characteristic(&self) -> Option<u64>;
}

impl FieldCoeff for Fq {
    fn inv(&self) -> Self {
        Fq::inv(self)
    }
    fn characteristic(&self) -> Option<u64> {
        self.modulus()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn residue_arithmetic_wraps() {
        let a = Fq::new(3, 5);
        let b = Fq::new(4, 5);
        assert_eq!(a + b, Fq::new(2, 5));
        assert_eq!(a - b, Fq::new(4, 5));
        assert_eq!(a * b, Fq::new(2, 5));
        assert_eq!(-a, Fq::new(2, 5));
    }

    #[test]
    fn unattached_constants_adopt_modulus() {
        let one = Fq::one();
        let a = Fq::new(3, 7);
        assert_eq!(one * a, a);
        assert_eq!(Fq::zero() + a, a);
        assert_eq!(one, Fq::new(1, 7));
        assert_eq!(Fq::new(8, 7), Fq::new(1, 7));
    }

    #[test]
    fn inverse_round_trips() {
        for q in [3u64, 5, 13, 101] {
            for v in 1..q.min(40) {
                let x = Fq::new(v, q);
                assert_eq!(x * x.inv(), Fq::new(1, q));
            }
        }
    }

    #[test]
    fn from_int_handles_negatives() {
        assert_eq!(Fq::from_int(-1, 5), Fq::new(4, 5));
        assert_eq!(Fq::from_int(-10, 5), Fq::new(0, 5));
    }

    #[test]
    fn bigint_parts() {
        let x = BigInt::from(-7);
        assert_eq!(x.display_parts(), (true, "7".to_string()));
    }
}
