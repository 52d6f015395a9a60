//! Prime fields, primitive roots, discrete-log tables and Dirichlet
//! characters of prescribed order.
//!
//! The character of conductor `q` and order `D` is normalized so that
//! `chi(g) = e(1/D)` for `g` the smallest primitive root mod `q`; every other
//! character of order `D` is a power of this one by an exponent coprime to
//! `D`. Evaluation is table-driven: `chi(g^k) = roots[k mod D]`, with
//! `chi(0) = 0`.

use std::f64::consts::TAU;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::coeff::Fq;
use crate::error::{Error, Result};

/// Largest modulus for which a dense discrete-log table is built.
pub const DLOG_SOFT_LIMIT: u64 = 10_000_000;

const DLOG_NONE: u32 = u32::MAX;

/// `e(t) = exp(2 pi i t)`, with the argument reduced mod 1 first so that
/// large phases do not lose precision inside `sin`/`cos`.
pub fn e_unit(t: f64) -> Complex64 {
    let frac = t - t.floor();
    let (s, c) = (TAU * frac).sin_cos();
    Complex64::new(c, s)
}

/// `exp(2 pi i k/m)` for integers `k`, `m >= 1`.
pub fn root_of_unity(k: u64, m: u64) -> Complex64 {
    let k = k % m;
    e_unit(k as f64 / m as f64)
}

/// Deterministic Miller-Rabin for 64-bit integers.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    let mut d = n - 1;
    let mut s = 0u32;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    let pow = |mut b: u128, mut e: u64, m: u128| {
        let mut acc = 1u128;
        b %= m;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * b % m;
            }
            b = b * b % m;
            e >>= 1;
        }
        acc
    };
    // This witness set is deterministic for all n < 2^64.
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow(a as u128, d, n as u128);
        if x == 1 || x == (n - 1) as u128 {
            continue;
        }
        for _ in 0..s - 1 {
            x = x * x % n as u128;
            if x == (n - 1) as u128 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn distinct_prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

fn mod_pow(b: u64, mut e: u64, m: u64) -> u64 {
    let m = m as u128;
    let mut base = b as u128 % m;
    let mut acc = 1u128;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % m;
        }
        base = base * base % m;
        e >>= 1;
    }
    acc as u64
}

/// Smallest generator of `(Z/q)^x` for prime `q`.
///
/// By convention `q = 2` returns 1 (the group is trivial).
pub fn find_primitive_root(q: u64) -> Result<u64> {
    if !is_prime(q) {
        return Err(Error::NotPrime(q));
    }
    if q == 2 {
        return Ok(1);
    }
    let order = q - 1;
    let factors = distinct_prime_factors(order);
    'candidate: for g in 2..q {
        for &p in &factors {
            if mod_pow(g, order / p, q) == 1 {
                continue 'candidate;
            }
        }
        return Ok(g);
    }
    unreachable!("every prime has a primitive root")
}

/// A prime field together with its smallest primitive root and a dense
/// discrete-log table.
///
/// Immutable after construction; an instance is shared freely across
/// threads.
#[derive(Debug, Clone)]
pub struct PrimeField {
    q: u64,
    primitive_root: u64,
    dlog: Vec<u32>,
}

impl PrimeField {
    /// Build the field, verifying primality and filling the log table.
    pub fn new(q: u64) -> Result<Self> {
        if !is_prime(q) {
            return Err(Error::NotPrime(q));
        }
        if q > DLOG_SOFT_LIMIT {
            return Err(Error::BudgetExceeded {
                task: "discrete-log table",
                required: q as u128,
                budget: DLOG_SOFT_LIMIT as u128,
            });
        }
        let primitive_root = find_primitive_root(q)?;
        let mut dlog = vec![DLOG_NONE; q as usize];
        let mut val = 1u64;
        for k in 0..q - 1 {
            debug_assert_eq!(dlog[val as usize], DLOG_NONE);
            dlog[val as usize] = k as u32;
            val = val * primitive_root % q;
        }
        Ok(PrimeField {
            q,
            primitive_root,
            dlog,
        })
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn primitive_root(&self) -> u64 {
        self.primitive_root
    }

    /// Discrete log base the primitive root; `None` exactly for `a ≡ 0`.
    pub fn dlog(&self, a: u64) -> Option<u64> {
        let v = self.dlog[(a % self.q) as usize];
        (v != DLOG_NONE).then_some(v as u64)
    }

    /// Reduce a signed integer into `[0, q)`.
    pub fn reduce(&self, a: i64) -> u64 {
        (a as i128).rem_euclid(self.q as i128) as u64
    }

    pub fn reduce_bigint(&self, a: &BigInt) -> u64 {
        let m = BigInt::from(self.q);
        (((a % &m) + &m) % &m).to_u64().expect("reduced")
    }

    /// Wrap a reduced residue as an [`Fq`] scalar attached to this field.
    pub fn element(&self, value: u64) -> Fq {
        Fq::new(value, self.q)
    }

    pub fn pow_root(&self, k: u64) -> u64 {
        mod_pow(self.primitive_root, k, self.q)
    }
}

/// A non-principal multiplicative character mod `q` of exact order `order`.
#[derive(Debug, Clone)]
pub struct DirichletCharacter {
    field: PrimeField,
    order: u64,
    /// Exponent table: `values[a] = e(a)` with `chi(a) = e_unit(e(a)/order)`,
    /// `DLOG_NONE` at `a = 0`.
    values: Vec<u32>,
    /// `roots[k] = exp(2 pi i k/order)`.
    roots: Vec<Complex64>,
}

impl DirichletCharacter {
    /// The canonical character of conductor `q` and order `order`, with
    /// `chi(g) = e(1/order)`.
    pub fn new(q: u64, order: u64) -> Result<Self> {
        if order < 2 {
            return Err(Error::OrderOne);
        }
        let field = PrimeField::new(q)?;
        if (q - 1) % order != 0 {
            return Err(Error::OrderNotDividing {
                order,
                q_minus_one: q - 1,
            });
        }
        let values = field
            .dlog
            .iter()
            .map(|&k| {
                if k == DLOG_NONE {
                    DLOG_NONE
                } else {
                    (k as u64 % order) as u32
                }
            })
            .collect();
        let roots = (0..order).map(|k| root_of_unity(k, order)).collect();
        Ok(DirichletCharacter {
            field,
            order,
            values,
            roots,
        })
    }

    pub fn field(&self) -> &PrimeField {
        &self.field
    }

    pub fn q(&self) -> u64 {
        self.field.q
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    /// The exponent class `e(a)` of a reduced residue, or `None` for 0.
    pub fn exponent_of(&self, residue: u64) -> Option<u64> {
        let v = self.values[(residue % self.field.q) as usize];
        (v != DLOG_NONE).then_some(v as u64)
    }

    /// `chi(a)` for an arbitrary integer argument.
    pub fn eval(&self, a: i64) -> Complex64 {
        self.eval_residue(self.field.reduce(a))
    }

    /// `chi(a)` for an already-reduced residue.
    pub fn eval_residue(&self, residue: u64) -> Complex64 {
        match self.exponent_of(residue) {
            None => Complex64::new(0.0, 0.0),
            Some(k) => self.roots[k as usize],
        }
    }
}

/// A complex accumulator for sums of unit-magnitude terms.
///
/// Every contract in this crate that compares such sums uses an absolute
/// tolerance scaled by the term count; `roundoff_bound` makes the scale
/// explicit (each unit term contributes at most `2^-48` of drift).
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ComplexAcc {
    pub re: f64,
    pub im: f64,
    pub term_count: u64,
}

impl ComplexAcc {
    pub fn new() -> Self {
        ComplexAcc::default()
    }

    pub fn add(&mut self, z: Complex64) {
        self.re += z.re;
        self.im += z.im;
        self.term_count += 1;
    }

    /// Record a term that is exactly zero (e.g. `chi(0)`).
    pub fn add_zero_term(&mut self) {
        self.term_count += 1;
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }

    pub fn abs(&self) -> f64 {
        self.value().norm()
    }

    pub fn roundoff_bound(&self) -> f64 {
        self.term_count as f64 * 2f64.powi(-48)
    }

    /// Fold integer multiplicities of the `order`-th roots of unity into the
    /// accumulator: adds `sum_k counts[k] * e(k/order)` as `sum counts` terms.
    pub fn add_root_classes(&mut self, counts: &[u64], order: u64) {
        for (k, &c) in counts.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let z = root_of_unity(k as u64, order);
            self.re += c as f64 * z.re;
            self.im += c as f64 * z.im;
            self.term_count += c;
        }
    }
}
