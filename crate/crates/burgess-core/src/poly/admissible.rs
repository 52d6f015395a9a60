//! The admissibility decision procedure and the shifted product polynomial.
//!
//! A form is admissible for `(delta, q)` when the `delta`-th-power-free part
//! `h` of its reduction mod `q` cannot be made independent of a variable by
//! an invertible linear substitution. Instead of searching all of
//! `GL_n(F_q)`, we search invariant directions: there is an `A` with `h(xA)`
//! free of `x_1` exactly when some nonzero `v` satisfies `h(x + s v) = h(x)`
//! identically in `(x, s)`.
//!
//! One direction of the equivalence is a change of variables (`v = e_1 A`);
//! for the other, extend `v` to a basis, so that invariance in `(x, s)`
//! kills every coefficient of a positive power of `s`. Those coefficients
//! are the Hasse derivatives of `h(xA)` in `x_1`, and with `deg h < q` the
//! top one vanishes only when `x_1` does not occur. The exhaustive
//! `GL_n(F_q)` substitution search is kept as a test oracle.

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::coeff::Fq;
use crate::error::{Error, Result};
use crate::ff::PrimeField;

use super::{MultiPoly, Monomial};

/// Verdict of the admissibility test.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Admissible,
    NotAdmissible,
    Indeterminate,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum AdmissibilityMethod {
    DirectionSearch,
    GlBruteforce,
}

/// Full report of the decision procedure.
#[derive(Clone, Debug)]
pub struct AdmissibilityReport {
    pub verdict: Verdict,
    /// The power-free factor `h` (trivial when indeterminate).
    pub delta_free_part: MultiPoly<Fq>,
    /// An invariant direction proving inadmissibility, lexicographically
    /// smallest among the projective representatives.
    pub witness: Option<Vec<u64>>,
    pub method: AdmissibilityMethod,
    /// Why the verdict is indeterminate, when it is.
    pub reason: Option<String>,
}

/// `F_{{x}}(X) = prod_j F(X + x_j)^{delta(j)}` reduced mod `q`, where
/// `delta(j)` is 1 for odd positions and `order - 1` for even positions
/// (positions counted from 1).
pub fn product_polynomial(
    form: &MultiPoly<BigInt>,
    points: &[Vec<i64>],
    order: u64,
    field: &PrimeField,
) -> MultiPoly<Fq> {
    assert!(points.len() % 2 == 0, "collection length must be even");
    let n = form.dimension();
    let reduced = form.reduce_mod(field);
    let mut acc = MultiPoly::constant(n, field.element(1));
    for (idx, point) in points.iter().enumerate() {
        assert_eq!(point.len(), n);
        let offsets: Vec<Fq> = point.iter().map(|&x| Fq::from_int(x, field.q())).collect();
        let shifted = reduced.shift(&offsets);
        let exponent = if idx % 2 == 0 { 1 } else { order as u32 - 1 };
        acc = acc.mul(&shifted.pow(exponent));
    }
    acc
}

/// Projective representatives of directions in `F_q^n`, in lexicographic
/// order: every nonzero vector whose first nonzero coordinate is 1.
pub fn projective_directions(q: u64, n: usize) -> impl Iterator<Item = Vec<u64>> {
    let mut v = vec![0u64; n];
    let mut done = false;
    std::iter::from_fn(move || loop {
        if done {
            return None;
        }
        // Advance the odometer (last coordinate fastest = lex ascending).
        let mut i = n;
        loop {
            if i == 0 {
                done = true;
                return None;
            }
            i -= 1;
            if v[i] + 1 < q {
                v[i] += 1;
                for w in &mut v[i + 1..] {
                    *w = 0;
                }
                break;
            }
        }
        if v.iter().find(|&&c| c != 0) == Some(&1) {
            return Some(v.clone());
        }
    })
}

/// Is `h(x + s v) = h(x)` as polynomials in `(x, s)`?
pub fn invariant_under_direction(h: &MultiPoly<Fq>, v: &[u64], field: &PrimeField) -> bool {
    let n = h.dimension();
    let extended = h.extend_dimension(n + 1);
    // Substitute x_i -> x_i + v_i * s, with s the extra variable mapping to
    // itself.
    let mut subs: Vec<MultiPoly<Fq>> = (0..n)
        .map(|i| {
            let mut p = MultiPoly::variable(n + 1, i);
            p.add_term(Monomial::unit(n + 1, n), field.element(v[i]));
            p
        })
        .collect();
    subs.push(MultiPoly::variable(n + 1, n));
    extended.compose(&subs) == extended
}

/// Decide `(delta, q)`-admissibility of an integer form by invariant
/// direction search.
pub fn is_admissible(
    form: &MultiPoly<BigInt>,
    field: &PrimeField,
    delta: u32,
) -> Result<AdmissibilityReport> {
    let reduced = form.reduce_mod(field);
    if reduced.is_zero() {
        return Err(Error::ZeroModQ(field.q()));
    }
    let degree = reduced.degree().unwrap();
    if degree >= field.q() {
        // Outside the reliable range of the power-free decomposition the
        // checker refuses to guess.
        return Ok(AdmissibilityReport {
            verdict: Verdict::Indeterminate,
            delta_free_part: MultiPoly::zero(form.dimension()),
            witness: None,
            method: AdmissibilityMethod::DirectionSearch,
            reason: Some(
                Error::DegreeTooLarge {
                    degree,
                    q: field.q(),
                }
                .to_string(),
            ),
        });
    }
    let (_, h) = super::power_free_decompose(&reduced, delta)?;
    let witness = first_invariant_direction(&h, field);
    Ok(AdmissibilityReport {
        verdict: if witness.is_some() {
            Verdict::NotAdmissible
        } else {
            Verdict::Admissible
        },
        delta_free_part: h,
        witness,
        method: AdmissibilityMethod::DirectionSearch,
        reason: None,
    })
}

fn first_invariant_direction(h: &MultiPoly<Fq>, field: &PrimeField) -> Option<Vec<u64>> {
    projective_directions(field.q(), h.dimension())
        .find(|v| invariant_under_direction(h, v, field))
}

fn det_mod(matrix: &[Vec<u64>], q: u64) -> u64 {
    let n = matrix.len();
    let mut m: Vec<Vec<u64>> = matrix.to_vec();
    let mut det = 1u128;
    let q128 = q as u128;
    for col in 0..n {
        let pivot = (col..n).find(|&r| m[r][col] % q != 0);
        let Some(pivot) = pivot else {
            return 0;
        };
        if pivot != col {
            m.swap(pivot, col);
            det = det * (q128 - 1) % q128;
        }
        let p = m[col][col] % q;
        det = det * p as u128 % q128;
        let p_inv = Fq::new(p, q).inv().value();
        for r in col + 1..n {
            let factor = m[r][col] % q * p_inv % q;
            for c in col..n {
                let sub = factor as u128 * (m[col][c] % q) as u128 % q128;
                m[r][c] = ((m[r][c] as u128 + q128 * q128 - sub) % q128) as u64;
            }
        }
    }
    (det % q128) as u64
}

/// All of `GL_n(F_q)` as row-major matrices, in odometer order.
///
/// Exhaustive oracle support; feasible only for tiny `q^(n^2)`.
pub fn gl_matrices(q: u64, n: usize) -> Vec<Vec<Vec<u64>>> {
    let cells = n * n;
    let mut out = Vec::new();
    let mut flat = vec![0u64; cells];
    loop {
        let matrix: Vec<Vec<u64>> = flat.chunks(n).map(|r| r.to_vec()).collect();
        if det_mod(&matrix, q) != 0 {
            out.push(matrix);
        }
        let mut i = cells;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if flat[i] + 1 < q {
                flat[i] += 1;
                for w in &mut flat[i + 1..] {
                    *w = 0;
                }
                break;
            }
        }
    }
}

/// Exhaustive reference: search all `A` in `GL_n(F_q)` for one that makes
/// `h(xA)` independent of `x_1`. Returns the first such matrix.
pub fn is_inadmissible_gl(h: &MultiPoly<Fq>, field: &PrimeField) -> Option<Vec<Vec<u64>>> {
    let n = h.dimension();
    let q = field.q();
    for matrix in gl_matrices(q, n) {
        // y_j = (xA)_j = sum_i x_i A[i][j].
        let subs: Vec<MultiPoly<Fq>> = (0..n)
            .map(|j| {
                let mut p = MultiPoly::zero(n);
                for (i, row) in matrix.iter().enumerate() {
                    p.add_term(Monomial::unit(n, i), field.element(row[j]));
                }
                p
            })
            .collect();
        let substituted = h.compose(&subs);
        let free_of_x1 = substituted.terms().all(|(m, _)| m.0[0] == 0);
        if free_of_x1 {
            return Some(matrix);
        }
    }
    None
}
