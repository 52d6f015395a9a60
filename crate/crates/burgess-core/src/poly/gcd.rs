//! Multivariate gcd and power-free decomposition over a prime field.
//!
//! The gcd recurses one variable at a time: split off the content with
//! respect to the highest occurring variable, then run a primitive
//! pseudo-remainder sequence on the primitive parts. Degrees here are desk
//! scale, so no modular or sparse-interpolation tricks are needed.
//!
//! Decomposition into multiplicity parts (Musser's iteration of gcds with
//! the partial derivatives) requires `deg f < char`, where no irreducible
//! factor can have an identically vanishing derivative; callers see
//! `DegreeTooLarge` outside that range.

use crate::coeff::FieldCoeff;
use crate::error::{Error, Result};

use super::{Monomial, MultiPoly};

fn degree_in<C: FieldCoeff>(f: &MultiPoly<C>, var: usize) -> Option<u32> {
    f.terms().map(|(m, _)| m.0[var]).max()
}

/// Coefficient of `x_var^power` in `f`, as a polynomial in the remaining
/// variables (same arity, zero exponent on `var`).
fn coefficient_of_power<C: FieldCoeff>(
    f: &MultiPoly<C>,
    var: usize,
    power: u32,
) -> MultiPoly<C> {
    let n = f.dimension();
    let mut out = MultiPoly::zero(n);
    for (m, c) in f.terms() {
        if m.0[var] == power {
            let mut e = m.clone();
            e.0[var] = 0;
            out.add_term(e, c.clone());
        }
    }
    out
}

fn highest_variable<C: FieldCoeff>(polys: &[&MultiPoly<C>]) -> Option<usize> {
    let n = polys.first()?.dimension();
    (0..n)
        .rev()
        .find(|&v| polys.iter().any(|p| degree_in(p, v).unwrap_or(0) > 0))
}

/// Scale so the lexicographically leading coefficient is 1.
fn normalize<C: FieldCoeff>(f: &MultiPoly<C>) -> MultiPoly<C> {
    match f.leading_term() {
        None => f.clone(),
        Some((_, c)) => f.scale(&c.inv()),
    }
}

/// Exact multivariate division; `None` when `b` does not divide `a`.
pub(crate) fn div_exact<C: FieldCoeff>(
    a: &MultiPoly<C>,
    b: &MultiPoly<C>,
) -> Option<MultiPoly<C>> {
    let (lt_m, lt_c) = b.leading_term().expect("division by zero polynomial");
    let lt_m = lt_m.clone();
    let lt_inv = lt_c.inv();
    let n = a.dimension();
    let mut rem = a.clone();
    let mut quot = MultiPoly::zero(n);
    while let Some((m, c)) = rem.leading_term() {
        if !m.divisible_by(&lt_m) {
            return None;
        }
        let qm = m.div(&lt_m);
        let qc = c.clone() * lt_inv.clone();
        rem = rem.sub(&b.mul(&MultiPoly::monomial(n, qm.clone(), qc.clone())));
        quot.add_term(qm, qc);
    }
    Some(quot)
}

/// Pseudo-remainder of `a` by `b` in the variable `var`.
fn pseudo_rem<C: FieldCoeff>(a: &MultiPoly<C>, b: &MultiPoly<C>, var: usize) -> MultiPoly<C> {
    let db = degree_in(b, var).expect("pseudo-division by zero");
    let lcb = coefficient_of_power(b, var, db);
    let n = a.dimension();
    let mut r = a.clone();
    while let Some(dr) = degree_in(&r, var) {
        if r.is_zero() || dr < db {
            break;
        }
        let lcr = coefficient_of_power(&r, var, dr);
        let shift = MultiPoly::monomial(
            n,
            {
                let mut e = Monomial::constant(n);
                e.0[var] = dr - db;
                e
            },
            lcr.prototype().map_or_else(C::one, |p| p.one_like()),
        );
        r = r.mul(&lcb).sub(&b.mul(&lcr).mul(&shift));
    }
    r
}

/// Content of `f` with respect to `var`: the gcd of its `x_var`-power
/// coefficients (monic).
fn content<C: FieldCoeff>(f: &MultiPoly<C>, var: usize) -> MultiPoly<C> {
    let d = degree_in(f, var).unwrap_or(0);
    let mut acc = MultiPoly::zero(f.dimension());
    for p in 0..=d {
        let c = coefficient_of_power(f, var, p);
        if !c.is_zero() {
            acc = multivariate_gcd(&acc, &c);
        }
    }
    acc
}

/// Monic gcd of two polynomials over a coefficient field.
pub fn multivariate_gcd<C: FieldCoeff>(a: &MultiPoly<C>, b: &MultiPoly<C>) -> MultiPoly<C> {
    if a.is_zero() {
        return normalize(b);
    }
    if b.is_zero() {
        return normalize(a);
    }
    if a.is_constant() || b.is_constant() {
        let proto = a.prototype().or(b.prototype());
        return MultiPoly::constant(a.dimension(), proto.map_or_else(C::one, |p| p.one_like()));
    }
    let var = highest_variable(&[a, b]).expect("non-constant polynomials involve a variable");

    let cont_a = content(a, var);
    let cont_b = content(b, var);
    let pp_a = div_exact(a, &cont_a).expect("content divides");
    let pp_b = div_exact(b, &cont_b).expect("content divides");
    let cont_gcd = multivariate_gcd(&cont_a, &cont_b);

    // Primitive pseudo-remainder sequence in `var`.
    let (mut g, mut h) = if degree_in(&pp_a, var) >= degree_in(&pp_b, var) {
        (pp_a, pp_b)
    } else {
        (pp_b, pp_a)
    };
    loop {
        if h.is_zero() {
            break;
        }
        if degree_in(&h, var).unwrap_or(0) == 0 {
            // Coprime in `var`: only the content survives.
            return normalize(&cont_gcd);
        }
        let r = pseudo_rem(&g, &h, var);
        let r = if r.is_zero() {
            r
        } else {
            let c = content(&r, var);
            div_exact(&r, &c).expect("content divides")
        };
        g = h;
        h = r;
    }
    let g = div_exact(&g, &content(&g, var)).expect("content divides");
    normalize(&cont_gcd.mul(&g))
}

fn poly_characteristic<C: FieldCoeff>(f: &MultiPoly<C>) -> Option<u64> {
    f.terms().find_map(|(_, c)| c.characteristic())
}

/// Split `f` into pairwise-coprime monic squarefree parts by multiplicity:
/// `f = unit * prod_i parts[i].0 ^ parts[i].1`.
pub fn multiplicity_decompose<C: FieldCoeff>(
    f: &MultiPoly<C>,
) -> Result<(C, Vec<(MultiPoly<C>, u32)>)> {
    if f.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    let degree = f.degree().unwrap();
    if let Some(q) = poly_characteristic(f) {
        if degree >= q {
            return Err(Error::DegreeTooLarge { degree, q });
        }
    }
    let unit = f.leading_term().unwrap().1.clone();
    if f.is_constant() {
        return Ok((unit, Vec::new()));
    }
    let monic = normalize(f);

    // gcd of f with all of its partial derivatives collects every factor to
    // one power less than its multiplicity; deg f < char rules out factors
    // with identically zero derivatives.
    let mut deriv_gcd = MultiPoly::zero(f.dimension());
    for v in 0..f.dimension() {
        let d = monic.derivative(v);
        if !d.is_zero() {
            deriv_gcd = multivariate_gcd(&deriv_gcd, &d);
        }
    }
    let mut c = multivariate_gcd(&monic, &deriv_gcd);
    let mut w = div_exact(&monic, &c).expect("gcd divides");

    let mut parts = Vec::new();
    let mut multiplicity = 1u32;
    while !w.is_constant() {
        let y = multivariate_gcd(&w, &c);
        let u = div_exact(&w, &y).expect("gcd divides");
        if !u.is_constant() {
            parts.push((u, multiplicity));
        }
        c = div_exact(&c, &y).expect("gcd divides");
        w = y;
        multiplicity += 1;
    }
    Ok((unit, parts))
}

/// Write `f = g^delta * h` with `h` free of `delta`-th powers.
pub fn power_free_decompose<C: FieldCoeff>(
    f: &MultiPoly<C>,
    delta: u32,
) -> Result<(MultiPoly<C>, MultiPoly<C>)> {
    if delta == 0 {
        return Err(Error::InvalidRange("delta must be at least 1".into()));
    }
    let (unit, parts) = multiplicity_decompose(f)?;
    let n = f.dimension();
    let mut g = MultiPoly::constant(n, unit.one_like());
    let mut h = MultiPoly::constant(n, unit);
    for (part, mult) in parts {
        if mult / delta > 0 {
            g = g.mul(&part.pow(mult / delta));
        }
        if mult % delta > 0 {
            h = h.mul(&part.pow(mult % delta));
        }
    }
    Ok((g, h))
}


#[cfg(test)]
mod random_tests {
    use super::*;
    use crate::coeff::Fq;
    use crate::ff::PrimeField;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    fn random_poly<R: Rng>(rng: &mut R, n: usize, q: u64, max_deg: u32, terms: usize) -> MultiPoly<Fq> {
        let mut p = MultiPoly::zero(n);
        for _ in 0..terms {
            let mono = Monomial((0..n).map(|_| rng.gen_range(0..=max_deg)).collect());
            p.add_term(mono, Fq::new(rng.gen_range(0..q), q));
        }
        p
    }

    #[test]
    fn gcd_divides_and_absorbs_common_factors() {
        let mut rng = ChaCha12Rng::seed_from_u64(1234);
        for q in [3u64, 5, 7] {
            let field = PrimeField::new(q).unwrap();
            let _ = &field;
            for n in 1..=3usize {
                for _ in 0..30 {
                    let a = random_poly(&mut rng, n, q, 2, 3);
                    let b = random_poly(&mut rng, n, q, 2, 3);
                    let g = random_poly(&mut rng, n, q, 1, 2);
                    if a.is_zero() || b.is_zero() || g.is_zero() {
                        continue;
                    }
                    let big_a = a.mul(&g);
                    let big_b = b.mul(&g);
                    let d = multivariate_gcd(&big_a, &big_b);
                    // d divides both inputs.
                    assert!(div_exact(&big_a, &d).is_some(), "q={q} n={n}");
                    assert!(div_exact(&big_b, &d).is_some(), "q={q} n={n}");
                    // The planted common factor divides d.
                    assert!(div_exact(&d, &g).is_some(), "q={q} n={n}: {g} | {d}");
                    // Monic normalization.
                    assert_eq!(d.leading_term().unwrap().1.value(), 1);
                }
            }
        }
    }

    #[test]
    fn multiplicity_decompose_random_round_trip() {
        let mut rng = ChaCha12Rng::seed_from_u64(99);
        for q in [5u64, 7] {
            for _ in 0..25 {
                let n = rng.gen_range(1..=2usize);
                let u1 = random_poly(&mut rng, n, q, 1, 2);
                let u2 = random_poly(&mut rng, n, q, 1, 2);
                if u1.is_zero() || u2.is_zero() {
                    continue;
                }
                let f = u1.mul(&u2).mul(&u2);
                if f.is_zero() || f.degree().unwrap_or(0) >= q {
                    continue;
                }
                let Ok((unit, parts)) = multiplicity_decompose(&f) else {
                    continue;
                };
                let mut rebuilt = MultiPoly::constant(n, unit);
                for (part, mult) in &parts {
                    rebuilt = rebuilt.mul(&part.pow(*mult));
                    // Parts are squarefree within themselves and coprime to
                    // the others.
                    for (other, _) in &parts {
                        if other != part {
                            assert!(multivariate_gcd(part, other).is_constant());
                        }
                    }
                }
                assert_eq!(rebuilt, f, "q={q}");
            }
        }
    }
}
