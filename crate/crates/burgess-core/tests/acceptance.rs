//! Acceptance suite: one test per criterion, each printing a PASS line and
//! holding the stated tolerance and runtime budget.
//!
//! Run with `cargo test -p burgess-core --test acceptance -- --nocapture`.

use std::time::Instant;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use burgess_core::charsum::{
    complete_mult_sum, mixed_sum, verify_b_sum_lemma, verify_prod_lemma, BoxRegion, Collection,
    SampleMode,
};
use burgess_core::coeff::Fq;
use burgess_core::exponents::{beta_n, delta_savings, nontrivial_threshold};
use burgess_core::ff::{is_prime, ComplexAcc, DirichletCharacter, PrimeField};
use burgess_core::poly::{
    invariant_under_direction, is_admissible, is_inadmissible_gl, parse_poly,
    projective_directions, standard_rank, standard_weight, Monomial, MonomialSystem, MultiPoly,
    Verdict,
};
use burgess_core::vinogradov::{jr_bruteforce, jr_mitm, slope_check};
use burgess_core::{IntPoly, ModPoly, RealPoly};

const BUDGET: u64 = 1_000_000_000;

fn rational(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

fn elapsed_under(start: Instant, seconds: f64, what: &str) {
    let took = start.elapsed().as_secs_f64();
    assert!(
        took < seconds,
        "{what} took {took:.2}s, budget {seconds}s"
    );
}

#[test]
fn criterion_01_character_orthogonality() {
    let start = Instant::now();
    for q in 2..=50u64 {
        if !is_prime(q) {
            continue;
        }
        for order in 2..q {
            if (q - 1) % order != 0 {
                continue;
            }
            let chi = DirichletCharacter::new(q, order).unwrap();
            let mut acc = ComplexAcc::new();
            for a in 0..q {
                match chi.exponent_of(a) {
                    None => acc.add_zero_term(),
                    Some(_) => acc.add(chi.eval_residue(a)),
                }
            }
            assert!(
                acc.abs() < 1e-9 * q as f64,
                "orthogonality fails at q={q} order={order}: {}",
                acc.abs()
            );
            for a in 1..q {
                for b in 1..q {
                    let lhs = chi.eval_residue(a * b % q);
                    let rhs = chi.eval_residue(a) * chi.eval_residue(b);
                    assert!((lhs - rhs).norm() < 1e-12, "mult fails q={q} D={order}");
                }
                let pow = chi.eval_residue(a).powu(order as u32);
                assert!((pow - Complex64::new(1.0, 0.0)).norm() < 1e-12);
            }
            // Exact order: every smaller positive power is non-principal.
            for k in 1..order {
                let nontrivial = (1..q).any(|a| {
                    chi.exponent_of(a)
                        .map(|e| (e * k) % order != 0)
                        .unwrap_or(false)
                });
                assert!(nontrivial, "chi^{k} principal at q={q} order={order}");
            }
        }
    }
    elapsed_under(start, 5.0, "criterion 1");
    println!("acceptance criterion 01 (character orthogonality, q <= 50): PASS");
}

#[test]
fn criterion_02_system_closed_forms() {
    let start = Instant::now();
    for n in 1..=6usize {
        for d in 1..=6u32 {
            let sys = MonomialSystem::standard(n, d).unwrap();
            assert_eq!(sys.rank() as u64, standard_rank(n, d), "rank n={n} d={d}");
            assert_eq!(sys.weight(), standard_weight(n, d), "weight n={n} d={d}");
        }
    }
    let sys = MonomialSystem::standard(2, 2).unwrap();
    assert_eq!((sys.rank(), sys.weight()), (5, 8));
    elapsed_under(start, 1.0, "criterion 2");
    println!("acceptance criterion 02 (closed forms R, M for n,d <= 6): PASS");
}

/// Every nonzero homogeneous form of the given exact degree over F_q in two
/// variables, as integer polynomials with coefficients in [0, q).
fn all_binary_forms(degree: u32, q: u64) -> Vec<IntPoly> {
    let monos: Vec<Monomial> = (0..=degree)
        .map(|i| Monomial(vec![degree - i, i]))
        .collect();
    let count = q.pow(monos.len() as u32);
    let mut out = Vec::new();
    for code in 1..count {
        let mut rest = code;
        let mut terms = Vec::new();
        for m in &monos {
            let c = rest % q;
            rest /= q;
            if c != 0 {
                terms.push((m.clone(), BigInt::from(c)));
            }
        }
        if !terms.is_empty() {
            out.push(MultiPoly::from_terms(2, terms));
        }
    }
    out
}

fn has_invariant_direction(h: &ModPoly, field: &PrimeField) -> bool {
    projective_directions(field.q(), 2)
        .any(|v| invariant_under_direction(h, &v, field))
}

#[test]
fn criterion_03_admissibility_oracle_equivalence() {
    let start = Instant::now();

    // All binary forms of degree 1..=3 over F_3: the invariant-direction
    // criterion against the exhaustive GL_2(F_3) substitution search, on the
    // same reduced polynomial.
    let field3 = PrimeField::new(3).unwrap();
    let mut checked = 0u64;
    for degree in 1..=3u32 {
        for form in all_binary_forms(degree, 3) {
            let h = form.reduce_mod(&field3);
            if h.is_zero() {
                continue;
            }
            let by_direction = has_invariant_direction(&h, &field3);
            let by_gl = is_inadmissible_gl(&h, &field3).is_some();
            assert_eq!(by_direction, by_gl, "disagreement on {form} over F_3");
            checked += 1;
        }
    }
    assert_eq!(checked, 8 + 26 + 80, "form census over F_3");

    // 200 seeded random forms over F_5: the full admissibility pipeline
    // (power-free part, then direction search) against the GL oracle.
    let field5 = PrimeField::new(5).unwrap();
    let mut rng = ChaCha12Rng::seed_from_u64(2024);
    let mut done = 0;
    while done < 200 {
        let degree = rng.gen_range(1..=3u32);
        let monos: Vec<Monomial> = (0..=degree)
            .map(|i| Monomial(vec![degree - i, i]))
            .collect();
        let form: IntPoly = MultiPoly::from_terms(
            2,
            monos
                .iter()
                .map(|m| (m.clone(), BigInt::from(rng.gen_range(0..5u64)))),
        );
        if form.reduce_mod(&field5).is_zero() {
            continue;
        }
        let report = is_admissible(&form, &field5, 2).unwrap();
        assert_ne!(report.verdict, Verdict::Indeterminate, "deg <= 3 < 5");
        let h = &report.delta_free_part;
        let by_gl = if h.is_constant() {
            true
        } else {
            is_inadmissible_gl(h, &field5).is_some()
        };
        assert_eq!(
            report.verdict == Verdict::NotAdmissible,
            by_gl,
            "disagreement on {form} over F_5"
        );
        done += 1;
    }
    elapsed_under(start, 120.0, "criterion 3");
    println!("acceptance criterion 03 (admissibility oracle equivalence): PASS");
}

#[test]
fn criterion_04_box_sum_identity() {
    let start = Instant::now();
    let mut rng = ChaCha12Rng::seed_from_u64(41);

    // Exhaustive at (n,d,K) = (2,1,2): both the r=1 (Q=4, 16 collections)
    // and r=2 (Q=8, 256 collections) readings.
    let sys = MonomialSystem::standard(2, 1).unwrap();
    let rep1 = verify_prod_lemma(&sys, 1, 2, SampleMode::Exhaustive, None, BUDGET, &mut rng)
        .unwrap();
    assert_eq!((rep1.q, rep1.checked), (4, 16));
    assert!(rep1.passed() && rep1.wraparound == 0);
    let rep2 = verify_prod_lemma(&sys, 2, 2, SampleMode::Exhaustive, None, BUDGET, &mut rng)
        .unwrap();
    assert_eq!((rep2.q, rep2.checked), (8, 256));
    assert!(rep2.passed() && rep2.wraparound == 0);
    assert!(rep1.max_deviation < 1e-6 && rep2.max_deviation < 1e-6);

    // 1000 seeded samples at (n,d,r,K) = (2,2,2,2), Q = 8.
    let sys22 = MonomialSystem::standard(2, 2).unwrap();
    let rep3 = verify_prod_lemma(
        &sys22,
        2,
        2,
        SampleMode::Sampled { count: 1000 },
        None,
        BUDGET,
        &mut rng,
    )
    .unwrap();
    assert_eq!(rep3.q, 8);
    assert_eq!(rep3.checked, 1000);
    assert!(rep3.passed() && rep3.max_deviation < 1e-6);
    elapsed_under(start, 60.0, "criterion 4");
    println!("acceptance criterion 04 (exact additive box-sum identity): PASS");
}

#[test]
fn criterion_05_count_oracle_equivalence() {
    let start = Instant::now();
    for n in 1..=2usize {
        for d in 1..=2u32 {
            let sys = MonomialSystem::standard(n, d).unwrap();
            for r in 1..=2u64 {
                for x in 1..=4u64 {
                    let brute = jr_bruteforce(&sys, r, x, BUDGET).unwrap().count;
                    let mitm = jr_mitm(&sys, r, x, BUDGET).unwrap().count;
                    assert_eq!(brute, mitm, "n={n} d={d} r={r} X={x}");
                }
            }
        }
    }
    let sys = MonomialSystem::standard(2, 1).unwrap();
    assert_eq!(
        jr_mitm(&sys, 2, 2, BUDGET).unwrap().count.to_u64(),
        Some(36)
    );
    elapsed_under(start, 120.0, "criterion 5");
    println!("acceptance criterion 05 (count oracle equivalence + J = 36): PASS");
}

#[test]
fn criterion_06_count_growth_exponent() {
    let start = Instant::now();
    let sys = MonomialSystem::standard(2, 1).unwrap();
    let report = slope_check(&sys, 2, &[10, 20, 40], BUDGET).unwrap();
    assert_eq!(report.predicted.exponent, 6);
    assert!(
        (report.slope - 6.0).abs() <= 0.3,
        "fitted slope {} outside 6 +- 0.3",
        report.slope
    );
    elapsed_under(start, 300.0, "criterion 6");
    println!(
        "acceptance criterion 06 (log-log slope {:.3} within 0.3 of 6): PASS",
        report.slope
    );
}

#[test]
fn criterion_07_exponent_calculus_exactness() {
    let start = Instant::now();
    assert_eq!(nontrivial_threshold(2, 1, 5).unwrap(), rational(5, 12));
    assert_eq!(beta_n(2), rational(1, 3));
    assert_eq!(beta_n(3), rational(3, 8));

    let kappa = rational(1, 50);
    let rep = delta_savings(2, 1, &kappa, None).unwrap();
    assert_eq!(rep.r_used, 17);
    assert_eq!(rep.delta, rational(17, 23800));
    assert!((rep.delta.to_f64().unwrap() - 7.143e-4).abs() < 1e-6);

    let kappa = rational(1, 1000);
    let rep = delta_savings(2, 1, &kappa, None).unwrap();
    let ratio = rep.delta.to_f64().unwrap() / 1e-6;
    let target = 9.0 / 4.0;
    assert!(
        (ratio - target).abs() <= 0.1 * target,
        "delta/kappa^2 = {ratio} vs {target}"
    );
    elapsed_under(start, 1.0, "criterion 7");
    println!("acceptance criterion 07 (exact exponent calculus): PASS");
}

#[test]
fn criterion_08_b_sum_inequality() {
    let start = Instant::now();
    let mut rng = ChaCha12Rng::seed_from_u64(88);
    let mut gate_passing = 0u64;
    let mut violations = 0u64;
    while gate_passing < 1000 {
        let n = rng.gen_range(2..=4usize);
        let r = rng.gen_range(n as u64..=20);
        let q = loop {
            let c = rng.gen_range(2..=10_000u64);
            if is_prime(c) {
                break c;
            }
        };
        let report = verify_b_sum_lemma(n, r, q, 64, 8, &mut rng).unwrap();
        gate_passing += report.checked;
        violations += report.violations;
    }
    assert_eq!(violations, 0, "B-sum inequality violated");
    elapsed_under(start, 10.0, "criterion 8");
    println!(
        "acceptance criterion 08 (B-sum inequality, {gate_passing} gated samples, 0 violations): PASS"
    );
}

#[test]
fn criterion_09_full_period_mixed_sum() {
    let start = Instant::now();
    for q in [5u64, 13, 101] {
        let chi = DirichletCharacter::new(q, 2).unwrap();
        let form: IntPoly = parse_poly("x1*x2", 2).unwrap();
        let phase = RealPoly::zero(2);
        let region = BoxRegion::new(vec![0, 0], vec![q, q]).unwrap();
        let s = mixed_sum(&form, &phase, &chi, &region, BUDGET).unwrap();
        assert!(
            s.abs() < 1e-9 * (q * q) as f64,
            "full-period sum at q={q}: {}",
            s.abs()
        );
    }
    elapsed_under(start, 30.0, "criterion 9");
    println!("acceptance criterion 09 (full-period mixed sum vanishes): PASS");
}

#[test]
fn criterion_10_complete_sum_closed_value() {
    let start = Instant::now();
    let chi = DirichletCharacter::new(5, 2).unwrap();
    let form: IntPoly = parse_poly("x1*x2", 2).unwrap();
    for r in [1usize, 2] {
        let collection = Collection::new(vec![vec![3, 1]; 2 * r]).unwrap();
        let s = complete_mult_sum(&form, &collection, &chi, BUDGET).unwrap();
        assert!(
            (s.value() - Complex64::new(16.0, 0.0)).norm() < 1e-9,
            "r = {r}: {}",
            s.value()
        );
    }
    elapsed_under(start, 1.0, "criterion 10");
    println!("acceptance criterion 10 (complete sum equals 16): PASS");
}

// Criterion 11 (byte-identical CLI runs) lives in the CLI crate's own
// acceptance suite, next to the binary it exercises.

#[test]
fn cross_check_residue_scalars_stay_exact() {
    // Companion sanity for the suite: residue arithmetic used throughout the
    // criteria is exact.
    let field = PrimeField::new(13).unwrap();
    for a in 0..13u64 {
        for b in 0..13u64 {
            let x = Fq::new(a, 13) * Fq::new(b, 13);
            assert_eq!(x.value(), a * b % 13);
        }
    }
    let _ = field;
}
