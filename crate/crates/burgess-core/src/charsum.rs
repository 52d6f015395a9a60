//! Incomplete mixed sums, complete multiplicative sums, the additive box
//! sum with its exact product identity, and the stratification audit.
//!
//! Collections carry the alternating sign pattern `eps(j) = (-1)^(j+1)` and
//! the exponent pattern `delta(j)` (1 at odd positions, `order - 1` at even
//! positions, counting from 1). Complete sums are accumulated as integer
//! multiplicities of the `order`-th roots of unity and combined once at the
//! end, so results are bitwise deterministic for any thread count.

use num_bigint::BigUint;
use num_complex::Complex64;
use num_traits::One;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponents::theta_floor;
use crate::ff::{e_unit, ComplexAcc, DirichletCharacter};
use crate::poly::{product_polynomial, Monomial, MonomialSystem};
use crate::util::biguint_ln;
use crate::{IntPoly, RealPoly};

/// Default term budget for enumeration loops.
pub const DEFAULT_BUDGET: u64 = 1_000_000_000;

/// A half-open integer box `(N, N+H]` in `n` coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoxRegion {
    pub offset: Vec<i64>,
    pub sides: Vec<u64>,
}

impl BoxRegion {
    pub fn new(offset: Vec<i64>, sides: Vec<u64>) -> Result<Self> {
        if offset.len() != sides.len() || sides.is_empty() || sides.contains(&0) {
            return Err(Error::InvalidRange(
                "box needs matching offset/side arity and sides >= 1".into(),
            ));
        }
        Ok(BoxRegion { offset, sides })
    }

    pub fn dimension(&self) -> usize {
        self.sides.len()
    }

    /// Number of lattice points.
    pub fn volume(&self) -> u128 {
        self.sides.iter().map(|&h| h as u128).product()
    }
}

/// An ordered collection of `2r` points of `Z^n`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Collection {
    pub points: Vec<Vec<i64>>,
}

impl Collection {
    pub fn new(points: Vec<Vec<i64>>) -> Result<Self> {
        if points.is_empty() || points.len() % 2 != 0 {
            return Err(Error::InvalidRange(
                "a collection has a positive even number of points".into(),
            ));
        }
        let n = points[0].len();
        if points.iter().any(|p| p.len() != n) {
            return Err(Error::InvalidRange(
                "all collection points share one dimension".into(),
            ));
        }
        Ok(Collection { points })
    }

    pub fn r(&self) -> usize {
        self.points.len() / 2
    }

    pub fn dimension(&self) -> usize {
        self.points[0].len()
    }

    /// `(-1)^(j+1)` for the 1-based position `j`; takes the 0-based index.
    pub fn epsilon(index: usize) -> i64 {
        if index % 2 == 0 {
            1
        } else {
            -1
        }
    }

    /// The signed moment `sum_j eps(j) (x_j)^beta` as an exact integer.
    pub fn signed_moment(&self, beta: &Monomial) -> i128 {
        self.points
            .iter()
            .enumerate()
            .map(|(j, p)| Self::epsilon(j) as i128 * beta.eval_int(p))
            .sum()
    }
}

/// Decode the `index`-th collection of `two_r` points in the box
/// `(0, sides]`, as a mixed-radix odometer (last coordinate fastest).
pub fn collection_from_index(index: u128, sides: &[u64], two_r: usize) -> Collection {
    let n = sides.len();
    let mut rest = index;
    let mut points = vec![vec![0i64; n]; two_r];
    for j in (0..two_r).rev() {
        for i in (0..n).rev() {
            let base = sides[i] as u128;
            points[j][i] = (rest % base) as i64 + 1;
            rest /= base;
        }
    }
    Collection { points }
}

/// Number of collections of `two_r` points in `(0, sides]`.
pub fn collections_in_box(sides: &[u64], two_r: usize) -> u128 {
    let points: u128 = sides.iter().map(|&k| k as u128).product();
    points.pow(two_r as u32)
}

fn check_budget(task: &'static str, required: u128, budget: u64) -> Result<()> {
    if required > budget as u128 {
        return Err(Error::BudgetExceeded {
            task,
            required,
            budget: budget as u128,
        });
    }
    Ok(())
}

/// Integer tallies of the `order`-th root-of-unity classes hit by a sum.
struct RootClassTally {
    counts: Vec<u64>,
    zeros: u64,
}

impl RootClassTally {
    fn new(order: u64) -> Self {
        RootClassTally {
            counts: vec![0; order as usize],
            zeros: 0,
        }
    }

    fn record(&mut self, class: Option<u64>) {
        match class {
            None => self.zeros += 1,
            Some(k) => self.counts[k as usize] += 1,
        }
    }

    fn into_acc(self, order: u64) -> ComplexAcc {
        let mut acc = ComplexAcc::new();
        acc.add_root_classes(&self.counts, order);
        acc.term_count += self.zeros;
        acc
    }
}

/// `S(F, g; N, H) = sum_{x in (N, N+H]} e(g(x)) chi(F(x))`, summed in
/// lexicographic order over the box.
pub fn mixed_sum(
    form: &IntPoly,
    phase: &RealPoly,
    chi: &DirichletCharacter,
    region: &BoxRegion,
    budget: u64,
) -> Result<ComplexAcc> {
    let n = region.dimension();
    assert_eq!(form.dimension(), n);
    assert_eq!(phase.dimension(), n);
    check_budget("mixed sum enumeration", region.volume(), budget)?;

    let field = chi.field();
    let reduced = form.reduce_mod(field);
    let order = chi.order();

    let mut acc = ComplexAcc::new();
    let mut x: Vec<i64> = region.offset.iter().map(|&o| o + 1).collect();
    let mut residues: Vec<u64> = x.iter().map(|&c| field.reduce(c)).collect();
    loop {
        let value = reduced.eval_residues(field, &residues);
        match chi.exponent_of(value) {
            None => acc.add_zero_term(),
            Some(class) => {
                let t = phase.eval_real(&x) + class as f64 / order as f64;
                acc.add(e_unit(t));
            }
        }
        // Lexicographic odometer, last coordinate fastest.
        let mut i = n;
        loop {
            if i == 0 {
                return Ok(acc);
            }
            i -= 1;
            if x[i] < region.offset[i] + region.sides[i] as i64 {
                x[i] += 1;
                residues[i] = field.reduce(x[i]);
                break;
            }
            x[i] = region.offset[i] + 1;
            residues[i] = field.reduce(x[i]);
        }
    }
}

/// Complete multiplicative sum of a collection:
/// `sum_{m mod q} chi(F_{{x}}(m))` with `F_{{x}}` the shifted product
/// polynomial.
pub fn complete_mult_sum(
    form: &IntPoly,
    collection: &Collection,
    chi: &DirichletCharacter,
    budget: u64,
) -> Result<ComplexAcc> {
    let n = form.dimension();
    let field = chi.field();
    let q = field.q();
    check_budget(
        "complete sum over (Z/q)^n",
        (q as u128).pow(n as u32),
        budget,
    )?;

    let prod = product_polynomial(form, &collection.points, chi.order(), field);
    let order = chi.order();
    let mut tally = RootClassTally::new(order);
    let mut m = vec![0u64; n];
    loop {
        let value = prod.eval_residues(field, &m);
        tally.record(chi.exponent_of(value));
        let mut i = n;
        loop {
            if i == 0 {
                return Ok(tally.into_acc(order));
            }
            i -= 1;
            if m[i] + 1 < q {
                m[i] += 1;
                break;
            }
            m[i] = 0;
        }
    }
}

/// The same sum computed termwise as
/// `sum_m prod_j chi(F(m + x_j))^{delta(j)}`; agreement of the two routes is
/// asserted in tests.
pub fn complete_mult_sum_pointwise(
    form: &IntPoly,
    collection: &Collection,
    chi: &DirichletCharacter,
    budget: u64,
) -> Result<ComplexAcc> {
    let table = CharClassTable::build(form, chi, budget)?;
    Ok(table.mult_sum(collection))
}

/// Exponent classes of `chi(F(m))` over the full grid `(Z/q)^n`: the shared
/// work of collection-indexed complete sums.
pub struct CharClassTable<'a> {
    chi: &'a DirichletCharacter,
    n: usize,
    /// Class of `F(m)` in `0..order`, with `order` as the zero marker.
    classes: Vec<u32>,
}

impl<'a> CharClassTable<'a> {
    pub fn build(
        form: &IntPoly,
        chi: &'a DirichletCharacter,
        budget: u64,
    ) -> Result<CharClassTable<'a>> {
        let n = form.dimension();
        let field = chi.field();
        let q = field.q();
        let size = (q as u128).pow(n as u32);
        check_budget("character class table over (Z/q)^n", size, budget)?;
        let reduced = form.reduce_mod(field);
        let order = chi.order() as u32;
        let mut classes = vec![0u32; size as usize];
        let mut m = vec![0u64; n];
        for slot in classes.iter_mut() {
            let value = reduced.eval_residues(field, &m);
            *slot = match chi.exponent_of(value) {
                None => order,
                Some(k) => k as u32,
            };
            let mut i = n;
            while i > 0 {
                i -= 1;
                if m[i] + 1 < q {
                    m[i] += 1;
                    break;
                }
                m[i] = 0;
            }
        }
        Ok(CharClassTable { chi, n, classes })
    }

    fn index_of(&self, m: &[u64]) -> usize {
        let q = self.chi.q();
        let mut idx = 0usize;
        for &c in m {
            idx = idx * q as usize + c as usize;
        }
        idx
    }

    /// `sum_{m mod q} prod_j chi(F(m + x_j))^{delta(j)}` for one collection.
    pub fn mult_sum(&self, collection: &Collection) -> ComplexAcc {
        let q = self.chi.q();
        let order = self.chi.order();
        let shifts: Vec<Vec<u64>> = collection
            .points
            .iter()
            .map(|p| p.iter().map(|&c| self.chi.field().reduce(c)).collect())
            .collect();
        let mut tally = RootClassTally::new(order);
        let mut m = vec![0u64; self.n];
        let mut shifted = vec![0u64; self.n];
        'grid: loop {
            let mut class = 0u64;
            let mut vanished = false;
            for (j, shift) in shifts.iter().enumerate() {
                for i in 0..self.n {
                    shifted[i] = (m[i] + shift[i]) % q;
                }
                let k = self.classes[self.index_of(&shifted)];
                if k as u64 == order {
                    vanished = true;
                    break;
                }
                let delta = if j % 2 == 0 { 1 } else { order - 1 };
                class = (class + delta * k as u64) % order;
            }
            tally.record(if vanished { None } else { Some(class) });
            let mut i = self.n;
            loop {
                if i == 0 {
                    break 'grid;
                }
                i -= 1;
                if m[i] + 1 < q {
                    m[i] += 1;
                    break;
                }
                m[i] = 0;
            }
        }
        tally.into_acc(order)
    }
}

/// `Q^degree` with an overflow guard.
fn modulus_power(q: u64, degree: u64) -> Result<u128> {
    let mut acc: u128 = 1;
    for _ in 0..degree {
        acc = acc
            .checked_mul(q as u128)
            .ok_or(Error::InvalidRange("partition modulus overflows".into()))?;
    }
    Ok(acc)
}

fn partition_vertex_count(system: &MonomialSystem, q: u64) -> Result<u128> {
    modulus_power(q, system.weight())
}

/// The box partition of the coefficient torus: `Q^M` cells addressed by
/// their distinguished vertices.
#[derive(Clone, Debug)]
pub struct BoxPartition {
    pub system: MonomialSystem,
    pub q: u64,
}

impl BoxPartition {
    pub fn new(system: MonomialSystem, q: u64) -> Result<Self> {
        if q == 0 {
            return Err(Error::InvalidRange("partition parameter Q >= 1".into()));
        }
        Ok(BoxPartition { system, q })
    }

    /// Total number of distinguished vertices, `Q^M`.
    pub fn vertex_count(&self) -> BigUint {
        BigUint::from(self.q).pow(self.system.weight() as u32)
    }

    /// The vertex coordinates `theta_beta = c_beta Q^(-|beta|)` for a
    /// c-vector produced by [`BoxPartition::vertices`].
    pub fn theta_of(&self, c_values: &[u64]) -> Vec<f64> {
        self.system
            .exponents()
            .iter()
            .zip(c_values)
            .map(|(beta, &c)| {
                let m = modulus_power(self.q, beta.total_degree()).expect("radius overflow");
                c as f64 / m as f64
            })
            .collect()
    }

    /// Iterate the integer coordinates `c_beta` of the distinguished
    /// vertices, aligned with `system.exponents()`; the constant coordinate
    /// is pinned to zero and omitted.
    pub fn vertices(&self) -> impl Iterator<Item = Vec<u64>> + '_ {
        let radii: Vec<u128> = self
            .system
            .exponents()
            .iter()
            .map(|b| modulus_power(self.q, b.total_degree()).expect("vertex radius overflow"))
            .collect();
        let mut current: Option<Vec<u64>> = Some(vec![0; radii.len()]);
        std::iter::from_fn(move || {
            let out = current.clone()?;
            let cur = current.as_mut().unwrap();
            let mut i = radii.len();
            loop {
                if i == 0 {
                    current = None;
                    break;
                }
                i -= 1;
                if (cur[i] as u128) + 1 < radii[i] {
                    cur[i] += 1;
                    for w in &mut cur[i + 1..] {
                        *w = 0;
                    }
                    break;
                }
                cur[i] = 0;
            }
            Some(out)
        })
    }
}

/// The additive box sum `Sigma_add = sum_alpha e(sum_j eps(j)
/// theta_alpha(x_j))`, evaluated through its factorization into one
/// geometric sum per monomial.
pub fn additive_box_sum(
    system: &MonomialSystem,
    q: u64,
    collection: &Collection,
    budget: u64,
) -> Result<ComplexAcc> {
    check_budget(
        "additive box sum vertices",
        partition_vertex_count(system, q)?,
        budget,
    )?;
    let mut product = Complex64::new(1.0, 0.0);
    let mut terms = 0u64;
    for beta in system.exponents() {
        let modulus = modulus_power(q, beta.total_degree())?;
        let s = collection.signed_moment(beta);
        let mut factor = Complex64::new(0.0, 0.0);
        for c in 0..modulus {
            let phase = (c as i128 * s).rem_euclid(modulus as i128) as u128;
            factor += e_unit(phase as f64 / modulus as f64);
            terms += 1;
        }
        product *= factor;
    }
    Ok(ComplexAcc {
        re: product.re,
        im: product.im,
        term_count: terms,
    })
}

/// Oracle: direct enumeration of all `Q^M` distinguished vertices.
pub fn additive_box_sum_direct(
    system: &MonomialSystem,
    q: u64,
    collection: &Collection,
    budget: u64,
) -> Result<ComplexAcc> {
    check_budget(
        "additive box sum vertices",
        partition_vertex_count(system, q)?,
        budget,
    )?;
    let partition = BoxPartition::new(system.clone(), q)?;
    let moments: Vec<i128> = system
        .exponents()
        .iter()
        .map(|b| collection.signed_moment(b))
        .collect();
    let moduli: Vec<u128> = system
        .exponents()
        .iter()
        .map(|b| modulus_power(q, b.total_degree()))
        .collect::<Result<_>>()?;
    let mut acc = ComplexAcc::new();
    for vertex in partition.vertices() {
        let mut phase = 0.0f64;
        for ((&c, &s), &m) in vertex.iter().zip(&moments).zip(&moduli) {
            let num = (c as i128 * s).rem_euclid(m as i128) as u128;
            phase += num as f64 / m as f64;
        }
        acc.add(e_unit(phase));
    }
    Ok(acc)
}

/// Indicator of the signed moment-vanishing set: exact vanishing, or
/// vanishing mod `Q^{|beta|}` when `modulus` is given.
pub fn xi_indicator(system: &MonomialSystem, collection: &Collection, modulus: Option<u64>) -> bool {
    system.exponents().iter().all(|beta| {
        let s = collection.signed_moment(beta);
        match modulus {
            None => s == 0,
            Some(q) => {
                let m = modulus_power(q, beta.total_degree()).expect("modulus overflow") as i128;
                s.rem_euclid(m) == 0
            }
        }
    })
}

/// How collections are drawn for a verification run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub enum SampleMode {
    Exhaustive,
    Sampled { count: u64 },
}

/// Report of the exact box-sum identity check.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProdLemmaReport {
    pub system: String,
    pub r: usize,
    pub k: u64,
    pub q: u64,
    pub checked: u64,
    pub violations: u64,
    pub first_violation: Option<Collection>,
    /// Collections where the mod-Q indicator differs from the exact one;
    /// possible only when `Q` is overridden below the `2rK` threshold.
    pub wraparound: u64,
    pub first_wraparound: Option<Collection>,
    pub max_deviation: f64,
}

impl ProdLemmaReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// Check `Sigma_add = Q^M Xi` on collections from `(0, k]^{2r}`, with
/// `Q = 2rk` unless overridden.
pub fn verify_prod_lemma<R: Rng>(
    system: &MonomialSystem,
    r: usize,
    k: u64,
    mode: SampleMode,
    q_override: Option<u64>,
    budget: u64,
    rng: &mut R,
) -> Result<ProdLemmaReport> {
    let q = q_override.unwrap_or(2 * r as u64 * k);
    if q == 0 || r == 0 || k == 0 {
        return Err(Error::InvalidRange(
            "prod-lemma check needs Q >= 1, r >= 1 and K >= 1".into(),
        ));
    }
    let sides = vec![k; system.dimension()];
    let total = collections_in_box(&sides, 2 * r);
    let q_m = partition_vertex_count(system, q)?;
    check_budget("box partition per collection", q_m, budget)?;

    let indices: Vec<u128> = match mode {
        SampleMode::Exhaustive => {
            check_budget("exhaustive collections", total, budget)?;
            (0..total).collect()
        }
        SampleMode::Sampled { count } => (0..count).map(|_| rng.gen::<u128>() % total).collect(),
    };

    // Under the size hypothesis Q >= 2rK the mod-Q indicator must agree
    // with the exact one; a disagreement there is an identity violation.
    let hypothesis_holds = q >= 2 * r as u64 * k;
    let scale = q_m as f64;
    let mut report = ProdLemmaReport {
        system: system.descriptor(),
        r,
        k,
        q,
        checked: 0,
        violations: 0,
        first_violation: None,
        wraparound: 0,
        first_wraparound: None,
        max_deviation: 0.0,
    };
    for index in indices {
        let collection = collection_from_index(index, &sides, 2 * r);
        let xi = xi_indicator(system, &collection, None);
        let xi_q = xi_indicator(system, &collection, Some(q));
        let sadd = additive_box_sum(system, q, &collection, budget)?;
        let expected = if xi { scale } else { 0.0 };
        let deviation = (sadd.value() - Complex64::new(expected, 0.0)).norm();
        report.checked += 1;
        report.max_deviation = report.max_deviation.max(deviation / scale);
        if deviation >= 1e-6 * scale || (hypothesis_holds && xi != xi_q) {
            // An honest identity failure is an error; with Q forced below
            // the 2rK threshold the run is diagnostic and only reports.
            if hypothesis_holds {
                return Err(Error::IdentityViolation {
                    deviation: deviation / scale,
                    points: collection.points.clone(),
                });
            }
            report.violations += 1;
            if report.first_violation.is_none() {
                report.first_violation = Some(collection.clone());
            }
        }
        if xi != xi_q {
            report.wraparound += 1;
            if report.first_wraparound.is_none() {
                report.first_wraparound = Some(collection.clone());
            }
        }
    }
    Ok(report)
}

/// The stratification count ceiling `B_{n,r}(j; k)` for sorted sides `k`.
pub fn b_function(n: usize, r: u64, j: usize, k: &[u64]) -> Result<BigUint> {
    if n < 2 || r < n as u64 || j > n || k.len() != n {
        return Err(Error::InvalidRange(format!(
            "b_function needs r >= n >= 2 and 0 <= j <= n, got n={n}, r={r}, j={j}"
        )));
    }
    if k.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::UnsortedSides);
    }
    let theta = theta_floor(n, r)?;
    let k1 = BigUint::from(k[0]);
    Ok(if j == 0 {
        BigUint::one()
    } else if j <= n - 2 {
        k1.pow((j as u64 * theta) as u32)
    } else if j == n - 1 {
        k1.pow((r - 1) as u32)
    } else if n % 2 == 0 {
        let prod: BigUint = k[..n / 2].iter().map(|&v| BigUint::from(v)).product();
        prod.pow(2 * r as u32)
    } else {
        let prod: BigUint = k[..(n - 1) / 2]
            .iter()
            .map(|&v| BigUint::from(v))
            .product();
        prod.pow(2 * r as u32) * BigUint::from(k[(n - 1) / 2]).pow(r as u32)
    })
}

/// Report of the numeric B-sum inequality check.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BSumReport {
    pub n: usize,
    pub r: u64,
    pub q: u64,
    pub trials: u64,
    pub checked: u64,
    /// Samples failing the hypothesis `q^(1/2) K_1^(-Theta) <= 1`.
    pub skipped: u64,
    pub violations: u64,
    pub max_ratio: f64,
}

/// Sample sorted side tuples and check
/// `sum_j q^(j/2) B(j;K)^(-1) <= n q^(1/2) K_1^(-Theta)` together with the
/// geometric-series bound on the partial sum over `j <= n-1`.
pub fn verify_b_sum_lemma<R: Rng>(
    n: usize,
    r: u64,
    q: u64,
    k_max: u64,
    trials: u64,
    rng: &mut R,
) -> Result<BSumReport> {
    if n < 2 || r < n as u64 || k_max == 0 {
        return Err(Error::InvalidRange(format!(
            "b-sum check needs r >= n >= 2 and k_max >= 1, got n={n}, r={r}, k_max={k_max}"
        )));
    }
    let theta = theta_floor(n, r)?;
    let mut report = BSumReport {
        n,
        r,
        q,
        trials,
        checked: 0,
        skipped: 0,
        violations: 0,
        max_ratio: 0.0,
    };
    let ln_q = (q as f64).ln();
    for _ in 0..trials {
        let mut k: Vec<u64> = (0..n).map(|_| rng.gen_range(1..=k_max)).collect();
        k.sort_unstable();
        // x = q^(1/2) K_1^(-Theta), through logs for range safety.
        let ln_x = 0.5 * ln_q - theta as f64 * (k[0] as f64).ln();
        if ln_x > 0.0 {
            report.skipped += 1;
            continue;
        }
        let x = ln_x.exp();
        let mut lhs = 0.0f64;
        let mut lhs_head = 0.0f64;
        for j in 1..=n {
            let b = b_function(n, r, j, &k)?;
            let term = (j as f64 / 2.0 * ln_q - biguint_ln(&b)).exp();
            lhs += term;
            if j < n {
                lhs_head += term;
            }
        }
        let rhs = n as f64 * x;
        let geometric: f64 = (1..=n - 1).map(|j| x.powi(j as i32)).sum();
        report.checked += 1;
        report.max_ratio = report.max_ratio.max(lhs / rhs);
        let tol = 1e-9;
        if lhs > rhs * (1.0 + tol) || lhs_head > geometric * (1.0 + tol) {
            return Err(Error::InequalityViolation { lhs, rhs, sides: k });
        }
    }
    Ok(report)
}

/// One row of the stratification audit.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StratifyRow {
    pub j: usize,
    pub threshold: f64,
    pub count: u64,
    pub ceiling: f64,
    pub ratio: f64,
}

/// Outcome of the stratification audit for one form and box.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Stratify {
    pub system: String,
    pub r: u64,
    pub sides: Vec<u64>,
    pub c_threshold: f64,
    pub c_ceiling: f64,
    pub total: u64,
    pub rows: Vec<StratifyRow>,
    /// Exceedance tallies restricted to the moment-vanishing set, indexed by
    /// `j = 0..=n`; entry 0 is `|V_r ∩ box|`.
    pub vr_counts: Vec<u64>,
    /// Histogram of `|Sigma_mult| / q^(n/2)` in bins of width 1/2.
    pub histogram: Vec<u64>,
}

/// Mode of collection enumeration for the audit.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub enum StratifyMode {
    Exhaustive,
    Sampled { count: u64 },
}

/// Tally `|Sigma_mult|` exceedances of the thresholds `C q^((n+j-1)/2)`
/// over collections in `(0, sides]^{2r}`.
///
/// The constants of the stratification theorem are inputs: exceedances are
/// reported against the supplied thresholds and ceilings, never asserted.
pub fn stratify_audit<R: Rng>(
    form: &IntPoly,
    chi: &DirichletCharacter,
    system: &MonomialSystem,
    r: u64,
    sides: &[u64],
    c_threshold: f64,
    c_ceiling: f64,
    mode: StratifyMode,
    budget: u64,
    rng: &mut R,
) -> Result<Stratify> {
    let n = form.dimension();
    assert_eq!(sides.len(), n);
    let q = chi.q();
    let total = collections_in_box(sides, 2 * r as usize);
    let qn = (q as u128).pow(n as u32);

    let indices: Vec<u128> = match mode {
        StratifyMode::Exhaustive => {
            check_budget("stratification audit", total.saturating_mul(qn), budget)?;
            (0..total).collect()
        }
        StratifyMode::Sampled { count } => {
            check_budget(
                "stratification audit",
                (count as u128).saturating_mul(qn),
                budget,
            )?;
            (0..count).map(|_| rng.gen::<u128>() % total).collect()
        }
    };

    let table = CharClassTable::build(form, chi, budget)?;
    let thresholds: Vec<f64> = (1..=n)
        .map(|j| c_threshold * (q as f64).powf((n + j - 1) as f64 / 2.0))
        .collect();
    let half_power = (q as f64).powf(n as f64 / 2.0);

    // Fixed-size chunks keep the work split independent of the thread
    // count; every per-chunk quantity is an integer tally, so the merge is
    // order-insensitive.
    const CHUNK: usize = 1024;
    let chunks: Vec<&[u128]> = indices.chunks(CHUNK).collect();
    let partials: Vec<(Vec<u64>, Vec<u64>, Vec<u64>)> = chunks
        .par_iter()
        .map(|chunk| {
            let mut counts = vec![0u64; n];
            let mut vr_counts = vec![0u64; n + 1];
            let mut histogram = vec![0u64; 64];
            for &index in *chunk {
                let collection = collection_from_index(index, sides, 2 * r as usize);
                let magnitude = table.mult_sum(&collection).abs();
                let in_vr = xi_indicator(system, &collection, None);
                if in_vr {
                    vr_counts[0] += 1;
                }
                for (j, &t) in thresholds.iter().enumerate() {
                    if magnitude > t {
                        counts[j] += 1;
                        if in_vr {
                            vr_counts[j + 1] += 1;
                        }
                    }
                }
                let bin = ((magnitude / half_power) / 0.5) as usize;
                let last = histogram.len() - 1;
                histogram[bin.min(last)] += 1;
            }
            (counts, vr_counts, histogram)
        })
        .collect();

    let mut counts = vec![0u64; n];
    let mut vr_counts = vec![0u64; n + 1];
    let mut histogram = vec![0u64; 64];
    for (c, v, h) in partials {
        for (a, b) in counts.iter_mut().zip(c) {
            *a += b;
        }
        for (a, b) in vr_counts.iter_mut().zip(v) {
            *a += b;
        }
        for (a, b) in histogram.iter_mut().zip(h) {
            *a += b;
        }
    }

    let mut sorted = sides.to_vec();
    sorted.sort_unstable();
    let ln_norm: f64 = 2.0 * r as f64 * sides.iter().map(|&k| (k as f64).ln()).sum::<f64>();
    let rows = (1..=n)
        .map(|j| {
            let b = b_function(n, r, j, &sorted)?;
            let ceiling = (c_ceiling.ln() + ln_norm - biguint_ln(&b)).exp();
            Ok(StratifyRow {
                j,
                threshold: thresholds[j - 1],
                count: counts[j - 1],
                ceiling,
                ratio: counts[j - 1] as f64 / ceiling,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(Stratify {
        system: system.descriptor(),
        r,
        sides: sides.to_vec(),
        c_threshold,
        c_ceiling,
        total: indices.len() as u64,
        rows,
        vr_counts,
        histogram,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::parse_poly;
    use num_bigint::BigInt;
    use num_traits::ToPrimitive;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn form(text: &str, n: usize) -> IntPoly {
        parse_poly::<BigInt>(text, n).unwrap()
    }

    fn zero_phase(n: usize) -> RealPoly {
        RealPoly::zero(n)
    }

    fn legendre(q: u64) -> DirichletCharacter {
        DirichletCharacter::new(q, 2).unwrap()
    }

    #[test]
    fn mixed_sum_full_period_vanishes() {
        let chi = legendre(5);
        let region = BoxRegion::new(vec![0, 0], vec![5, 5]).unwrap();
        let s = mixed_sum(&form("x1*x2", 2), &zero_phase(2), &chi, &region, 1 << 20).unwrap();
        assert!(s.abs() < 1e-9 * 25.0);
        assert_eq!(s.term_count, 25);
    }

    #[test]
    fn mixed_sum_single_term_box() {
        let chi = legendre(5);
        let region = BoxRegion::new(vec![0, 0], vec![1, 1]).unwrap();
        let s = mixed_sum(&form("x1*x2", 2), &zero_phase(2), &chi, &region, 100).unwrap();
        // Only the point (1,1): chi(1) = 1.
        assert!((s.value() - Complex64::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn mixed_sum_two_by_two_box() {
        // chi(1) + chi(2) + chi(2) + chi(4) = 1 - 1 - 1 + 1 = 0.
        let chi = legendre(5);
        let region = BoxRegion::new(vec![0, 0], vec![2, 2]).unwrap();
        let s = mixed_sum(&form("x1*x2", 2), &zero_phase(2), &chi, &region, 100).unwrap();
        assert!(s.abs() < 1e-12);
    }

    #[test]
    fn mixed_sum_budget() {
        let chi = legendre(5);
        let region = BoxRegion::new(vec![0, 0], vec![100, 100]).unwrap();
        assert!(matches!(
            mixed_sum(&form("x1*x2", 2), &zero_phase(2), &chi, &region, 100),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn mixed_sum_nonzero_phase_is_plain_exponential_sum() {
        // F constant 1 makes chi(F) = 1, so the sum is a pure phase sum.
        let chi = legendre(5);
        let region = BoxRegion::new(vec![0], vec![4]).unwrap();
        let phase: RealPoly = parse_poly("0.25*x1", 1).unwrap();
        let s = mixed_sum(&form("1", 1), &phase, &chi, &region, 100).unwrap();
        // sum_{x=1..4} e(x/4) = 0.
        assert!(s.abs() < 1e-12);
    }

    #[test]
    fn complete_sum_all_equal_collection() {
        // F = x1 x2, q = 5, order 2: the delta exponents cancel and each
        // nonzero value of F contributes 1; x1 x2 has 9 zeros on F_5^2.
        let chi = legendre(5);
        for r in [1usize, 2, 3] {
            let pts = vec![vec![2i64, 3]; 2 * r];
            let collection = Collection::new(pts).unwrap();
            let s = complete_mult_sum(&form("x1*x2", 2), &collection, &chi, 1 << 20).unwrap();
            assert!(
                (s.value() - Complex64::new(16.0, 0.0)).norm() < 1e-9,
                "r = {r}"
            );
        }
    }

    #[test]
    fn complete_sum_linear_form_mod_3() {
        // F = x1 + x2 over F_3 with the zero collection: 9 - 3 zeros = 6.
        let chi = DirichletCharacter::new(3, 2).unwrap();
        let collection = Collection::new(vec![vec![0, 0], vec![0, 0]]).unwrap();
        let s = complete_mult_sum(&form("x1 + x2", 2), &collection, &chi, 1 << 20).unwrap();
        assert!((s.value() - Complex64::new(6.0, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn complete_sum_vanishing_form_is_zero() {
        // F ≡ 0 mod q: every term is chi(0) = 0.
        let chi = legendre(5);
        let collection = Collection::new(vec![vec![1, 2], vec![0, 3]]).unwrap();
        let s = complete_mult_sum(&form("5*x1*x2", 2), &collection, &chi, 1 << 20).unwrap();
        assert_eq!(s.value(), Complex64::new(0.0, 0.0));
        assert_eq!(s.term_count, 25);
    }

    #[test]
    fn b_sum_boundary_with_synthetic_modulus() {
        // q = K_1^(2 Theta) makes q^(1/2) K_1^(-Theta) exactly 1; the lemma
        // holds with room since the later geometric terms shrink. The
        // B-functions do not need q prime.
        let (n, r) = (2usize, 3u64);
        let theta = theta_floor(n, r).unwrap();
        assert_eq!(theta, 2);
        let k = [2u64, 2];
        let q = k[0].pow(2 * theta as u32); // 16
        let x = (q as f64).sqrt() / (k[0] as f64).powi(theta as i32);
        assert_eq!(x, 1.0);
        let lhs: f64 = (1..=n)
            .map(|j| {
                (q as f64).powf(j as f64 / 2.0)
                    / b_function(n, r, j, &k).unwrap().to_f64().unwrap()
            })
            .sum();
        assert!(lhs <= n as f64 * x + 1e-12);
    }

    #[test]
    fn complete_sum_two_routes_agree() {
        let chi = DirichletCharacter::new(7, 3).unwrap();
        let f = form("x1^2 + 3*x2", 2);
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        for _ in 0..10 {
            let pts: Vec<Vec<i64>> = (0..4)
                .map(|_| (0..2).map(|_| rng.gen_range(-5i64..=5)).collect())
                .collect();
            let collection = Collection::new(pts).unwrap();
            let a = complete_mult_sum(&f, &collection, &chi, 1 << 20).unwrap();
            let b = complete_mult_sum_pointwise(&f, &collection, &chi, 1 << 20).unwrap();
            assert!((a.value() - b.value()).norm() < 1e-12 * 49.0);
            assert_eq!(a.term_count, b.term_count);
        }
    }

    fn standard(n: usize, d: u32) -> MonomialSystem {
        MonomialSystem::standard(n, d).unwrap()
    }

    #[test]
    fn additive_sum_diagonal_collection() {
        // All moment differences vanish: the sum is Q^M = 4^2 = 16.
        let sys = standard(2, 1);
        let collection = Collection::new(vec![vec![1, 1], vec![1, 1]]).unwrap();
        let s = additive_box_sum(&sys, 4, &collection, 1 << 20).unwrap();
        assert!((s.value() - Complex64::new(16.0, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn additive_sum_off_diagonal_vanishes() {
        // The beta = (1,0) factor is a full geometric sum of a nontrivial
        // 4th root of unity.
        let sys = standard(2, 1);
        let collection = Collection::new(vec![vec![1, 1], vec![2, 1]]).unwrap();
        let s = additive_box_sum(&sys, 4, &collection, 1 << 20).unwrap();
        assert!(s.abs() < 1e-9);
    }

    #[test]
    fn additive_sum_q_one_is_one() {
        let sys = standard(2, 2);
        let collection = Collection::new(vec![vec![3, 9], vec![-4, 2]]).unwrap();
        let s = additive_box_sum(&sys, 1, &collection, 1 << 20).unwrap();
        assert!((s.value() - Complex64::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn additive_sum_factorization_matches_direct_enumeration() {
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        for (n, d, r, q) in [
            (2usize, 1u32, 1usize, 2u64),
            (2, 1, 1, 3),
            (2, 1, 2, 2),
            (1, 2, 1, 3),
            (2, 2, 1, 2),
        ] {
            let sys = standard(n, d);
            // Q^M stays at or below 10^4 on this grid.
            assert!(partition_vertex_count(&sys, q).unwrap() <= 10_000);
            for _ in 0..5 {
                let pts: Vec<Vec<i64>> = (0..2 * r)
                    .map(|_| (0..n).map(|_| rng.gen_range(1i64..=3)).collect())
                    .collect();
                let collection = Collection::new(pts).unwrap();
                let fast = additive_box_sum(&sys, q, &collection, 1 << 24).unwrap();
                let direct = additive_box_sum_direct(&sys, q, &collection, 1 << 24).unwrap();
                let scale = partition_vertex_count(&sys, q).unwrap() as f64;
                assert!(
                    (fast.value() - direct.value()).norm() < 1e-9 * scale,
                    "n={n} d={d} r={r} q={q}"
                );
            }
        }
    }

    #[test]
    fn xi_examples() {
        let sys1 = standard(2, 1);
        // Diagonal pair.
        let c = Collection::new(vec![vec![7, -2], vec![7, -2]]).unwrap();
        assert!(xi_indicator(&sys1, &c, None));
        // (1,1) + (2,2) = (2,1) + (1,2) as multisets; with the alternating
        // sign convention the positive positions hold (1,1) and (2,2).
        let c = Collection::new(vec![vec![1, 1], vec![2, 1], vec![2, 2], vec![1, 2]]).unwrap();
        assert!(xi_indicator(&sys1, &c, None));
        // The same collection fails the degree-2 system at beta = (1,1).
        let sys2 = standard(2, 2);
        assert!(!xi_indicator(&sys2, &c, None));
    }

    #[test]
    fn prod_lemma_exhaustive_r1_and_r2() {
        let sys = standard(2, 1);
        let mut rng = ChaCha12Rng::seed_from_u64(0);
        let report = verify_prod_lemma(
            &sys,
            1,
            2,
            SampleMode::Exhaustive,
            None,
            1 << 24,
            &mut rng,
        )
        .unwrap();
        assert_eq!(report.q, 4);
        assert_eq!(report.checked, 16);
        assert!(report.passed());
        assert_eq!(report.wraparound, 0);

        let report = verify_prod_lemma(
            &sys,
            2,
            2,
            SampleMode::Exhaustive,
            None,
            1 << 24,
            &mut rng,
        )
        .unwrap();
        assert_eq!(report.q, 8);
        assert_eq!(report.checked, 256);
        assert!(report.passed());
    }

    #[test]
    fn prod_lemma_sampled_2222() {
        let sys = standard(2, 2);
        let mut rng = ChaCha12Rng::seed_from_u64(42);
        let report = verify_prod_lemma(
            &sys,
            2,
            2,
            SampleMode::Sampled { count: 200 },
            None,
            1 << 30,
            &mut rng,
        )
        .unwrap();
        assert_eq!(report.q, 8);
        assert!(report.passed());
        assert_eq!(report.wraparound, 0);
    }

    #[test]
    fn prod_lemma_flags_wraparound_below_threshold() {
        // With Q forced to 2 there are collections whose moment difference
        // is 2: congruent to zero mod 2 without vanishing.
        let sys = standard(2, 1);
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        let report = verify_prod_lemma(
            &sys,
            2,
            2,
            SampleMode::Exhaustive,
            Some(2),
            1 << 24,
            &mut rng,
        )
        .unwrap();
        assert!(report.wraparound > 0);
        // Below the threshold the identity genuinely fails at wraparound
        // collections, and the run reports instead of erroring.
        assert_eq!(report.violations, report.wraparound);
        assert!(!report.passed());
        let c = report.first_wraparound.unwrap();
        assert!(xi_indicator(&sys, &c, Some(2)) && !xi_indicator(&sys, &c, None));
    }

    #[test]
    fn b_function_branches() {
        // n = 2 puts j = 1 on the k1^(r-1) branch.
        assert_eq!(
            b_function(2, 3, 1, &[2, 3]).unwrap(),
            BigUint::from(4u32)
        );
        // j = n even branch: (k1)^(2r).
        assert_eq!(
            b_function(2, 3, 2, &[2, 3]).unwrap(),
            BigUint::from(64u32)
        );
        assert_eq!(b_function(3, 5, 0, &[2, 3, 4]).unwrap(), BigUint::one());
        // Middle branch for n = 3: k1^(j * Theta), Theta = 2.
        assert_eq!(
            b_function(3, 5, 1, &[2, 3, 4]).unwrap(),
            BigUint::from(4u32)
        );
        // Odd-n top branch: (k1)^(2r) * k2^r for n = 3.
        assert_eq!(
            b_function(3, 5, 3, &[2, 3, 4]).unwrap(),
            BigUint::from(2u32).pow(10) * BigUint::from(3u32).pow(5)
        );
        assert_eq!(
            b_function(2, 3, 1, &[3, 2]).unwrap_err(),
            Error::UnsortedSides
        );
    }

    #[test]
    fn b_sum_example_and_sampling() {
        // n=2, r=5, q=101, K=(16,20): x = sqrt(101)/16^4 is far below 1.
        let k = [16u64, 20];
        let theta = theta_floor(2, 5).unwrap();
        assert_eq!(theta, 4);
        let x = 101f64.sqrt() / 16f64.powi(4);
        assert!(x < 1.0);
        let lhs: f64 = (1..=2)
            .map(|j| {
                101f64.powf(j as f64 / 2.0)
                    / b_function(2, 5, j, &k).unwrap().to_f64().unwrap()
            })
            .sum();
        assert!(lhs <= 2.0 * x);

        let mut rng = ChaCha12Rng::seed_from_u64(7);
        let report = verify_b_sum_lemma(2, 5, 101, 64, 500, &mut rng).unwrap();
        assert_eq!(report.violations, 0);
        assert!(report.checked > 0);
        assert!(report.skipped > 0, "small k1 samples must be gated out");
    }

    #[test]
    fn stratify_counts_nested_and_vr_consistent() {
        let chi = DirichletCharacter::new(7, 2).unwrap();
        let f = form("x1*x2", 2);
        let sys = standard(2, 1);
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        let audit = stratify_audit(
            &f,
            &chi,
            &sys,
            2,
            &[2, 2],
            1.0,
            1.0,
            StratifyMode::Exhaustive,
            1 << 24,
            &mut rng,
        )
        .unwrap();
        assert_eq!(audit.total, 256);
        // Nesting: counts are non-increasing in j.
        for w in audit.rows.windows(2) {
            assert!(w[0].count >= w[1].count);
        }
        for w in audit.vr_counts.windows(2) {
            assert!(w[0] >= w[1]);
        }
        // Histogram covers every collection.
        assert_eq!(audit.histogram.iter().sum::<u64>(), 256);

        // Diagonal collections exceed the top threshold: |Sigma_mult| =
        // q^n - #zeros = 49 - 13 = 36 > q^(3/2) ≈ 18.5.
        let diag = Collection::new(vec![vec![1, 1]; 4]).unwrap();
        let s = complete_mult_sum(&f, &diag, &chi, 1 << 20).unwrap();
        assert!((s.value() - Complex64::new(36.0, 0.0)).norm() < 1e-9);
        assert!(s.abs() > audit.rows[1].threshold);
    }

    #[test]
    fn stratify_sampled_is_deterministic_per_seed() {
        let chi = DirichletCharacter::new(5, 2).unwrap();
        let f = form("x1*x2", 2);
        let sys = standard(2, 1);
        let run = |seed: u64| {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            stratify_audit(
                &f,
                &chi,
                &sys,
                2,
                &[3, 3],
                1.0,
                1.0,
                StratifyMode::Sampled { count: 100 },
                1 << 24,
                &mut rng,
            )
            .unwrap()
        };
        let a = run(9);
        let b = run(9);
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }
}
