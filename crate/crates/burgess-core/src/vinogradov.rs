//! Exact solution counts for the moment systems attached to a monomial
//! set: brute force, meet-in-the-middle, box-restricted signed variants,
//! and the predicted growth exponents.
//!
//! A solution is a `2r`-tuple of points of `[1, X]^n` whose first and
//! second halves have equal moment vectors. Counts are arbitrary precision:
//! the trivial ceiling `X^(2rn)` overflows machine words almost
//! immediately.

use std::collections::HashMap;
use std::time::Instant;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::charsum::{collection_from_index, collections_in_box, Collection};
use crate::error::{Error, Result};
use crate::poly::{MonomialSystem, SystemKind};
use crate::util::biguint_ln;

/// The moment vector of an `r`-tuple: one entry `sum_j (x_j)^beta` per
/// monomial, in the system's canonical (lexicographic) order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MomentVector(pub Vec<i128>);

impl MomentVector {
    pub fn of(system: &MonomialSystem, points: &[Vec<i64>]) -> Self {
        MomentVector(
            system
                .exponents()
                .iter()
                .map(|beta| points.iter().map(|p| beta.eval_int(p)).sum())
                .collect(),
        )
    }

    pub fn dimension(&self) -> usize {
        self.0.len()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CountMethod {
    BruteForce,
    MeetInMiddle,
}

impl CountMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            CountMethod::BruteForce => "brute",
            CountMethod::MeetInMiddle => "mitm",
        }
    }
}

/// An exact solution count with its provenance.
#[derive(Clone, Debug)]
pub struct CountResult {
    pub system: String,
    pub r: u64,
    pub x: u64,
    pub count: BigUint,
    pub method: CountMethod,
    pub seconds: f64,
}

/// All lattice points of `(0, sides]`, lexicographically.
fn box_points(sides: &[u64]) -> Vec<Vec<i64>> {
    let total: u128 = sides.iter().map(|&s| s as u128).product();
    (0..total)
        .map(|i| collection_from_index(i, sides, 1).points.pop().unwrap())
        .collect()
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

/// Exact count by full enumeration of all `2r`-tuples.
pub fn jr_bruteforce(system: &MonomialSystem, r: u64, x: u64, budget: u64) -> Result<CountResult> {
    let n = system.dimension();
    let sides = vec![x; n];
    let tuples = collections_in_box(&sides, 2 * r as usize);
    check_budget("brute-force tuple enumeration", tuples, budget)?;
    let start = Instant::now();

    let points = box_points(&sides);
    let moments: Vec<MomentVector> = points
        .iter()
        .map(|p| MomentVector::of(system, std::slice::from_ref(p)))
        .collect();
    let rank = system.rank();
    let p = points.len();

    let mut count: u64 = 0;
    let mut slots = vec![0usize; 2 * r as usize];
    'tuples: loop {
        let mut diff = vec![0i128; rank];
        for (j, &slot) in slots.iter().enumerate() {
            let sign = if j < r as usize { 1 } else { -1 };
            for (d, &m) in diff.iter_mut().zip(&moments[slot].0) {
                *d += sign as i128 * m;
            }
        }
        if diff.iter().all(|&d| d == 0) {
            count += 1;
        }
        let mut i = slots.len();
        loop {
            if i == 0 {
                break 'tuples;
            }
            i -= 1;
            if slots[i] + 1 < p {
                slots[i] += 1;
                break;
            }
            slots[i] = 0;
        }
    }
    Ok(CountResult {
        system: system.descriptor(),
        r,
        x,
        count: BigUint::from(count),
        method: CountMethod::BruteForce,
        seconds: start.elapsed().as_secs_f64(),
    })
}

/// Frequency map of moment vectors over all `r`-tuples of the given points.
fn moment_multiplicities(
    system: &MonomialSystem,
    points: &[Vec<i64>],
    r: u64,
) -> HashMap<MomentVector, u64> {
    let moments: Vec<MomentVector> = points
        .iter()
        .map(|p| MomentVector::of(system, std::slice::from_ref(p)))
        .collect();
    let p = points.len();

    // Partition by the first point; the merged result is independent of the
    // partition order because merging is addition by key.
    (0..p)
        .into_par_iter()
        .map(|first| {
            let mut map: HashMap<MomentVector, u64> = HashMap::new();
            let r = r as usize;
            let mut slots = vec![0usize; r - 1];
            loop {
                let mut total = moments[first].0.clone();
                for &slot in &slots {
                    for (t, &m) in total.iter_mut().zip(&moments[slot].0) {
                        *t += m;
                    }
                }
                *map.entry(MomentVector(total)).or_insert(0) += 1;
                let mut i = slots.len();
                loop {
                    if i == 0 {
                        return map;
                    }
                    i -= 1;
                    if slots[i] + 1 < p {
                        slots[i] += 1;
                        break;
                    }
                    slots[i] = 0;
                }
            }
        })
        .reduce(HashMap::new, |mut a, b| {
            for (k, v) in b {
                *a.entry(k).or_insert(0) += v;
            }
            a
        })
}

fn sum_of_squares(map: &HashMap<MomentVector, u64>) -> BigUint {
    let mut acc = BigUint::zero();
    for &v in map.values() {
        acc += BigUint::from(v as u128 * v as u128);
    }
    acc
}

/// Exact count via `J = sum_v N(v)^2` over the moment-vector multiplicity
/// map of `r`-tuples.
pub fn jr_mitm(system: &MonomialSystem, r: u64, x: u64, budget: u64) -> Result<CountResult> {
    let n = system.dimension();
    let sides = vec![x; n];
    let half_tuples = collections_in_box(&sides, r as usize);
    check_budget("meet-in-the-middle r-tuple map", half_tuples, budget)?;
    let start = Instant::now();
    let points = box_points(&sides);
    let map = moment_multiplicities(system, &points, r);
    Ok(CountResult {
        system: system.descriptor(),
        r,
        x,
        count: sum_of_squares(&map),
        method: CountMethod::MeetInMiddle,
        seconds: start.elapsed().as_secs_f64(),
    })
}

/// Count collections of `(0, sides]^{2r}` in the signed moment-vanishing
/// set. On cubic boxes this equals the plain solution count.
pub fn vr_count(system: &MonomialSystem, r: u64, sides: &[u64], budget: u64) -> Result<BigUint> {
    assert_eq!(sides.len(), system.dimension());
    let half_tuples = collections_in_box(sides, r as usize);
    check_budget("signed-set r-tuple map", half_tuples, budget)?;
    // Positive and negative positions interleave, but both halves range
    // over the same box, so the count is again a sum of squared
    // multiplicities.
    let points = box_points(sides);
    let map = moment_multiplicities(system, &points, r);
    Ok(sum_of_squares(&map))
}

/// A predicted growth exponent with the index of its dominating term.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Prediction {
    /// Exponent `e` in the sharp shape `J_r ~ X^e` (up to `X^eps`).
    pub exponent: i64,
    /// Dominating term: `0` for the diagonal `X^{rn}`, otherwise the index
    /// `j` of `X^{2rj + (n-j) - K_j}`.
    pub j_star: usize,
    /// The competing exponents, `(0, rn)` first.
    pub terms: Vec<(usize, i64)>,
}

/// Sharp-exponent prediction for the count.
///
/// Standard systems use `K_j = (jd/(j+1)) C(j+d, j)`; capped systems take
/// the `K_j` sequence as caller input; other TDI systems are only covered
/// in the plain regime `r > R(d+1)` with exponent `2rn - M`.
pub fn predicted_exponent(
    system: &MonomialSystem,
    r: u64,
    capped_kj: Option<&[u64]>,
) -> Result<Prediction> {
    let n = system.dimension();
    let rn = (r * n as u64) as i64;
    let kj: Vec<u64> = match system.kind() {
        SystemKind::Standard { d } => (1..=n)
            .map(|j| crate::poly::standard_weight(j, *d))
            .collect(),
        SystemKind::Ack { .. } => match capped_kj {
            Some(kj) if kj.len() == n => kj.to_vec(),
            Some(_) => {
                return Err(Error::InvalidRange(
                    "capped systems need one K_j per dimension".into(),
                ))
            }
            None => {
                return Err(Error::UnsupportedSystem(
                    "capped systems take the K_j sequence as input".into(),
                ))
            }
        },
        SystemKind::Custom => {
            if !system.is_tdi().tdi {
                return Err(Error::UnsupportedSystem(
                    "prediction needs a translation-dilation invariant system".into(),
                ));
            }
            let ppw_from = system.rank() as u64 * (system.degree() + 1);
            if r <= ppw_from {
                return Err(Error::UnsupportedSystem(format!(
                    "custom TDI prediction needs r > R(d+1) = {ppw_from}"
                )));
            }
            let exponent = rn.max(2 * rn - system.weight() as i64);
            let j_star = if exponent == rn { 0 } else { n };
            return Ok(Prediction {
                exponent,
                j_star,
                terms: vec![(0, rn), (n, 2 * rn - system.weight() as i64)],
            });
        }
    };
    let mut terms = vec![(0usize, rn)];
    for (j, k) in (1..=n).zip(&kj) {
        let e = 2 * r as i64 * j as i64 + (n - j) as i64 - *k as i64;
        terms.push((j, e));
    }
    let best = terms.iter().map(|&(_, e)| e).max().unwrap();
    // Ties with the diagonal report the diagonal; among stratified terms the
    // largest index wins.
    let j_star = if best == rn {
        0
    } else {
        terms
            .iter()
            .filter(|&&(j, e)| j > 0 && e == best)
            .map(|&(j, _)| j)
            .max()
            .unwrap()
    };
    Ok(Prediction {
        exponent: best,
        j_star,
        terms,
    })
}

/// Least-squares slope of `log J` against `log X`.
#[derive(Clone, Debug)]
pub struct SlopeReport {
    pub points: Vec<(u64, BigUint)>,
    pub slope: f64,
    pub predicted: Prediction,
}

pub fn slope_check(
    system: &MonomialSystem,
    r: u64,
    xs: &[u64],
    budget: u64,
) -> Result<SlopeReport> {
    if xs.len() < 3 {
        return Err(Error::InvalidRange(
            "slope fitting needs at least 3 box sizes".into(),
        ));
    }
    let mut points = Vec::with_capacity(xs.len());
    for &x in xs {
        let result = jr_mitm(system, r, x, budget)?;
        points.push((x, result.count));
    }
    let logs: Vec<(f64, f64)> = points
        .iter()
        .map(|(x, j)| ((*x as f64).ln(), biguint_ln(j)))
        .collect();
    let m = logs.len() as f64;
    let sx: f64 = logs.iter().map(|p| p.0).sum();
    let sy: f64 = logs.iter().map(|p| p.1).sum();
    let sxx: f64 = logs.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = logs.iter().map(|p| p.0 * p.1).sum();
    let slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    let predicted = predicted_exponent(system, r, None)?;
    Ok(SlopeReport {
        points,
        slope,
        predicted,
    })
}

/// `X^(rn) <= J <= X^(2rn)`: the diagonal floor and the trivial ceiling.
pub fn count_bounds(n: usize, r: u64, x: u64) -> (BigUint, BigUint) {
    let base = BigUint::from(x);
    (
        base.pow((r * n as u64) as u32),
        base.pow((2 * r * n as u64) as u32),
    )
}

/// Collections of the signed set inside a box, by direct filtering; an
/// oracle for `vr_count`.
pub fn vr_count_direct(
    system: &MonomialSystem,
    r: u64,
    sides: &[u64],
    budget: u64,
) -> Result<BigUint> {
    let total = collections_in_box(sides, 2 * r as usize);
    check_budget("signed-set direct enumeration", total, budget)?;
    let mut count = BigUint::zero();
    for index in 0..total {
        let collection = collection_from_index(index, sides, 2 * r as usize);
        if crate::charsum::xi_indicator(system, &collection, None) {
            count += BigUint::one();
        }
    }
    Ok(count)
}

/// The signed set membership for a single collection, shared with the
/// stratification audit.
pub fn in_signed_set(system: &MonomialSystem, collection: &Collection) -> bool {
    crate::charsum::xi_indicator(system, collection, None)
}
