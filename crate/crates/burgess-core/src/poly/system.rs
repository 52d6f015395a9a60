//! Monomial systems: exponent sets with their rank, weight and
//! translation-dilation invariance status.

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::{binomial, Monomial};

/// How a system was constructed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SystemKind {
    /// All monomials of total degree between 1 and `d`.
    Standard { d: u32 },
    /// Per-variable caps `caps[i]` plus a total-degree cap `k`
    /// (Arkhipov-Chubarikov-Karatsuba shape).
    Ack { caps: Vec<u32>, k: u32 },
    Custom,
}

/// An exponent set `Lambda` in `n` variables with its derived invariants.
///
/// `lambda` is sorted lexicographically; the sorted order is the canonical
/// coordinate order for moment vectors.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonomialSystem {
    n: usize,
    lambda: Vec<Monomial>,
    kind: SystemKind,
    weight: u64,
    degree: u64,
}

/// Outcome of the translation-dilation invariance test.
///
/// When the system fails, the certificate names the offending term: shifting
/// `x^source` produces the monomial `x^missing` (with a nonzero binomial
/// coefficient in the shift), which is outside the span of the system.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TdiCheck {
    pub tdi: bool,
    pub certificate: Option<TdiCertificate>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TdiCertificate {
    pub source: Monomial,
    pub missing: Monomial,
}

impl MonomialSystem {
    /// The standard system: all `beta` with `1 <= |beta| <= d`.
    pub fn standard(n: usize, d: u32) -> Result<Self> {
        if n < 1 || d < 1 {
            return Err(Error::InvalidRange(format!(
                "standard system needs n >= 1 and d >= 1, got n={n}, d={d}"
            )));
        }
        let lambda = enumerate(n, |m| {
            let t = m.total_degree();
            1 <= t && t <= d as u64
        }, d);
        Self::build(n, lambda, SystemKind::Standard { d })
    }

    /// The capped system `beta_i <= caps[i]`, `1 <= |beta| <= k`.
    pub fn ack(caps: &[u32], k: u32) -> Result<Self> {
        let n = caps.len();
        if n < 1 || k < 1 {
            return Err(Error::InvalidRange(format!(
                "ack system needs n >= 1 and k >= 1, got n={n}, k={k}"
            )));
        }
        let dmax = caps.iter().copied().max().unwrap().min(k);
        let lambda = enumerate(n, |m| {
            let t = m.total_degree();
            1 <= t && t <= k as u64 && m.0.iter().zip(caps).all(|(e, c)| e <= c)
        }, dmax);
        for (i, _) in caps.iter().enumerate() {
            if !lambda.iter().any(|m| m.0[i] > 0) {
                return Err(Error::DegenerateSystem(i + 1));
            }
        }
        Self::build(
            n,
            lambda,
            SystemKind::Ack {
                caps: caps.to_vec(),
                k,
            },
        )
    }

    /// A custom exponent set. Enforces the linear monomial in each variable;
    /// use [`MonomialSystem::custom_relaxed`] for sets under analysis that do
    /// not satisfy that yet.
    pub fn custom(n: usize, lambda: Vec<Monomial>) -> Result<Self> {
        let sys = Self::custom_relaxed(n, lambda)?;
        for i in 0..n {
            if !sys.lambda.contains(&Monomial::unit(n, i)) {
                return Err(Error::MissingLinearMonomial(i + 1));
            }
        }
        Ok(sys)
    }

    /// A custom exponent set without the linear-monomial requirement.
    pub fn custom_relaxed(n: usize, mut lambda: Vec<Monomial>) -> Result<Self> {
        if n < 1 || lambda.is_empty() {
            return Err(Error::InvalidRange(
                "a system needs n >= 1 and a nonempty exponent set".into(),
            ));
        }
        for m in &lambda {
            if m.arity() != n {
                return Err(Error::InvalidRange(format!(
                    "multi-index {:?} does not have arity {n}",
                    m.0
                )));
            }
            if m.is_constant() {
                return Err(Error::InvalidRange(
                    "the zero multi-index is not part of a system".into(),
                ));
            }
        }
        lambda.sort();
        lambda.dedup();
        Self::build(n, lambda, SystemKind::Custom)
    }

    fn build(n: usize, lambda: Vec<Monomial>, kind: SystemKind) -> Result<Self> {
        // The weight is always recomputed from the set itself.
        let weight = lambda.iter().map(|m| m.total_degree()).sum();
        let degree = lambda.iter().map(|m| m.total_degree()).max().unwrap_or(0);
        Ok(MonomialSystem {
            n,
            lambda,
            kind,
            weight,
            degree,
        })
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    /// The exponent set, sorted lexicographically.
    pub fn exponents(&self) -> &[Monomial] {
        &self.lambda
    }

    pub fn kind(&self) -> &SystemKind {
        &self.kind
    }

    /// Rank `R`: the number of monomials.
    pub fn rank(&self) -> usize {
        self.lambda.len()
    }

    /// Weight `M`: the sum of total degrees.
    pub fn weight(&self) -> u64 {
        self.weight
    }

    /// Degree `d`: the largest total degree.
    pub fn degree(&self) -> u64 {
        self.degree
    }

    pub fn contains(&self, m: &Monomial) -> bool {
        self.lambda.binary_search(m).is_ok()
    }

    pub fn has_linear_monomials(&self) -> bool {
        (0..self.n).all(|i| self.contains(&Monomial::unit(self.n, i)))
    }

    /// Translation-dilation invariance.
    ///
    /// Shifting a monomial `x^beta` by `xi` expands into `sum_{gamma <= beta}
    /// binom(beta, gamma) xi^(beta-gamma) x^gamma`, and every binomial
    /// coefficient is a nonzero integer; so the shifted system lies in the
    /// span of `{x^gamma : gamma in Lambda + {0}}` exactly when `Lambda` is
    /// downward closed under the componentwise order.
    pub fn is_tdi(&self) -> TdiCheck {
        for beta in &self.lambda {
            let mut gamma = Monomial(vec![0; self.n]);
            loop {
                let deg = gamma.total_degree();
                if deg >= 1 && gamma != *beta && !self.contains(&gamma) {
                    return TdiCheck {
                        tdi: false,
                        certificate: Some(TdiCertificate {
                            source: beta.clone(),
                            missing: gamma.clone(),
                        }),
                    };
                }
                // Odometer over gamma <= beta.
                let mut i = 0;
                loop {
                    if i == self.n {
                        break;
                    }
                    if gamma.0[i] < beta.0[i] {
                        gamma.0[i] += 1;
                        break;
                    }
                    gamma.0[i] = 0;
                    i += 1;
                }
                if i == self.n {
                    break;
                }
            }
        }
        TdiCheck {
            tdi: true,
            certificate: None,
        }
    }

    /// Short text form used in CSV rows and cache keys.
    pub fn descriptor(&self) -> String {
        match &self.kind {
            SystemKind::Standard { d } => format!("standard({},{})", self.n, d),
            SystemKind::Ack { caps, k } => {
                let caps = caps
                    .iter()
                    .map(|c| c.to_string())
                    .collect::<Vec<_>>()
                    .join(",");
                format!("ack({caps};{k})")
            }
            SystemKind::Custom => {
                let monos = self
                    .lambda
                    .iter()
                    .map(|m| {
                        m.0.iter()
                            .map(|e| e.to_string())
                            .collect::<Vec<_>>()
                            .join(",")
                    })
                    .collect::<Vec<_>>()
                    .join("|");
                format!("custom({};{monos})", self.n)
            }
        }
    }
}

fn enumerate(n: usize, keep: impl Fn(&Monomial) -> bool, dmax: u32) -> Vec<Monomial> {
    let mut out = Vec::new();
    let mut current = Monomial(vec![0; n]);
    loop {
        if keep(&current) {
            out.push(current.clone());
        }
        let mut i = 0;
        loop {
            if i == n {
                break;
            }
            if current.0[i] < dmax {
                current.0[i] += 1;
                break;
            }
            current.0[i] = 0;
            i += 1;
        }
        if i == n {
            break;
        }
    }
    out.sort();
    out
}

/// Closed form for the rank of the standard system: `C(n+d, n) - 1`.
pub fn standard_rank(n: usize, d: u32) -> u64 {
    let b = binomial(n as u32 + d, d);
    (b - BigUint::from(1u32)).to_u64().expect("desk-scale rank")
}

/// Closed form for the weight of the standard system:
/// `d * C(n+d, n) * n/(n+1)`.
pub fn standard_weight(n: usize, d: u32) -> u64 {
    let num = BigUint::from(d) * binomial(n as u32 + d, d) * BigUint::from(n);
    let den = BigUint::from(n as u32 + 1);
    debug_assert!((num.clone() % &den).to_u64() == Some(0));
    (num / den).to_u64().expect("desk-scale weight")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_2_2_matches_enumeration() {
        let sys = MonomialSystem::standard(2, 2).unwrap();
        let expected: Vec<Monomial> = vec![
            Monomial(vec![0, 1]),
            Monomial(vec![0, 2]),
            Monomial(vec![1, 0]),
            Monomial(vec![1, 1]),
            Monomial(vec![2, 0]),
        ];
        assert_eq!(sys.exponents(), &expected[..]);
        assert_eq!(sys.rank(), 5);
        assert_eq!(sys.weight(), 8);
        assert_eq!(sys.degree(), 2);
    }

    #[test]
    fn closed_forms_match_enumeration_up_to_six() {
        for n in 1..=6usize {
            for d in 1..=6u32 {
                let sys = MonomialSystem::standard(n, d).unwrap();
                assert_eq!(sys.rank() as u64, standard_rank(n, d), "rank n={n} d={d}");
                assert_eq!(sys.weight(), standard_weight(n, d), "weight n={n} d={d}");
            }
        }
    }

    #[test]
    fn small_standard_weights() {
        assert_eq!(MonomialSystem::standard(2, 1).unwrap().weight(), 2);
        assert_eq!(MonomialSystem::standard(3, 1).unwrap().weight(), 3);
        assert_eq!(MonomialSystem::standard(2, 1).unwrap().rank(), 2);
    }

    #[test]
    fn ack_enumeration() {
        let sys = MonomialSystem::ack(&[1, 1], 2).unwrap();
        assert_eq!(
            sys.exponents(),
            &[
                Monomial(vec![0, 1]),
                Monomial(vec![1, 0]),
                Monomial(vec![1, 1])
            ][..]
        );
        assert_eq!(sys.weight(), 4);

        // Caps equal to the total bound reproduce the standard system.
        let a = MonomialSystem::ack(&[2, 2], 2).unwrap();
        let s = MonomialSystem::standard(2, 2).unwrap();
        assert_eq!(a.exponents(), s.exponents());

        // A binding |beta| <= 1 cap leaves just the unit vectors.
        let b = MonomialSystem::ack(&[1, 1], 1).unwrap();
        assert_eq!(
            b.exponents(),
            &[Monomial(vec![0, 1]), Monomial(vec![1, 0])][..]
        );
    }

    #[test]
    fn ack_degenerate_variable() {
        assert_eq!(
            MonomialSystem::ack(&[0, 1], 1).unwrap_err(),
            Error::DegenerateSystem(1)
        );
    }

    #[test]
    fn tdi_standard_and_ack() {
        for n in 1..=5usize {
            for d in 1..=5u32 {
                assert!(MonomialSystem::standard(n, d).unwrap().is_tdi().tdi);
            }
        }
        for n in 1..=3usize {
            for cap in 1..=3u32 {
                for k in 1..=(cap * n as u32) {
                    let caps = vec![cap; n];
                    if let Ok(sys) = MonomialSystem::ack(&caps, k) {
                        assert!(sys.is_tdi().tdi, "ack caps={caps:?} k={k}");
                    }
                }
            }
        }
    }

    #[test]
    fn tdi_failure_has_certificate() {
        let sys = MonomialSystem::custom_relaxed(
            2,
            vec![Monomial(vec![2, 0]), Monomial(vec![0, 1])],
        )
        .unwrap();
        let check = sys.is_tdi();
        assert!(!check.tdi);
        let cert = check.certificate.unwrap();
        // The x1 term of (x1 + xi1)^2 escapes the span.
        assert_eq!(cert.source, Monomial(vec![2, 0]));
        assert_eq!(cert.missing, Monomial(vec![1, 0]));
    }

    #[test]
    fn linear_system_is_tdi() {
        let sys = MonomialSystem::custom(
            2,
            vec![Monomial(vec![1, 0]), Monomial(vec![0, 1])],
        )
        .unwrap();
        assert!(sys.is_tdi().tdi);
    }

    #[test]
    fn custom_requires_linear_monomials() {
        let err = MonomialSystem::custom(2, vec![Monomial(vec![2, 0]), Monomial(vec![0, 1])])
            .unwrap_err();
        assert_eq!(err, Error::MissingLinearMonomial(1));
    }

    #[test]
    fn descriptors() {
        assert_eq!(
            MonomialSystem::standard(2, 2).unwrap().descriptor(),
            "standard(2,2)"
        );
        assert_eq!(
            MonomialSystem::ack(&[1, 1], 2).unwrap().descriptor(),
            "ack(1,1;2)"
        );
    }
}
