//! The closed-form exponent calculus: the codimension parameter, validity
//! ranges, nontriviality thresholds, the P window and the savings analysis.
//!
//! Everything here is exact rational arithmetic (`BigRational`); floating
//! point appears only in the P-window bounds and the proposition-shape
//! evaluation, where the inputs themselves are real. Implied constants are
//! taken as 1 throughout, so numeric outputs are shapes, not certified
//! bounds, and the `q^epsilon` factor is rendered at `epsilon = 0`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::{standard_rank, standard_weight, MonomialSystem, SystemKind};

fn rat(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

fn rat_u(num: u64, den: u64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

fn to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// `Theta = floor((r-1)/(n-1))` for `n >= 2`.
pub fn theta_floor(n: usize, r: u64) -> Result<u64> {
    if n < 2 {
        return Err(Error::DimensionTooSmall(n));
    }
    if r < 1 {
        return Err(Error::InvalidRange("r must be at least 1".into()));
    }
    Ok((r - 1) / (n as u64 - 1))
}

/// The `n = 1` convention sets `Theta = r`; opt-in only.
pub fn theta_dimension_one(r: u64) -> u64 {
    r
}

/// A rational rendered as `p/q` plus its decimal value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RationalOut {
    pub fraction: String,
    pub decimal: f64,
}

impl RationalOut {
    pub fn of(x: &BigRational) -> Self {
        RationalOut {
            fraction: if x.denom().is_one() {
                x.numer().to_string()
            } else {
                format!("{}/{}", x.numer(), x.denom())
            },
            decimal: to_f64(x),
        }
    }
}

/// How the codimension parameter was obtained.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum ThetaMode {
    /// `floor((r-1)/(n-1))`.
    Floor,
    /// The `n = 1` convention `Theta = r`.
    DimensionOne,
    /// User-supplied `Theta = r/alpha(n)`; hypothesis, not a theorem.
    ConjecturalAlpha { alpha: String },
}

/// Options for report construction.
#[derive(Clone, Debug, Default)]
pub struct ReportOptions {
    /// Allow `n = 1` with the convention `Theta = r`.
    pub dimension_one_convention: bool,
    /// Replace `Theta` by `r/alpha`; clearly labeled in the output.
    pub conjectural_alpha: Option<BigRational>,
}

/// The full exponent calculus for one `(n, d, r)` (or one system).
#[derive(Clone, Debug)]
pub struct ExponentReport {
    pub n: usize,
    pub d: u64,
    pub r: u64,
    pub theta: BigRational,
    pub theta_mode: ThetaMode,
    pub weight: u64,
    pub rank: u64,
    /// `Theta > M` together with the known validity range for `r`.
    pub valid: bool,
    pub reasons: Vec<String>,
    /// `1/2 + 1/(4(Theta - M))`, the exponent cap on `H`.
    pub h_exp_cap: Option<BigRational>,
    /// Exponent pair `(a, b)`: the bound reads `H^a q^(b + eps)`.
    pub bound_a: BigRational,
    pub bound_b: Option<BigRational>,
    /// Nontriviality cutoff for `beta` where `H = q^beta`.
    pub beta_threshold: Option<BigRational>,
    /// `beta_n = 1/2 - 1/(2(n+1))`.
    pub beta_n: BigRational,
}

/// Serialization-ready form of [`ExponentReport`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RenderedExponentReport {
    pub n: usize,
    pub d: u64,
    pub r: u64,
    pub theta: RationalOut,
    pub theta_mode: ThetaMode,
    pub weight: u64,
    pub rank: u64,
    pub valid: bool,
    pub reasons: Vec<String>,
    pub h_exp_cap: Option<RationalOut>,
    pub bound_a: RationalOut,
    pub bound_b: Option<RationalOut>,
    pub beta_threshold: Option<RationalOut>,
    pub beta_n: RationalOut,
    /// Outputs set the free epsilon in `q^eps` to zero.
    pub epsilon: f64,
}

impl ExponentReport {
    pub fn rendered(&self) -> RenderedExponentReport {
        RenderedExponentReport {
            n: self.n,
            d: self.d,
            r: self.r,
            theta: RationalOut::of(&self.theta),
            theta_mode: self.theta_mode.clone(),
            weight: self.weight,
            rank: self.rank,
            valid: self.valid,
            reasons: self.reasons.clone(),
            h_exp_cap: self.h_exp_cap.as_ref().map(RationalOut::of),
            bound_a: RationalOut::of(&self.bound_a),
            bound_b: self.bound_b.as_ref().map(RationalOut::of),
            beta_threshold: self.beta_threshold.as_ref().map(RationalOut::of),
            beta_n: RationalOut::of(&self.beta_n),
            epsilon: 0.0,
        }
    }
}

/// `beta_n = 1/2 - 1/(2(n+1))`.
pub fn beta_n(n: usize) -> BigRational {
    rat(1, 2) - rat_u(1, 2 * (n as u64 + 1))
}

fn theta_for(n: usize, r: u64, opts: &ReportOptions) -> Result<(BigRational, ThetaMode)> {
    if let Some(alpha) = &opts.conjectural_alpha {
        if !alpha.is_positive() {
            return Err(Error::InvalidRange("alpha must be positive".into()));
        }
        return Ok((
            BigRational::from(BigInt::from(r)) / alpha,
            ThetaMode::ConjecturalAlpha {
                alpha: RationalOut::of(alpha).fraction,
            },
        ));
    }
    if n == 1 {
        if opts.dimension_one_convention {
            return Ok((
                BigRational::from(BigInt::from(theta_dimension_one(r))),
                ThetaMode::DimensionOne,
            ));
        }
        return Err(Error::DimensionTooSmall(1));
    }
    Ok((
        BigRational::from(BigInt::from(theta_floor(n, r)?)),
        ThetaMode::Floor,
    ))
}

fn report_from_invariants(
    n: usize,
    d: u64,
    r: u64,
    weight: u64,
    rank: u64,
    r_range_ok: bool,
    r_range_text: &str,
    opts: &ReportOptions,
) -> Result<ExponentReport> {
    if r < 1 || d < 1 {
        return Err(Error::InvalidRange(format!(
            "need r >= 1 and d >= 1, got r={r}, d={d}"
        )));
    }
    let (theta, theta_mode) = theta_for(n, r, opts)?;
    let m_rat = BigRational::from(BigInt::from(weight));
    let gap = &theta - &m_rat;

    let mut reasons = Vec::new();
    if !gap.is_positive() {
        reasons.push(format!(
            "Theta = {} does not exceed M = {weight}",
            RationalOut::of(&theta).fraction
        ));
    }
    if !r_range_ok {
        reasons.push(r_range_text.to_string());
    }

    let bound_a = rat_u(n as u64, 1) - rat_u(n as u64 + 1, 2 * r);
    let (h_exp_cap, bound_b, beta_threshold) = if gap.is_positive() {
        let cap = rat(1, 2) + BigRational::one() / (rat_u(4, 1) * &gap);
        let b = (rat_u(n as u64, 1) * &gap + BigRational::one())
            / (rat_u(4, 1) * rat_u(r, 1) * &gap);
        let thr = rat(1, 2)
            - (&gap - BigRational::one()) / (rat_u(2, 1) * &gap * rat_u(n as u64 + 1, 1));
        (Some(cap), Some(b), Some(thr))
    } else {
        (None, None, None)
    };

    Ok(ExponentReport {
        n,
        d,
        r,
        valid: reasons.is_empty(),
        reasons,
        theta,
        theta_mode,
        weight,
        rank,
        h_exp_cap,
        bound_a,
        bound_b,
        beta_threshold,
        beta_n: beta_n(n),
    })
}

/// Exponent calculus for the standard system in `n` variables of degree `d`.
pub fn exponent_report_with(
    n: usize,
    d: u64,
    r: u64,
    opts: &ReportOptions,
) -> Result<ExponentReport> {
    let weight = standard_weight(n, d as u32);
    let rank = standard_rank(n, d as u32);
    let (range_ok, range_text) = standard_r_range(n, weight, r);
    report_from_invariants(n, d, r, weight, rank, range_ok, &range_text, opts)
}

pub fn exponent_report(n: usize, d: u64, r: u64) -> Result<ExponentReport> {
    exponent_report_with(n, d, r, &ReportOptions::default())
}

fn standard_r_range(n: usize, weight: u64, r: u64) -> (bool, String) {
    if n <= 2 {
        (
            r > weight + 1,
            format!("sharp count needs r > M+1 = {}", weight + 1),
        )
    } else {
        let needed = (weight + 1) * (n as u64 - 1) + 1;
        (
            r > needed,
            format!("sharp count needs r > (M+1)(n-1)+1 = {needed}"),
        )
    }
}

/// Exponent calculus for a general reduced monomial TDI system.
///
/// Standard and capped (ACK) systems are valid whenever `Theta > M`; a
/// custom TDI system additionally needs the `r > R(d+1)` count range.
pub fn tdi_theorem_report(system: &MonomialSystem, r: u64) -> Result<ExponentReport> {
    let check = system.is_tdi();
    if !check.tdi {
        let cert = check.certificate.unwrap();
        return Err(Error::NotTDI(format!(
            "shifting x^{:?} produces x^{:?} outside the system",
            cert.source.0, cert.missing.0
        )));
    }
    if !system.has_linear_monomials() {
        return Err(Error::NotTDI(
            "system must contain the linear monomial in each variable".into(),
        ));
    }
    let n = system.dimension();
    let weight = system.weight();
    let rank = system.rank() as u64;
    let d = system.degree();
    let (range_ok, range_text) = match system.kind() {
        SystemKind::Standard { .. } | SystemKind::Ack { .. } => (true, String::new()),
        SystemKind::Custom => {
            let needed = rank * (d + 1);
            (
                r > needed,
                format!("custom TDI systems need r > R(d+1) = {needed}"),
            )
        }
    };
    report_from_invariants(
        n,
        d,
        r,
        weight,
        rank,
        range_ok,
        &range_text,
        &ReportOptions::default(),
    )
}

/// The nontriviality cutoff `1/2 - (Theta-M-1)/(2(Theta-M)(n+1))`.
pub fn nontrivial_threshold(n: usize, d: u64, r: u64) -> Result<BigRational> {
    let report = exponent_report(n, d, r)?;
    report.beta_threshold.ok_or_else(|| {
        Error::InvalidRange(format!(
            "threshold undefined: Theta = {} <= M = {}",
            RationalOut::of(&report.theta).fraction,
            report.weight
        ))
    })
}

/// The window of admissible averaging parameters `P`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PWindow {
    pub lower: f64,
    pub upper: f64,
    /// Exponent cap on `H`: the window is nonempty only when
    /// `H < q^(1/2 + 1/(4(Theta-mu)))`.
    pub h_cap: f64,
    /// `H P < q`, evaluated at the window's upper end.
    pub cond_hp: bool,
    /// `P <= H q^(-1/(2 Theta))`, evaluated at the window's upper end.
    pub cond_p_range: bool,
}

/// `[H q^(-1/(2(Theta-mu)))/2, H q^(-1/(2(Theta-mu))))` with its condition
/// flags; `mu` defaults to the weight `M`.
pub fn p_window(n: usize, d: u64, r: u64, h: f64, q: f64, mu: Option<u64>) -> Result<PWindow> {
    if !(h >= 1.0) || !(q > 1.0) {
        return Err(Error::InvalidRange("need H >= 1 and q > 1".into()));
    }
    let theta = theta_floor(n, r)?;
    let mu = mu.unwrap_or(standard_weight(n, d as u32));
    if theta <= mu {
        return Err(Error::EmptyWindow(format!(
            "Theta = {theta} does not exceed mu = {mu}"
        )));
    }
    let gap = (theta - mu) as f64;
    let h_cap = q.powf(0.5 + 1.0 / (4.0 * gap));
    if h >= h_cap {
        return Err(Error::EmptyWindow(format!(
            "H = {h} is not below q^(1/2 + 1/(4(Theta-mu))) = {h_cap}"
        )));
    }
    let upper = h * q.powf(-1.0 / (2.0 * gap));
    let lower = upper / 2.0;
    Ok(PWindow {
        lower,
        upper,
        h_cap,
        cond_hp: h * upper < q,
        cond_p_range: upper <= h * q.powf(-1.0 / (2.0 * theta as f64)),
    })
}

/// Savings report at `H = q^(beta_n + kappa)`.
#[derive(Clone, Debug)]
pub struct DeltaReport {
    pub n: usize,
    pub d: u64,
    pub kappa: BigRational,
    pub r_used: u64,
    /// Whether `r` was chosen by the optimizer or supplied.
    pub r_optimized: bool,
    pub theta: u64,
    pub weight: u64,
    /// Exact savings `delta`: the bound is `H^n q^(-delta)`.
    pub delta: BigRational,
}

/// The savings exponent `delta = (2 kappa (n+1)(Theta-M) - 1)/(4r(Theta-M))`
/// with `r` chosen as the nearest integer to `(n-1)/((n+1) kappa)` when not
/// supplied.
pub fn delta_savings(
    n: usize,
    d: u64,
    kappa: &BigRational,
    r: Option<u64>,
) -> Result<DeltaReport> {
    if n < 2 {
        return Err(Error::DimensionTooSmall(n));
    }
    if !kappa.is_positive() {
        return Err(Error::InvalidRange("kappa must be positive".into()));
    }
    let weight = standard_weight(n, d as u32);
    let (r_used, r_optimized) = match r {
        Some(r) => (r, false),
        None => {
            let target = rat_u(n as u64 - 1, n as u64 + 1) / kappa;
            let rounded = target.round().to_integer().to_u64().unwrap_or(0).max(1);
            (rounded, true)
        }
    };
    let theta = theta_floor(n, r_used)?;
    if theta <= weight {
        return Err(if r_optimized {
            Error::KappaTooLarge {
                r: r_used,
                theta,
                m: weight,
            }
        } else {
            Error::InvalidRange(format!(
                "Theta = {theta} does not exceed M = {weight} at r = {r_used}"
            ))
        });
    }
    let gap = rat_u(theta - weight, 1);
    let delta = (rat_u(2, 1) * kappa * rat_u(n as u64 + 1, 1) * &gap - BigRational::one())
        / (rat_u(4 * r_used, 1) * &gap);
    Ok(DeltaReport {
        n,
        d,
        kappa: kappa.clone(),
        r_used,
        r_optimized,
        theta,
        weight,
        delta,
    })
}

/// Continuous argmax of the savings shape `f(r) = (br - c)/(r(r - d0))`
/// with the substitution `Theta ~ (r-1)/(n-1)`; used to sanity-check the
/// integer optimizer.
pub fn delta_argmax_continuous(n: usize, weight: u64, kappa: f64) -> f64 {
    let b = kappa * (n as f64 + 1.0) / 2.0;
    let d0 = (weight * (n as u64 - 1) + 1) as f64;
    let c = d0 * b + (n as f64 - 1.0) / 4.0;
    let disc = (c * c - d0 * b * c).max(0.0).sqrt();
    let r1 = (c - disc) / b;
    let r2 = (c + disc) / b;
    let f = |r: f64| (b * r - c) / (r * (r - d0));
    if r1 > d0 && f(r1) >= f(r2) {
        r1
    } else {
        r2
    }
}

/// Evaluation of the two-term bound shape for `T` at explicit parameters.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PropBound {
    /// Contribution carrying `J_r^(1/2r)`.
    pub count_term: f64,
    /// Contribution carrying `q^(1/4r) (H/P)^(n - Theta/2r)`.
    pub tail_term: f64,
    pub total: f64,
}

/// The right-hand side `(H/P)^(M/2r) H^(-n/2r) P^(n-1/2r) q^(n/4r)
/// (log q)^(n+1) { J^(1/2r) + q^(1/4r) (H/P)^(n-Theta/2r) }` with implied
/// constant 1.
pub fn prop_bound_rhs(
    n: usize,
    system: &MonomialSystem,
    r: u64,
    h: f64,
    p: f64,
    q: f64,
    j_value: f64,
) -> Result<PropBound> {
    let theta = theta_floor(n, r)? as f64;
    let mut violated = Vec::new();
    if (r as usize) < n {
        violated.push(format!("r = {r} below n = {n}"));
    }
    if !(h * p < q) {
        violated.push(format!("HP = {} not below q = {q}", h * p));
    }
    if !(p <= h * q.powf(-1.0 / (2.0 * theta))) {
        violated.push(format!(
            "P = {p} exceeds H q^(-1/(2 Theta)) = {}",
            h * q.powf(-1.0 / (2.0 * theta))
        ));
    }
    if !violated.is_empty() {
        return Err(Error::HypothesisViolated(violated.join("; ")));
    }
    let m = system.weight() as f64;
    let two_r = 2.0 * r as f64;
    let prefix = (h / p).powf(m / two_r)
        * h.powf(-(n as f64) / two_r)
        * p.powf(n as f64 - 1.0 / two_r)
        * q.powf(n as f64 / (2.0 * two_r))
        * q.ln().powi(n as i32 + 1);
    let count_term = prefix * j_value.powf(1.0 / two_r);
    let tail_term =
        prefix * q.powf(1.0 / (2.0 * two_r)) * (h / p).powf(n as f64 - theta / two_r);
    Ok(PropBound {
        count_term,
        tail_term,
        total: count_term + tail_term,
    })
}
