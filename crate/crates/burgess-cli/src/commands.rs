//! Implementations of the CLI subcommands.
//!
//! Each command has a clap `*Args` struct (every field optional) and a
//! serde `*Config` struct (the resolved parameters, defaults included); the
//! resolved config is what enters the cache digest and the stored record.

use std::time::Instant;

use anyhow::{anyhow, bail, Result};
use clap::Args;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use burgess_core::charsum::{
    complete_mult_sum, mixed_sum, stratify_audit, verify_b_sum_lemma, verify_prod_lemma,
    BoxRegion, SampleMode, StratifyMode,
};
use burgess_core::exponents::{
    delta_savings, exponent_report_with, tdi_theorem_report, RationalOut, ReportOptions,
};
use burgess_core::ff::DirichletCharacter;
use burgess_core::poly::{
    is_admissible, parse_poly, Monomial, MonomialSystem, Verdict,
};
use burgess_core::vinogradov::{jr_bruteforce, jr_mitm, CountResult};
use burgess_core::{IntPoly, RealPoly};

use crate::cache::ResultCache;
use crate::inputs;
use crate::output::{csv_table, json_pretty, Format};
use crate::resolve_config;

pub struct Context {
    pub format: Format,
    pub budget: u64,
    pub cache: ResultCache,
    pub file_config: Option<serde_json::Value>,
}

fn is_false(b: &bool) -> bool {
    !*b
}

/// Print a payload, going through the cache when the command is cacheable.
fn emit_cached(
    ctx: &Context,
    command: &str,
    config: &impl Serialize,
    compute: impl FnOnce() -> Result<String>,
) -> Result<u8> {
    let config_value = serde_json::to_value(config)?;
    let digest = ResultCache::digest(command, &config_value, ctx.format.name());
    let start = Instant::now();
    if let Some(stored) = ctx.cache.lookup(&digest) {
        print!("{stored}");
        eprintln!(
            "cache-hit digest={digest} wall-ms={:.3}",
            start.elapsed().as_secs_f64() * 1e3
        );
        return Ok(0);
    }
    let payload = compute()?;
    let wall_ms = start.elapsed().as_secs_f64() * 1e3;
    if ctx.cache.enabled() {
        ctx.cache
            .store(&digest, command, &config_value, &payload, wall_ms)?;
        eprintln!("cache-store digest={digest} wall-ms={wall_ms:.3}");
    } else {
        eprintln!("wall-ms={wall_ms:.3}");
    }
    print!("{payload}");
    Ok(0)
}

fn emit(payload: String) -> Result<u8> {
    print!("{payload}");
    Ok(0)
}

// ---------------------------------------------------------------------------
// Shared system descriptor flags
// ---------------------------------------------------------------------------

#[derive(Args, Clone, Serialize, Deserialize, Default)]
pub struct SystemFlags {
    /// Standard system: N D.
    #[arg(long, num_args = 2, value_names = ["N", "D"])]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub standard: Option<Vec<u64>>,

    /// Capped system: per-variable caps (comma list) and total cap K.
    #[arg(long, num_args = 2, value_names = ["CAPS", "K"])]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ack: Option<Vec<String>>,

    /// Custom exponent set: dimension N and `a,b|c,d|...` multi-indices.
    #[arg(long, num_args = 2, value_names = ["N", "LAMBDA"])]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub custom: Option<Vec<String>>,
}

impl SystemFlags {
    fn resolve(&self) -> Result<MonomialSystem> {
        inputs::resolve_system(&self.standard, &self.ack, &self.custom)
    }
}

// ---------------------------------------------------------------------------
// system
// ---------------------------------------------------------------------------

#[derive(Args, Serialize)]
pub struct SystemArgs {
    #[command(flatten)]
    pub flags: SystemFlags,
}

#[derive(Serialize, Deserialize)]
struct SystemConfig {
    flags: SystemFlags,
}

pub fn run_system(args: SystemArgs, ctx: &Context) -> Result<u8> {
    let config: SystemConfig = resolve_config(&args, ctx.file_config.as_ref(), "system")?;
    let system = config.flags.resolve()?;
    let check = system.is_tdi();
    let payload = match ctx.format {
        Format::Json => json_pretty(&serde_json::json!({
            "descriptor": system.descriptor(),
            "n": system.dimension(),
            "d": system.degree(),
            "rank": system.rank(),
            "weight": system.weight(),
            "tdi": check.tdi,
            "certificate": check.certificate,
            "lambda": system.exponents().iter().map(|m| m.0.clone()).collect::<Vec<_>>(),
        }))?,
        Format::Csv => csv_table(
            &["descriptor", "n", "d", "rank", "weight", "tdi"],
            &[vec![
                system.descriptor(),
                system.dimension().to_string(),
                system.degree().to_string(),
                system.rank().to_string(),
                system.weight().to_string(),
                check.tdi.to_string(),
            ]],
        )?,
        Format::Text => {
            let lambda = system
                .exponents()
                .iter()
                .map(|m| format!("{:?}", m.0))
                .collect::<Vec<_>>()
                .join(" ");
            let mut out = format!(
                "system {}\nn = {}\nd = {}\nR = {}\nM = {}\nTDI = {}\nLambda = {}\n",
                system.descriptor(),
                system.dimension(),
                system.degree(),
                system.rank(),
                system.weight(),
                if check.tdi { "yes" } else { "no" },
                lambda
            );
            if let Some(cert) = check.certificate {
                out.push_str(&format!(
                    "certificate: shifting x^{:?} needs x^{:?}\n",
                    cert.source.0, cert.missing.0
                ));
            }
            out
        }
    };
    emit(payload)
}

// ---------------------------------------------------------------------------
// admissible
// ---------------------------------------------------------------------------

#[derive(Args, Serialize)]
pub struct AdmissibleArgs {
    /// Prime modulus.
    #[arg(short = 'q', long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<u64>,

    /// Character order.
    #[arg(short = 'D', long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub order: Option<u64>,

    /// The form, in the polynomial grammar (variables x1..xn).
    #[arg(short = 'F', long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub form: Option<String>,

    /// Number of variables; inferred as the largest index when omitted.
    #[arg(short = 'n', long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
}

#[derive(Serialize, Deserialize)]
struct AdmissibleConfig {
    q: u64,
    order: u64,
    form: String,
    #[serde(default)]
    n: Option<usize>,
}

/// Largest variable index mentioned in a polynomial text.
fn infer_dimension(text: &str) -> usize {
    let mut best = 1;
    let bytes = text.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'x' {
            let mut j = i + 1;
            let mut value = 0usize;
            while j < bytes.len() && bytes[j].is_ascii_digit() {
                value = value * 10 + (bytes[j] - b'0') as usize;
                j += 1;
            }
            if j > i + 1 {
                best = best.max(value);
            }
            i = j;
        } else {
            i += 1;
        }
    }
    best
}

pub fn run_admissible(args: AdmissibleArgs, ctx: &Context) -> Result<u8> {
    let config: AdmissibleConfig = resolve_config(&args, ctx.file_config.as_ref(), "admissible")?;
    let n = config.n.unwrap_or_else(|| infer_dimension(&config.form));
    let form: IntPoly = parse_poly(&config.form, n)?;
    let field = burgess_core::ff::PrimeField::new(config.q)?;
    // Admissibility is a property of (F, q, order) alone; the order need
    // not divide q - 1 here.
    if config.order < 1 {
        bail!("the power order must be at least 1");
    }
    let report = is_admissible(&form, &field, config.order as u32)?;
    let verdict_text = match report.verdict {
        Verdict::Admissible => "admissible",
        Verdict::NotAdmissible => "not-admissible",
        Verdict::Indeterminate => "indeterminate",
    };
    let payload = match ctx.format {
        Format::Json => json_pretty(&serde_json::json!({
            "q": config.q,
            "order": config.order,
            "form": config.form,
            "verdict": verdict_text,
            "power_free_part": report.delta_free_part.to_string(),
            "witness": report.witness,
            "method": "direction-search",
            "reason": report.reason,
        }))?,
        Format::Csv => csv_table(
            &["q", "order", "form", "verdict", "power_free_part", "witness"],
            &[vec![
                config.q.to_string(),
                config.order.to_string(),
                config.form.clone(),
                verdict_text.to_string(),
                report.delta_free_part.to_string(),
                report
                    .witness
                    .as_ref()
                    .map(|w| format!("{w:?}"))
                    .unwrap_or_default(),
            ]],
        )?,
        Format::Text => {
            let mut out = format!("{verdict_text}\n");
            out.push_str(&format!("power-free part h = {}\n", report.delta_free_part));
            if let Some(w) = &report.witness {
                out.push_str(&format!("invariant direction v = {w:?}\n"));
            }
            if let Some(reason) = &report.reason {
                out.push_str(&format!("reason: {reason}\n"));
            }
            out
        }
    };
    print!("{payload}");
    Ok(match report.verdict {
        Verdict::Admissible => 0,
        Verdict::NotAdmissible => 1,
        Verdict::Indeterminate => 3,
    })
}

// ---------------------------------------------------------------------------
// jr
// ---------------------------------------------------------------------------

#[derive(Args, Serialize)]
pub struct JrArgs {
    #[command(flatten)]
    pub flags: SystemFlags,

    /// Half-length r of the tuples.
    #[arg(short = 'r', long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<u64>,

    /// Box sizes X, comma separated.
    #[arg(short = 'X', long = "x-values")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x_values: Option<String>,

    /// brute | mitm | both.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub method: Option<String>,
}

#[derive(Serialize, Deserialize)]
struct JrConfig {
    flags: SystemFlags,
    r: u64,
    x_values: String,
    #[serde(default = "default_method")]
    method: String,
}

fn default_method() -> String {
    "mitm".into()
}

fn jr_rows(results: &[CountResult]) -> Vec<Vec<String>> {
    results
        .iter()
        .map(|c| {
            vec![
                c.system.clone(),
                c.r.to_string(),
                c.x.to_string(),
                c.count.to_string(),
                c.method.as_str().to_string(),
                format!("{:.6}", c.seconds),
            ]
        })
        .collect()
}

pub fn run_jr(args: JrArgs, ctx: &Context) -> Result<u8> {
    let config: JrConfig = resolve_config(&args, ctx.file_config.as_ref(), "jr")?;
    let system = config.flags.resolve()?;
    let xs = inputs::parse_u64_list(&config.x_values)?;
    let budget = ctx.budget;
    emit_cached(ctx, "jr", &config, || {
        let mut results = Vec::new();
        for &x in &xs {
            match config.method.as_str() {
                "brute" => results.push(jr_bruteforce(&system, config.r, x, budget)?),
                "mitm" => results.push(jr_mitm(&system, config.r, x, budget)?),
                "both" => {
                    results.push(jr_bruteforce(&system, config.r, x, budget)?);
                    results.push(jr_mitm(&system, config.r, x, budget)?);
                }
                other => bail!("unknown method {other:?} (brute | mitm | both)"),
            }
        }
        match ctx.format {
            Format::Json => json_pretty(
                &results
                    .iter()
                    .map(|c| {
                        serde_json::json!({
                            "system": c.system,
                            "r": c.r,
                            "x": c.x,
                            "count": c.count.to_string(),
                            "method": c.method.as_str(),
                            "seconds": format!("{:.6}", c.seconds),
                        })
                    })
                    .collect::<Vec<_>>(),
            ),
            Format::Csv | Format::Text => csv_table(
                &["system", "r", "X", "J", "method", "seconds"],
                &jr_rows(&results),
            ),
        }
    })
}

// ---------------------------------------------------------------------------
// charsum
// ---------------------------------------------------------------------------

#[derive(Args, Serialize)]
pub struct CharsumArgs {
    #[arg(short = 'q', long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<u64>,

    #[arg(short = 'D', long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub order: Option<u64>,

    /// The form F.
    #[arg(short = 'F', long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub form: Option<String>,

    /// Real phase polynomial g (defaults to 0).
    #[arg(short = 'g', long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phase: Option<String>,

    /// Summation box `N1,..,Nn;H1,..,Hn` for the mixed sum.
    #[arg(long = "box")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub box_spec: Option<String>,

    /// Collection `x1;x2;...` switching to the complete multiplicative sum.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub collection: Option<String>,
}

#[derive(Serialize, Deserialize)]
struct CharsumConfig {
    q: u64,
    order: u64,
    form: String,
    #[serde(default)]
    phase: Option<String>,
    #[serde(default)]
    box_spec: Option<String>,
    #[serde(default)]
    collection: Option<String>,
}

pub fn run_charsum(args: CharsumArgs, ctx: &Context) -> Result<u8> {
    let config: CharsumConfig = resolve_config(&args, ctx.file_config.as_ref(), "charsum")?;
    let chi = DirichletCharacter::new(config.q, config.order)?;
    let budget = ctx.budget;
    emit_cached(ctx, "charsum", &config, || {
        let (kind, acc) = match (&config.collection, &config.box_spec) {
            (Some(text), None) => {
                if config.phase.is_some() {
                    bail!("complete sums take no phase polynomial");
                }
                let collection = inputs::parse_collection(text)?;
                let form: IntPoly = parse_poly(&config.form, collection.dimension())?;
                (
                    "complete",
                    complete_mult_sum(&form, &collection, &chi, budget)?,
                )
            }
            (None, Some(text)) => {
                let region = inputs::parse_box(text)?;
                let n = region.dimension();
                let form: IntPoly = parse_poly(&config.form, n)?;
                let phase: RealPoly = match &config.phase {
                    None => RealPoly::zero(n),
                    Some(g) => parse_poly(g, n)?,
                };
                ("mixed", mixed_sum(&form, &phase, &chi, &region, budget)?)
            }
            _ => bail!("give exactly one of --box (mixed sum) or --collection (complete sum)"),
        };
        let abs = acc.abs();
        match ctx.format {
            Format::Json => json_pretty(&serde_json::json!({
                "kind": kind,
                "re": acc.re,
                "im": acc.im,
                "abs": abs,
                "terms": acc.term_count,
                "roundoff_bound": acc.roundoff_bound(),
            })),
            Format::Csv => csv_table(
                &["kind", "re", "im", "abs", "terms"],
                &[vec![
                    kind.to_string(),
                    format!("{:.12e}", acc.re),
                    format!("{:.12e}", acc.im),
                    format!("{abs:.12e}"),
                    acc.term_count.to_string(),
                ]],
            ),
            Format::Text => Ok(format!(
                "{kind} sum = {:.9} + {:.9} i  (|.| = {abs:.9}, {} terms)\n",
                acc.re, acc.im, acc.term_count
            )),
        }
    })
}

// ---------------------------------------------------------------------------
// stratify
// ---------------------------------------------------------------------------

#[derive(Args, Serialize)]
pub struct StratifyArgs {
    #[arg(short = 'q', long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<u64>,

    #[arg(short = 'D', long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub order: Option<u64>,

    #[arg(short = 'F', long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub form: Option<String>,

    #[command(flatten)]
    pub flags: SystemFlags,

    #[arg(short = 'r', long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<u64>,

    /// Box sides, comma separated.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sides: Option<String>,

    /// Threshold constant C.
    #[arg(short = 'C', long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,

    /// Ceiling constant C''.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cpp: Option<f64>,

    /// Monte Carlo sample count (exhaustive when omitted).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sample: Option<u64>,

    /// RNG seed; required for sampling.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Serialize, Deserialize)]
struct StratifyConfig {
    q: u64,
    order: u64,
    form: String,
    flags: SystemFlags,
    r: u64,
    sides: String,
    #[serde(default = "default_one")]
    c: f64,
    #[serde(default = "default_one")]
    cpp: f64,
    #[serde(default)]
    sample: Option<u64>,
    #[serde(default)]
    seed: Option<u64>,
}

fn default_one() -> f64 {
    1.0
}

pub fn run_stratify(args: StratifyArgs, ctx: &Context) -> Result<u8> {
    let config: StratifyConfig = resolve_config(&args, ctx.file_config.as_ref(), "stratify")?;
    let system = config.flags.resolve()?;
    let sides = inputs::parse_u64_list(&config.sides)?;
    let chi = DirichletCharacter::new(config.q, config.order)?;
    let form: IntPoly = parse_poly(&config.form, sides.len())?;
    let (mode, seed) = match config.sample {
        None => (StratifyMode::Exhaustive, 0),
        Some(count) => (
            StratifyMode::Sampled { count },
            config
                .seed
                .ok_or_else(|| anyhow!("sampling commands require --seed"))?,
        ),
    };
    let budget = ctx.budget;
    emit_cached(ctx, "stratify", &config, || {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let audit = stratify_audit(
            &form, &chi, &system, config.r, &sides, config.c, config.cpp, mode, budget, &mut rng,
        )?;
        match ctx.format {
            Format::Json => json_pretty(&audit),
            Format::Csv | Format::Text => {
                let rows = audit
                    .rows
                    .iter()
                    .map(|row| {
                        vec![
                            row.j.to_string(),
                            format!("{:.6}", row.threshold),
                            row.count.to_string(),
                            format!("{:.6}", row.ceiling),
                            format!("{:.6e}", row.ratio),
                        ]
                    })
                    .collect::<Vec<_>>();
                csv_table(&["j", "threshold", "count", "ceiling", "ratio"], &rows)
            }
        }
    })
}

// ---------------------------------------------------------------------------
// verify prod-lemma
// ---------------------------------------------------------------------------

#[derive(Args, Serialize)]
pub struct ProdLemmaArgs {
    #[arg(short = 'n', long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,

    #[arg(short = 'd', long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<u32>,

    #[arg(short = 'r', long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<usize>,

    /// Box side K; the partition parameter defaults to 2rK.
    #[arg(short = 'K', long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<u64>,

    /// Check every collection of (0,K]^(2r).
    #[arg(long)]
    #[serde(skip_serializing_if = "is_false")]
    pub exhaustive: bool,

    /// Number of sampled collections otherwise.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<u64>,

    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,

    /// Override the partition parameter Q (below 2rK this exercises the
    /// wraparound reporting).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q_override: Option<u64>,
}

#[derive(Serialize, Deserialize)]
struct ProdLemmaConfig {
    n: usize,
    d: u32,
    r: usize,
    k: u64,
    #[serde(default)]
    exhaustive: bool,
    #[serde(default)]
    samples: Option<u64>,
    #[serde(default)]
    seed: Option<u64>,
    #[serde(default)]
    q_override: Option<u64>,
}

pub fn run_prod_lemma(args: ProdLemmaArgs, ctx: &Context) -> Result<u8> {
    let config: ProdLemmaConfig = resolve_config(&args, ctx.file_config.as_ref(), "prod-lemma")?;
    let system = MonomialSystem::standard(config.n, config.d)?;
    let (mode, seed) = if config.exhaustive {
        (SampleMode::Exhaustive, 0)
    } else {
        let count = config
            .samples
            .ok_or_else(|| anyhow!("give --exhaustive or --samples"))?;
        (
            SampleMode::Sampled { count },
            config
                .seed
                .ok_or_else(|| anyhow!("sampling commands require --seed"))?,
        )
    };
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let report = verify_prod_lemma(
        &system,
        config.r,
        config.k,
        mode,
        config.q_override,
        ctx.budget,
        &mut rng,
    )?;
    let payload = match ctx.format {
        Format::Json => json_pretty(&report)?,
        Format::Csv => csv_table(
            &[
                "system",
                "r",
                "k",
                "q",
                "checked",
                "violations",
                "wraparound",
                "max_deviation",
                "passed",
            ],
            &[vec![
                report.system.clone(),
                report.r.to_string(),
                report.k.to_string(),
                report.q.to_string(),
                report.checked.to_string(),
                report.violations.to_string(),
                report.wraparound.to_string(),
                format!("{:.3e}", report.max_deviation),
                report.passed().to_string(),
            ]],
        )?,
        Format::Text => {
            let verdict = if report.passed() { "PASS" } else { "FAIL" };
            let mut out = format!(
                "{verdict} {}/{} collections (Q = {}, max deviation {:.3e})\n",
                report.checked - report.violations,
                report.checked,
                report.q,
                report.max_deviation
            );
            if report.wraparound > 0 {
                out.push_str(&format!(
                    "wraparound: {} collections have Xi_Q != Xi, e.g. {:?}\n",
                    report.wraparound,
                    report.first_wraparound.as_ref().map(|c| &c.points)
                ));
            }
            out
        }
    };
    print!("{payload}");
    Ok(if report.passed() { 0 } else { 1 })
}

// ---------------------------------------------------------------------------
// verify b-sum
// ---------------------------------------------------------------------------

#[derive(Args, Serialize)]
pub struct BSumArgs {
    #[arg(short = 'n', long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,

    #[arg(short = 'r', long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<u64>,

    #[arg(short = 'q', long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<u64>,

    /// Side samples are drawn from [1, k_max].
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_max: Option<u64>,

    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<u64>,

    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Serialize, Deserialize)]
struct BSumConfig {
    n: usize,
    r: u64,
    q: u64,
    #[serde(default = "default_k_max")]
    k_max: u64,
    #[serde(default = "default_trials")]
    trials: u64,
    seed: u64,
}

fn default_k_max() -> u64 {
    64
}

fn default_trials() -> u64 {
    1000
}

pub fn run_b_sum(args: BSumArgs, ctx: &Context) -> Result<u8> {
    let config: BSumConfig = resolve_config(&args, ctx.file_config.as_ref(), "b-sum")?;
    let mut rng = ChaCha12Rng::seed_from_u64(config.seed);
    let report = verify_b_sum_lemma(
        config.n,
        config.r,
        config.q,
        config.k_max,
        config.trials,
        &mut rng,
    )?;
    let passed = report.violations == 0;
    let payload = match ctx.format {
        Format::Json => json_pretty(&report)?,
        Format::Csv => csv_table(
            &[
                "n", "r", "q", "trials", "checked", "skipped", "violations", "max_ratio",
            ],
            &[vec![
                report.n.to_string(),
                report.r.to_string(),
                report.q.to_string(),
                report.trials.to_string(),
                report.checked.to_string(),
                report.skipped.to_string(),
                report.violations.to_string(),
                format!("{:.6}", report.max_ratio),
            ]],
        )?,
        Format::Text => format!(
            "{} {}/{} gated samples ({} skipped by the hypothesis, max lhs/rhs {:.4})\n",
            if passed { "PASS" } else { "FAIL" },
            report.checked - report.violations,
            report.checked,
            report.skipped,
            report.max_ratio
        ),
    };
    print!("{payload}");
    Ok(if passed { 0 } else { 1 })
}

// ---------------------------------------------------------------------------
// exponents
// ---------------------------------------------------------------------------

#[derive(Args, Serialize)]
pub struct ExponentsArgs {
    #[arg(short = 'n', long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,

    #[arg(short = 'd', long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<u64>,

    #[arg(short = 'r', long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<u64>,

    /// Capped system (CAPS, K) instead of (n, d).
    #[arg(long, num_args = 2, value_names = ["CAPS", "K"])]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ack: Option<Vec<String>>,

    /// Custom system (N, LAMBDA) instead of (n, d).
    #[arg(long, num_args = 2, value_names = ["N", "LAMBDA"])]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub custom: Option<Vec<String>>,

    /// Conjectural codimension Theta = r/alpha (rational like 3/2).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<String>,

    /// Enable the dimension-one convention Theta = r.
    #[arg(long)]
    #[serde(skip_serializing_if = "is_false")]
    pub n1: bool,
}

#[derive(Serialize, Deserialize)]
struct ExponentsConfig {
    #[serde(default)]
    n: Option<usize>,
    #[serde(default)]
    d: Option<u64>,
    r: u64,
    #[serde(default)]
    ack: Option<Vec<String>>,
    #[serde(default)]
    custom: Option<Vec<String>>,
    #[serde(default)]
    alpha: Option<String>,
    #[serde(default)]
    n1: bool,
}

fn rat_line(label: &str, value: &Option<RationalOut>) -> String {
    match value {
        None => format!("{label} = (undefined)\n"),
        Some(v) => format!("{label} = {} ({:.6})\n", v.fraction, v.decimal),
    }
}

pub fn run_exponents(args: ExponentsArgs, ctx: &Context) -> Result<u8> {
    let config: ExponentsConfig = resolve_config(&args, ctx.file_config.as_ref(), "exponents")?;
    let report = if config.ack.is_some() || config.custom.is_some() {
        let system = inputs::resolve_system(&None, &config.ack, &config.custom)?;
        tdi_theorem_report(&system, config.r)?
    } else {
        let n = config.n.ok_or_else(|| anyhow!("-n is required"))?;
        let d = config.d.ok_or_else(|| anyhow!("-d is required"))?;
        let opts = ReportOptions {
            dimension_one_convention: config.n1,
            conjectural_alpha: config
                .alpha
                .as_deref()
                .map(inputs::parse_rational)
                .transpose()?,
        };
        exponent_report_with(n, d, config.r, &opts)?
    };
    let rendered = report.rendered();
    let payload = match ctx.format {
        Format::Json => json_pretty(&rendered)?,
        Format::Csv => csv_table(
            &[
                "n",
                "d",
                "r",
                "theta",
                "weight",
                "rank",
                "valid",
                "h_exp_cap",
                "bound_a",
                "bound_b",
                "beta_threshold",
                "beta_n",
            ],
            &[vec![
                rendered.n.to_string(),
                rendered.d.to_string(),
                rendered.r.to_string(),
                rendered.theta.fraction.clone(),
                rendered.weight.to_string(),
                rendered.rank.to_string(),
                rendered.valid.to_string(),
                rendered
                    .h_exp_cap
                    .as_ref()
                    .map(|v| v.fraction.clone())
                    .unwrap_or_default(),
                rendered.bound_a.fraction.clone(),
                rendered
                    .bound_b
                    .as_ref()
                    .map(|v| v.fraction.clone())
                    .unwrap_or_default(),
                rendered
                    .beta_threshold
                    .as_ref()
                    .map(|v| v.fraction.clone())
                    .unwrap_or_default(),
                rendered.beta_n.fraction.clone(),
            ]],
        )?,
        Format::Text => {
            let mut out = format!(
                "n = {}, d = {}, r = {}\ntheta = {} ({:?})\nM = {}, R = {}\nvalid = {}{}\n",
                rendered.n,
                rendered.d,
                rendered.r,
                rendered.theta.fraction,
                rendered.theta_mode,
                rendered.weight,
                rendered.rank,
                rendered.valid,
                if rendered.reasons.is_empty() {
                    String::new()
                } else {
                    format!(" ({})", rendered.reasons.join("; "))
                }
            );
            out.push_str(&rat_line("H exponent cap", &rendered.h_exp_cap));
            out.push_str(&rat_line("a (H exponent)", &Some(rendered.bound_a.clone())));
            out.push_str(&rat_line("b (q exponent)", &rendered.bound_b));
            out.push_str(&rat_line("beta threshold", &rendered.beta_threshold));
            out.push_str(&rat_line("beta_n", &Some(rendered.beta_n.clone())));
            out.push_str("bound shape: |S| <= H^a q^(b+eps), implied constant 1\n");
            out
        }
    };
    emit(payload)
}

// ---------------------------------------------------------------------------
// delta
// ---------------------------------------------------------------------------

#[derive(Args, Serialize)]
pub struct DeltaArgs {
    #[arg(short = 'n', long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,

    #[arg(short = 'd', long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<u64>,

    /// The offset kappa in H = q^(beta_n + kappa); decimal or p/q.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa: Option<String>,

    /// Explicit r (the optimizer picks one when omitted).
    #[arg(short = 'r', long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<u64>,
}

#[derive(Serialize, Deserialize)]
struct DeltaConfig {
    n: usize,
    d: u64,
    kappa: String,
    #[serde(default)]
    r: Option<u64>,
}

pub fn run_delta(args: DeltaArgs, ctx: &Context) -> Result<u8> {
    let config: DeltaConfig = resolve_config(&args, ctx.file_config.as_ref(), "delta")?;
    let kappa = inputs::parse_rational(&config.kappa)?;
    let report = delta_savings(config.n, config.d, &kappa, config.r)?;
    let delta = RationalOut::of(&report.delta);
    let kappa_out = RationalOut::of(&report.kappa);
    let payload = match ctx.format {
        Format::Json => json_pretty(&serde_json::json!({
            "n": report.n,
            "d": report.d,
            "kappa": kappa_out,
            "r_used": report.r_used,
            "r_optimized": report.r_optimized,
            "theta": report.theta,
            "weight": report.weight,
            "delta": delta,
        }))?,
        Format::Csv => csv_table(
            &["n", "d", "kappa", "r_used", "theta", "weight", "delta", "delta_decimal"],
            &[vec![
                report.n.to_string(),
                report.d.to_string(),
                kappa_out.fraction.clone(),
                report.r_used.to_string(),
                report.theta.to_string(),
                report.weight.to_string(),
                delta.fraction.clone(),
                format!("{:.6e}", delta.decimal),
            ]],
        )?,
        Format::Text => format!(
            "r* = {}{}\ntheta = {}, M = {}\ndelta = {} ({:.6e})\nbound shape: H^n q^(-delta)\n",
            report.r_used,
            if report.r_optimized { " (optimized)" } else { "" },
            report.theta,
            report.weight,
            delta.fraction,
            delta.decimal
        ),
    };
    emit(payload)
}

// ---------------------------------------------------------------------------
// sample-t
// ---------------------------------------------------------------------------

#[derive(Args, Serialize)]
pub struct SampleTArgs {
    #[arg(short = 'q', long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<u64>,

    #[arg(short = 'D', long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub order: Option<u64>,

    #[arg(short = 'F', long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub form: Option<String>,

    #[command(flatten)]
    pub flags: SystemFlags,

    /// Summation box `N1,..,Nn;H1,..,Hn`.
    #[arg(long = "box")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub box_spec: Option<String>,

    /// Number of evaluations, including the forced g = 0 start.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<u64>,

    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,

    /// Extra probes `g-text[@K1,..,Kn]`, repeatable; each lower-bounds the
    /// estimate.
    #[arg(long)]
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub probe: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct SampleTConfig {
    q: u64,
    order: u64,
    form: String,
    flags: SystemFlags,
    box_spec: String,
    #[serde(default = "default_samples")]
    samples: u64,
    seed: u64,
    #[serde(default)]
    probe: Vec<String>,
}

fn default_samples() -> u64 {
    1
}

pub fn run_sample_t(args: SampleTArgs, ctx: &Context) -> Result<u8> {
    let config: SampleTConfig = resolve_config(&args, ctx.file_config.as_ref(), "sample-t")?;
    let system = config.flags.resolve()?;
    let region = inputs::parse_box(&config.box_spec)?;
    let n = region.dimension();
    if system.dimension() != n {
        bail!("system dimension and box dimension differ");
    }
    let chi = DirichletCharacter::new(config.q, config.order)?;
    let form: IntPoly = parse_poly(&config.form, n)?;
    let budget = ctx.budget;
    emit_cached(ctx, "sample-t", &config, || {
        let mut rng = ChaCha12Rng::seed_from_u64(config.seed);
        // Forced first evaluation: g = 0 on the full box, a certified lower
        // bound for the supremum.
        let zero = RealPoly::zero(n);
        let mut best = mixed_sum(&form, &zero, &chi, &region, budget)?.abs();
        let mut best_at = "g=0 full box".to_string();

        for (i, text) in config.probe.iter().enumerate() {
            let (g, sub) = parse_probe(text, &region)?;
            let value = mixed_sum(&form, &g, &chi, &sub, budget)?.abs();
            if value > best {
                best = value;
                best_at = format!("probe {}", i + 1);
            }
        }

        let mut evaluated = 1u64;
        while evaluated < config.samples {
            // Fixed draw order: coefficient of the constant, coefficients
            // along the system's exponent order, then the sub-box sides.
            let mut g = RealPoly::zero(n);
            g.add_term(Monomial::constant(n), rng.gen::<f64>());
            for beta in system.exponents() {
                g.add_term(beta.clone(), rng.gen::<f64>());
            }
            let sides: Vec<u64> = region
                .sides
                .iter()
                .map(|&h| rng.gen_range(1..=h))
                .collect();
            let sub = BoxRegion::new(region.offset.clone(), sides)?;
            let value = mixed_sum(&form, &g, &chi, &sub, budget)?.abs();
            evaluated += 1;
            if value > best {
                best = value;
                best_at = format!("sample {evaluated}");
            }
        }

        match ctx.format {
            Format::Json => json_pretty(&serde_json::json!({
                "estimate": best,
                "kind": "lower bound from sampling; not a certified supremum",
                "samples": evaluated,
                "probes": config.probe.len(),
                "seed": config.seed,
                "best": best_at,
            })),
            Format::Csv => csv_table(
                &["estimate", "samples", "probes", "seed", "best"],
                &[vec![
                    format!("{best:.12e}"),
                    evaluated.to_string(),
                    config.probe.len().to_string(),
                    config.seed.to_string(),
                    best_at.clone(),
                ]],
            ),
            Format::Text => Ok(format!(
                "estimate >= {best:.9} ({} samples, {} probes, seed {}, best at {best_at})\n",
                evaluated,
                config.probe.len(),
                config.seed
            )),
        }
    })
}

fn parse_probe(text: &str, region: &BoxRegion) -> Result<(RealPoly, BoxRegion)> {
    let n = region.dimension();
    let (g_text, k_text) = match text.split_once('@') {
        None => (text, None),
        Some((g, k)) => (g, Some(k)),
    };
    let g: RealPoly = parse_poly(g_text.trim(), n)?;
    let sub = match k_text {
        None => region.clone(),
        Some(k) => {
            let sides = inputs::parse_u64_list(k)?;
            for (s, h) in sides.iter().zip(&region.sides) {
                if s > h {
                    bail!("probe box exceeds the outer box");
                }
            }
            BoxRegion::new(region.offset.clone(), sides)?
        }
    };
    Ok((g, sub))
}
