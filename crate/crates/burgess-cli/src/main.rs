//! `burgess` — batch runner for the character-sum laboratory.
//!
//! Subcommands wrap the library operations one to one; every run is
//! determined by its resolved configuration (flags over `--config` JSON,
//! over defaults) plus the code version. Sampling commands require an
//! explicit seed, and the generator is pinned: ChaCha12 (`rand_chacha`
//! 0.3) seeded through `seed_from_u64`.
//!
//! Exit codes: 0 success or affirmative decision, 1 negative decision,
//! 2 usage or input error, 3 indeterminate, 4 budget exceeded.

mod cache;
mod commands;
mod inputs;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::{Parser, Subcommand};

use burgess_core::charsum::DEFAULT_BUDGET;
use burgess_core::Error as CoreError;

use cache::ResultCache;
use output::Format;

#[derive(Parser)]
#[command(
    name = "burgess",
    version,
    about = "Exact experiments on multi-dimensional character sums",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Emit JSON instead of human-readable text.
    #[arg(long, global = true)]
    json: bool,

    /// Emit CSV instead of human-readable text.
    #[arg(long, global = true)]
    csv: bool,

    /// Worker threads for parallel enumerations (results do not depend on
    /// this).
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,

    /// Term budget for enumeration loops.
    #[arg(long, global = true)]
    budget: Option<u64>,

    /// Result cache directory (overrides BURGESS_CACHE_DIR).
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,

    /// Disable the result cache.
    #[arg(long, global = true)]
    no_cache: bool,

    /// JSON file with per-command parameters; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Describe a monomial system: exponent set, rank, weight, invariance.
    System(commands::SystemArgs),
    /// Decide admissibility of a form mod q (exit 0 yes, 1 no, 3 unknown).
    Admissible(commands::AdmissibleArgs),
    /// Count solutions of the moment system over boxes.
    Jr(commands::JrArgs),
    /// Evaluate a mixed box sum, or a complete sum for a collection.
    Charsum(commands::CharsumArgs),
    /// Tally complete-sum magnitudes against stratification thresholds.
    Stratify(commands::StratifyArgs),
    /// Check exact identities and inequalities on sampled or full ranges.
    #[command(subcommand)]
    Verify(VerifyCommand),
    /// Closed-form exponent calculus for given parameters.
    Exponents(commands::ExponentsArgs),
    /// Savings analysis at H = q^(beta_n + kappa).
    Delta(commands::DeltaArgs),
    /// Seeded lower-bound estimator for the supremum sum.
    SampleT(commands::SampleTArgs),
}

#[derive(Subcommand)]
enum VerifyCommand {
    /// The additive box-sum product identity.
    ProdLemma(commands::ProdLemmaArgs),
    /// The numeric B-function sum inequality.
    BSum(commands::BSumArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();

    rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads.max(1))
        .build_global()
        .ok();

    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}

fn exit_code_for(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<CoreError>() {
        Some(CoreError::BudgetExceeded { .. }) => 4,
        Some(CoreError::IdentityViolation { .. })
        | Some(CoreError::InequalityViolation { .. }) => 1,
        _ => 2,
    }
}

fn run(cli: Cli) -> Result<u8> {
    let format = match (cli.json, cli.csv) {
        (true, true) => bail!("--json and --csv are mutually exclusive"),
        (true, false) => Format::Json,
        (false, true) => Format::Csv,
        (false, false) => Format::Text,
    };
    let file_config: Option<serde_json::Value> = match &cli.config {
        None => None,
        Some(path) => {
            let data = std::fs::read_to_string(path)?;
            Some(serde_json::from_str(&data)?)
        }
    };
    let budget = cli.budget.unwrap_or(DEFAULT_BUDGET);
    let cache = ResultCache::resolve(cli.cache_dir.clone(), cli.no_cache);

    let ctx = commands::Context {
        format,
        budget,
        cache,
        file_config,
    };

    match cli.command {
        Command::System(args) => commands::run_system(args, &ctx),
        Command::Admissible(args) => commands::run_admissible(args, &ctx),
        Command::Jr(args) => commands::run_jr(args, &ctx),
        Command::Charsum(args) => commands::run_charsum(args, &ctx),
        Command::Stratify(args) => commands::run_stratify(args, &ctx),
        Command::Verify(VerifyCommand::ProdLemma(args)) => commands::run_prod_lemma(args, &ctx),
        Command::Verify(VerifyCommand::BSum(args)) => commands::run_b_sum(args, &ctx),
        Command::Exponents(args) => commands::run_exponents(args, &ctx),
        Command::Delta(args) => commands::run_delta(args, &ctx),
        Command::SampleT(args) => commands::run_sample_t(args, &ctx),
    }
}

/// Shared helper: overlay non-null CLI values on the config-file object and
/// deserialize the result.
pub(crate) fn resolve_config<A, R>(args: &A, file: Option<&serde_json::Value>, key: &str) -> Result<R>
where
    A: serde::Serialize,
    R: serde::de::DeserializeOwned,
{
    let cli_value = serde_json::to_value(args)?;
    let base = file
        .and_then(|v| v.get(key).cloned().or_else(|| Some(v.clone())))
        .unwrap_or(serde_json::Value::Object(Default::default()));
    let mut merged = match base {
        serde_json::Value::Object(map) => map,
        _ => bail!("config file must hold a JSON object"),
    };
    if let serde_json::Value::Object(cli_map) = cli_value {
        for (k, v) in cli_map {
            match v {
                serde_json::Value::Null => {}
                // A one-of flag group serializes as an object; when the
                // command line leaves it empty the file's choice stands,
                // otherwise the command line replaces it outright.
                serde_json::Value::Object(obj) if obj.is_empty() => {}
                other => {
                    merged.insert(k, other);
                }
            }
        }
    }
    serde_json::from_value(serde_json::Value::Object(merged))
        .map_err(|e| anyhow::anyhow!("incomplete configuration: {e}"))
}
