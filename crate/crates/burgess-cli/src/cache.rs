//! On-disk result cache keyed by a digest of (command, resolved config,
//! output format).
//!
//! A hit replays the stored stdout byte for byte, so re-runs of the same
//! configuration are identical even for outputs that embed wall-clock
//! timings. Thread count and cache location never enter the digest: they
//! change how a result is computed, not what it is.

use std::fs;
use std::path::PathBuf;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Serialize, Deserialize)]
struct Record {
    schema: u32,
    command: String,
    /// The exact digest preimage, kept for inspection.
    config: serde_json::Value,
    stdout: String,
    /// Wall time of the original computation, milliseconds.
    wall_ms: f64,
}

pub struct ResultCache {
    dir: Option<PathBuf>,
}

impl ResultCache {
    /// Resolve from `--cache-dir`, else `BURGESS_CACHE_DIR`, else disabled.
    pub fn resolve(flag: Option<PathBuf>, disabled: bool) -> ResultCache {
        if disabled {
            return ResultCache { dir: None };
        }
        let dir = flag.or_else(|| std::env::var_os("BURGESS_CACHE_DIR").map(PathBuf::from));
        ResultCache { dir }
    }

    pub fn enabled(&self) -> bool {
        self.dir.is_some()
    }

    pub fn digest(command: &str, config: &serde_json::Value, format: &str) -> String {
        let preimage = serde_json::json!({
            "command": command,
            "config": config,
            "format": format,
        });
        let mut hasher = Sha256::new();
        hasher.update(preimage.to_string().as_bytes());
        hex::encode(hasher.finalize())
    }

    pub fn lookup(&self, digest: &str) -> Option<String> {
        let dir = self.dir.as_ref()?;
        let path = dir.join(format!("{digest}.json"));
        let data = fs::read_to_string(path).ok()?;
        let record: Record = serde_json::from_str(&data).ok()?;
        Some(record.stdout)
    }

    pub fn store(
        &self,
        digest: &str,
        command: &str,
        config: &serde_json::Value,
        stdout: &str,
        wall_ms: f64,
    ) -> Result<()> {
        let Some(dir) = self.dir.as_ref() else {
            return Ok(());
        };
        fs::create_dir_all(dir).context("creating cache directory")?;
        let record = Record {
            schema: 1,
            command: command.to_string(),
            config: config.clone(),
            stdout: stdout.to_string(),
            wall_ms,
        };
        let path = dir.join(format!("{digest}.json"));
        fs::write(path, serde_json::to_string_pretty(&record)?).context("writing cache record")?;
        Ok(())
    }
}
