//! Config-driven experiment runs with reproducibility manifests.
//!
//! A run reads a [`RunConfig`], computes one experiment, writes its CSV and
//! JSON artifacts and finally `manifest.json`, which lists every artifact
//! with its SHA-256. Artifact bytes depend only on the config and seed.

mod config;
mod dispatch;
mod output;

use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

pub use config::{RunConfig, EXPERIMENTS};
pub use dispatch::compute;
pub use output::{read_csv_table, sha256_hex, write_results, Artifact, Cell, FileEntry};

use crate::Result;

pub const MANIFEST_NAME: &str = "manifest.json";

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub experiment: String,
    pub config_hash: String,
    pub seed: u64,
    pub tool_version: String,
    pub threads: usize,
    pub started_unix_ms: u128,
    pub finished_unix_ms: u128,
    pub runtime_ms: u128,
    pub files: Vec<FileEntry>,
    /// False when a numeric self-check inside the experiment failed.
    pub checks_passed: bool,
}

/// Results of an experiment before anything touches the disk.
pub struct Outcome {
    pub artifacts: Vec<Artifact>,
    pub checks_passed: bool,
}

pub fn tool_version() -> String {
    format!("stochres-core v{}", env!("CARGO_PKG_VERSION"))
}

fn unix_ms() -> u128 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_millis())
}

#[cfg(feature = "parallel")]
fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| crate::Error::ConfigValidation(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

#[cfg(not(feature = "parallel"))]
fn in_pool<T: Send>(_threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    Ok(f())
}

/// Runs the configured experiment and writes its artifacts and manifest to
/// `out_dir` (or the config's `out_dir`, or `out/<experiment>`).
pub fn run_experiment(config: &RunConfig, out_dir: Option<&Path>) -> Result<RunManifest> {
    config.validate()?;
    let dir: PathBuf = match (out_dir, &config.out_dir) {
        (Some(d), _) => d.to_path_buf(),
        (None, Some(d)) => d.clone(),
        (None, None) => PathBuf::from("out").join(&config.experiment),
    };
    let started_unix_ms = unix_ms();
    let clock = Instant::now();
    let threads = config.lanes();
    let outcome = in_pool(threads, || compute(config))??;
    let files = write_results(&outcome.artifacts, &dir)?;
    let manifest = RunManifest {
        experiment: config.experiment.clone(),
        config_hash: config.hash(),
        seed: config.seed,
        tool_version: tool_version(),
        threads,
        started_unix_ms,
        finished_unix_ms: unix_ms(),
        runtime_ms: clock.elapsed().as_millis(),
        files,
        checks_passed: outcome.checks_passed,
    };
    write_results(&[Artifact::json(MANIFEST_NAME, &manifest)?], &dir)?;
    if !outcome.checks_passed {
        log::warn!("{}: numeric self-checks failed; see {}", config.experiment, dir.display());
    }
    Ok(manifest)
}
