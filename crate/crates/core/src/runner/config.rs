use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::capacity::Readout;
use crate::experiments::Averaging;
use crate::reservoir::{InputMeasure, ReservoirSpec};
use crate::{Error, Result};

pub const EXPERIMENTS: [&str; 8] = ["ipc", "scan-n", "switching", "tails", "power-basis", "learnability", "fat-shatter", "embed-check"];

/// One experiment run. Every parameter is optional and falls back to the
/// experiment's default; unknown keys are rejected.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub experiment: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
    /// Worker threads. Outputs do not depend on it.
    #[serde(default, skip_serializing)]
    pub threads: Option<usize>,

    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reservoir: Option<ReservoirSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measure: Option<InputMeasure>,
    /// Per-bit flip rate of the noisy register family.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_values: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub averaging: Option<Averaging>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub washout: Option<usize>,
    /// Sampled shots per step; exact distributions only when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shots: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub readout: Option<Readout>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_delay: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_degree: Option<usize>,

    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub peak_target: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail_region: Option<[f64; 2]>,

    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q_values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m0_grid: Option<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,

    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub thresholds: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub node_budget: Option<u64>,

    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub random_cases: Option<usize>,

    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank_tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub capacity_threshold: Option<f64>,
}

impl RunConfig {
    pub fn new(experiment: &str) -> Self {
        Self { experiment: experiment.into(), ..Default::default() }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::ConfigValidation(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if !EXPERIMENTS.contains(&self.experiment.as_str()) {
            return Err(Error::UnknownExperiment(self.experiment.clone()));
        }
        if let Some(m) = &self.measure {
            m.validate()?;
        }
        if self.threads == Some(0) {
            return Err(Error::ConfigValidation("threads must be at least 1".into()));
        }
        if let Some(l) = self.noise {
            if !(0.0..=0.5).contains(&l) {
                return Err(Error::ConfigValidation(format!("noise {l} outside [0, 0.5]")));
            }
        }
        for (name, v) in [("rank_tolerance", self.rank_tolerance), ("gamma", self.gamma), ("beta", self.beta)] {
            if let Some(v) = v {
                if !(v > 0.0) {
                    return Err(Error::ConfigValidation(format!("{name} must be positive, got {v}")));
                }
            }
        }
        Ok(())
    }

    /// Canonical JSON: sorted keys, defaults left out, thread count excluded.
    pub fn canonical_json(&self) -> String {
        serde_json::to_value(self).expect("config serializes").to_string()
    }

    /// SHA-256 of the canonical JSON, hex encoded.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.canonical_json().as_bytes()))
    }

    pub fn lanes(&self) -> usize {
        self.threads.unwrap_or(1)
    }
}
