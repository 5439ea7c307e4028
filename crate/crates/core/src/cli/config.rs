//! Experiment configuration: TOML files with JSON overrides.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::dynamics::SpinAxis;
use crate::error::{Error, Result};
use crate::parallel::Execution;
use crate::speed::DEFAULT_TAU;
use crate::swapnet::{NoiseModel, ProtocolConfig, SamplingMode, Shots};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub p_grid: Vec<f64>,
    pub axis: SpinAxis,
    pub tau: f64,
    pub shots: Shots,
    pub noise: NoiseModel,
    pub seed: u64,
    pub mc_samples: usize,
    pub sampling: SamplingMode,
    pub execution: Execution,
    pub output_dir: PathBuf,
    /// Directory of matrix-JSON fixtures; the embedded copies are used when unset.
    pub fixtures_dir: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            p_grid: default_p_grid(),
            axis: SpinAxis::X,
            tau: DEFAULT_TAU,
            shots: Shots::Finite(1_000_000),
            noise: NoiseModel::ideal(),
            seed: 0,
            mc_samples: 1000,
            sampling: SamplingMode::Poisson,
            execution: Execution::Parallel,
            output_dir: PathBuf::from("out"),
            fixtures_dir: None,
        }
    }
}

/// `0, 0.1, .., 1.0`.
pub fn default_p_grid() -> Vec<f64> {
    (0..=10).map(|k| k as f64 / 10.0).collect()
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: ExperimentConfig = toml::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        ExperimentConfig::from_toml_str(&text)
    }

    /// Deep-merges a JSON object into the configuration, e.g.
    /// `{"shots": "exact", "noise": {"visibility": 0.91}}`.
    pub fn apply_json_override(&self, json: &str) -> Result<Self> {
        let patch: Value = serde_json::from_str(json)?;
        if !patch.is_object() {
            return Err(Error::invalid(
                "configuration override must be a JSON object",
            ));
        }
        let mut base = serde_json::to_value(self)?;
        merge(&mut base, patch);
        let config: ExperimentConfig = serde_json::from_value(base)?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.p_grid.is_empty() {
            return Err(Error::invalid("p_grid must not be empty"));
        }
        if let Some(p) = self.p_grid.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::invalid(format!("p_grid value {p} outside [0, 1]")));
        }
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(Error::invalid(format!(
                "tau must be positive, got {}",
                self.tau
            )));
        }
        if self.mc_samples == 0 {
            return Err(Error::invalid("mc_samples must be at least 1"));
        }
        self.noise.validate()
    }

    pub fn protocol(&self) -> ProtocolConfig {
        ProtocolConfig {
            shots: self.shots,
            mc_samples: self.mc_samples,
            sampling: self.sampling,
            execution: self.execution,
        }
    }
}

fn merge(base: &mut Value, patch: Value) {
    match (base, patch) {
        (Value::Object(b), Value::Object(p)) => {
            for (k, v) in p {
                match b.get_mut(&k) {
                    Some(slot) if slot.is_object() && v.is_object() => merge(slot, v),
                    _ => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}
