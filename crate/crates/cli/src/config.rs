//! Versioned JSON experiment configuration. Command-line flags take
//! precedence over file values, which take precedence over defaults.

use anyhow::Context;
use clap::Args;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::path::{Path, PathBuf};

use crate::UsageError;

pub const CONFIG_VERSION: u32 = 1;

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub version: u32,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub out: Option<PathBuf>,
    pub magic: Option<StateOpts>,
    pub entangle: Option<StateOpts>,
    pub discriminate: Option<DiscriminateOpts>,
    pub train: Option<TrainOpts>,
    pub sweep: Option<SweepOpts>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let config: Self =
            serde_json::from_str(&text).map_err(|e| UsageError(format!("invalid config {}: {e}", path.display())))?;
        if config.version != CONFIG_VERSION {
            return Err(UsageError(format!("config version {} is not supported (expected {CONFIG_VERSION})", config.version)).into());
        }
        Ok(config)
    }
}

/// Fills every unset field of `flags` from `file`.
pub fn overlay<T: Serialize + DeserializeOwned>(flags: T, file: Option<T>) -> anyhow::Result<T> {
    let Some(file) = file else { return Ok(flags) };
    let (Value::Object(mut base), Value::Object(top)) = (serde_json::to_value(file)?, serde_json::to_value(flags)?) else {
        unreachable!("option structs serialize to objects")
    };
    for (k, v) in top {
        if !v.is_null() {
            base.insert(k, v);
        }
    }
    Ok(serde_json::from_value(Value::Object(base))?)
}

/// State selection and estimation settings shared by `magic` and `entangle`.
#[derive(Args, Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateOpts {
    /// t, r, psi2, hoggar, psi4, zero, ghz, haar, clifford or magic-input.
    #[arg(long)]
    pub state: Option<String>,
    /// Qubit count for families that take one.
    #[arg(long)]
    pub qubits: Option<usize>,
    /// Circuit JSON file; overrides `--state`.
    #[arg(long)]
    pub circuit: Option<PathBuf>,
    /// Magic qubits for `magic-input`.
    #[arg(long)]
    pub n_magic: Option<usize>,
    /// Rotation angle in radians for `magic-input`.
    #[arg(long)]
    pub phi: Option<f64>,
    /// Layers of the Clifford circuits.
    #[arg(long)]
    pub depth: Option<usize>,
    /// Bell samples `N_Q`; 0 skips estimation.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Depolarizing probability per copy.
    #[arg(long)]
    pub noise: Option<f64>,
    #[arg(long)]
    pub trials_per_sample: Option<usize>,
    /// resample or disjoint.
    #[arg(long)]
    pub mode: Option<String>,
}

#[derive(Args, Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiscriminateOpts {
    #[arg(long)]
    pub qubits: Option<usize>,
    #[arg(long)]
    pub n_magic: Option<usize>,
    /// Comma-separated angles in radians.
    #[arg(long, value_delimiter = ',')]
    pub phi: Option<Vec<f64>>,
    /// Comma-separated sample counts `N_Q`.
    #[arg(long, value_delimiter = ',')]
    pub samples: Option<Vec<usize>>,
    #[arg(long)]
    pub reps: Option<usize>,
    #[arg(long)]
    pub depth: Option<usize>,
    #[arg(long)]
    pub trials_per_sample: Option<usize>,
    /// Run the threshold learner on noisy labelled data instead.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub learner: Option<bool>,
    /// Depolarizing probability for the learner data.
    #[arg(long)]
    pub noise: Option<f64>,
    #[arg(long)]
    pub per_class: Option<usize>,
    #[arg(long)]
    pub splits: Option<usize>,
}

#[derive(Args, Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainOpts {
    #[arg(long)]
    pub qubits: Option<usize>,
    #[arg(long)]
    pub depth: Option<usize>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    /// Bell samples per circuit evaluation; 0 uses exact gradients.
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub trials_per_sample: Option<usize>,
    #[arg(long)]
    pub noise: Option<f64>,
    #[arg(long)]
    pub init_amplitude: Option<f64>,
    /// Checkpoint JSON to resume from.
    #[arg(long)]
    pub resume: Option<PathBuf>,
}

#[derive(Args, Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepOpts {
    #[arg(long)]
    pub qubits: Option<usize>,
    #[arg(long)]
    pub n_magic: Option<usize>,
    #[arg(long)]
    pub phi: Option<f64>,
    #[arg(long)]
    pub depth: Option<usize>,
    /// Comma-separated depolarizing probabilities.
    #[arg(long, value_delimiter = ',')]
    pub noise: Option<Vec<f64>>,
    /// Comma-separated sample counts `N_Q`.
    #[arg(long, value_delimiter = ',')]
    pub samples: Option<Vec<usize>>,
    #[arg(long)]
    pub trials_per_sample: Option<usize>,
    #[arg(long)]
    pub reps: Option<usize>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file_values() {
        let flags = SweepOpts { qubits: Some(6), ..Default::default() };
        let file = SweepOpts { qubits: Some(9), reps: Some(3), ..Default::default() };
        let merged = overlay(flags, Some(file)).unwrap();
        assert_eq!((merged.qubits, merged.reps), (Some(6), Some(3)));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = r#"{"version": 1, "sweep": {"qubitz": 3}}"#;
        assert!(serde_json::from_str::<ExperimentConfig>(text).is_err());
    }
}
