//! Run configuration: one JSON file, then command-line overrides.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use cutleak_core::cutkit::CorpusConfig;
use cutleak_core::router::TopologyKind;
use cutleak_core::transcript::{Mask, TimingModel};
use cutleak_eval::{Protocol, Task, HEADLINE_TASKS};
use cutleak_learners::{Hyperparams, ModelKind};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Slicing {
    /// All backends in one evaluation.
    Pooled,
    /// One evaluation per backend; W2 is skipped.
    PerBackend,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub sizes: Vec<usize>,
    pub reps: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            sizes: vec![360, 720, 1080, 1800, 2520, 3600],
            reps: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub master_seed: u64,
    pub corpus: CorpusConfig,
    pub backends: Vec<TopologyKind>,
    pub timing: TimingModel,
    /// Model for the headline, ablation, matched and sweep analyses.
    pub model: ModelKind,
    /// Models compared on the full feature set.
    pub comparison_models: Vec<ModelKind>,
    pub tasks: Vec<Task>,
    pub masks: Vec<Mask>,
    pub protocols: Vec<Protocol>,
    pub test_fraction: f64,
    pub bootstrap: usize,
    pub caliper: f64,
    pub hyperparams: Hyperparams,
    pub slicing: Slicing,
    pub sweep: SweepConfig,
    /// Not part of the config hash.
    pub output_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            master_seed: 1,
            corpus: CorpusConfig::default(),
            backends: TopologyKind::ALL.to_vec(),
            timing: TimingModel::default(),
            model: ModelKind::RandomForest,
            comparison_models: ModelKind::ALL.to_vec(),
            tasks: HEADLINE_TASKS.to_vec(),
            masks: Mask::ALL.to_vec(),
            protocols: vec![Protocol::InstanceDisjoint, Protocol::SizeHoldout],
            test_fraction: 0.25,
            bootstrap: 1000,
            caliper: 0.20,
            hyperparams: Hyperparams::default(),
            slicing: Slicing::Pooled,
            sweep: SweepConfig::default(),
            output_dir: PathBuf::from("out"),
        }
    }
}

fn unique<T: Ord + Copy>(v: &[T]) -> bool {
    v.iter().copied().collect::<BTreeSet<_>>().len() == v.len()
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| {
            if e.is_data() {
                // well-formed JSON with an unknown or mistyped field
                CliError::config("config", e.to_string())
            } else {
                CliError::Parse {
                    source_name: path.display().to_string(),
                    line: e.line(),
                    msg: e.to_string(),
                }
            }
        })
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.corpus.validate().map_err(|e| CliError::config("corpus", e.to_string()))?;
        if self.backends.is_empty() || !unique(&self.backends) {
            return Err(CliError::config("backends", "must be a non-empty list without repeats"));
        }
        if self.tasks.is_empty() || !unique(&self.tasks) {
            return Err(CliError::config("tasks", "must be a non-empty list without repeats"));
        }
        if self.masks.is_empty() || !unique(&self.masks) {
            return Err(CliError::config("masks", "must be a non-empty list without repeats"));
        }
        if self.protocols.is_empty() || !unique(&self.protocols) {
            return Err(CliError::config("protocols", "must be a non-empty list without repeats"));
        }
        if self.comparison_models.is_empty() || !unique(&self.comparison_models) {
            return Err(CliError::config("comparison_models", "must be a non-empty list without repeats"));
        }
        if self.tasks.contains(&Task::A2) {
            return Err(CliError::config("tasks", "A2 is evaluated per family and cannot be listed"));
        }
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return Err(CliError::config("test_fraction", format!("{} is outside (0, 1)", self.test_fraction)));
        }
        if self.bootstrap == 0 {
            return Err(CliError::config("bootstrap", "must be at least 1"));
        }
        if !(self.caliper > 0.0) {
            return Err(CliError::config("caliper", "must be positive"));
        }
        let hp = &self.hyperparams;
        if hp.n_trees == 0 || hp.rounds == 0 || hp.max_bins < 2 || !(hp.learning_rate > 0.0) {
            return Err(CliError::config(
                "hyperparams",
                "n_trees and rounds must be positive, max_bins >= 2, learning_rate > 0",
            ));
        }
        if self.sweep.reps == 0 || self.sweep.sizes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(CliError::config("sweep", "reps must be positive and sizes strictly ascending"));
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form, output directory excluded.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.output_dir = PathBuf::new();
        let json = serde_json::to_string(&c).expect("config serialises");
        hex::encode(Sha256::digest(json.as_bytes()))
    }

    /// First line of every emitted file.
    pub fn header(&self) -> String {
        format!("# cutleak config_hash={} master_seed={}", self.hash(), self.master_seed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        RunConfig::default().validate().unwrap();
    }

    #[test]
    fn hash_ignores_output_dir() {
        let a = RunConfig::default();
        let b = RunConfig {
            output_dir: "elsewhere".into(),
            ..RunConfig::default()
        };
        assert_eq!(a.hash(), b.hash());
        let c = RunConfig {
            master_seed: 2,
            ..RunConfig::default()
        };
        assert_ne!(a.hash(), c.hash());
    }

    #[test]
    fn bad_fields_are_named() {
        let c = RunConfig {
            test_fraction: 1.5,
            ..RunConfig::default()
        };
        assert!(matches!(c.validate(), Err(CliError::Config { field, .. }) if field == "test_fraction"));
        let c = RunConfig {
            backends: vec![],
            ..RunConfig::default()
        };
        assert!(matches!(c.validate(), Err(CliError::Config { field, .. }) if field == "backends"));
    }

    #[test]
    fn partial_json_fills_defaults() {
        let c: RunConfig = serde_json::from_str(r#"{"master_seed": 9, "corpus": {"instances_per_family": 3}}"#).unwrap();
        assert_eq!(c.master_seed, 9);
        assert_eq!(c.corpus.instances_per_family, 3);
        assert_eq!(c.corpus.fragments_per_job, 6);
        assert_eq!(c.bootstrap, 1000);
    }
}
