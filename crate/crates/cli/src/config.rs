//! Single-document pipeline configuration.
//!
//! One JSON file carries every stage's parameters; unknown keys are
//! rejected. All randomness flows from the top-level `seed`: per-stage seeds
//! are derived as `splitmix64(seed ^ fnv1a(stage_tag))` at load time, so the
//! per-section seed fields never need to be set by hand.

use std::path::Path;

use serde::{Deserialize, Serialize};

use polyscat::data::{ChannelGroups, SynthConfig};
use polyscat::filterbank::FilterBankConfig;
use polyscat::model::{ModelConfig, TrainConfig};
use polyscat::{seed, Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Root seed; every stage derives its own stream from it.
    pub seed: u64,
    pub filterbank: FilterBankConfig,
    pub model: ModelConfig,
    pub train: TrainConfig,
    pub synth: SynthConfig,
    pub groups: ChannelGroups,
    /// Derive the arousal class weight from the training fold's label
    /// proportions instead of `train.class_weights`.
    pub auto_class_weight: bool,
    /// Per-path normalizer constants; empty means 1.0 everywhere.
    pub normalizer_mu: Vec<f64>,
    /// Median floor for the normalizer.
    pub normalizer_eps: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            seed: 0,
            filterbank: FilterBankConfig::default(),
            model: ModelConfig::default(),
            train: TrainConfig::default(),
            synth: SynthConfig::default(),
            groups: ChannelGroups::default(),
            auto_class_weight: true,
            normalizer_mu: Vec::new(),
            normalizer_eps: 1e-12,
        }
    }
}

impl PipelineConfig {
    /// Loads the config (or defaults when `path` is `None`) and applies the
    /// seed override plus the per-stage seed derivation.
    pub fn load(path: Option<&Path>, seed_override: Option<u64>) -> Result<Self> {
        let mut config: PipelineConfig = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| Error::Io {
                    path: p.to_path_buf(),
                    source: e,
                })?;
                serde_json::from_str(&text).map_err(|e| Error::Json {
                    path: p.to_path_buf(),
                    source: e,
                })?
            }
            None => PipelineConfig::default(),
        };
        if let Some(s) = seed_override {
            config.seed = s;
        }
        config.synth.seed = seed::derive(config.seed, "synth");
        config.model.seed = seed::derive(config.seed, "model-init");
        config.train.seed = seed::derive(config.seed, "train");
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        self.filterbank.validate()?;
        self.train.validate()?;
        self.synth.validate()?;
        if !(self.normalizer_eps > 0.0) {
            return Err(Error::Config("normalizer_eps must be positive".into()));
        }
        Ok(())
    }

    /// Seed for the dataset partition stage.
    pub fn partition_seed(&self) -> u64 {
        seed::derive(self.seed, "partition")
    }
}
