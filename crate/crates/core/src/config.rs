//! Whole-pipeline configuration, one JSON document keyed by stage.
//!
//! Every field defaults to the reference run's setting where one exists:
//! MinHash 256 permutations at threshold 0.95 with seed 42, a 32,000-token
//! vocabulary, 4096-token contexts, and a 1e-4 peak LR with 2000 warmup steps.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dedup::DedupConfig;
use crate::run_controller::ControllerConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TokenizerSection {
    pub vocab_size: usize,
}

impl Default for TokenizerSection {
    fn default() -> Self {
        Self { vocab_size: 32_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ShardSection {
    pub context_length: usize,
    pub splits: usize,
}

impl Default for ShardSection {
    fn default() -> Self {
        Self {
            context_length: 4096,
            splits: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScheduleSection {
    pub peak: f64,
    pub warmup_steps: u64,
    /// No default: the run length must be supplied.
    pub total_steps: Option<u64>,
}

impl Default for ScheduleSection {
    fn default() -> Self {
        Self {
            peak: 1e-4,
            warmup_steps: 2000,
            total_steps: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ControllerSection {
    #[serde(flatten)]
    pub detector: ControllerConfig,
    pub checkpoint_interval: u64,
}

impl Default for ControllerSection {
    fn default() -> Self {
        Self {
            detector: ControllerConfig::default(),
            checkpoint_interval: 500,
        }
    }
}

/// Optimizer settings of the reference run. Recorded for provenance only;
/// nothing in this crate reads them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainerSection {
    pub batch_size: usize,
    pub weight_decay: f64,
}

impl Default for TrainerSection {
    fn default() -> Self {
        Self {
            batch_size: 24,
            weight_decay: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub dedup: DedupConfig,
    pub tokenizer: TokenizerSection,
    pub shard: ShardSection,
    pub schedule: ScheduleSection,
    pub controller: ControllerSection,
    pub trainer: TrainerSection,
}

impl PipelineConfig {
    pub fn from_json(raw: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(raw)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, String> {
        let path = path.as_ref();
        let raw = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        Self::from_json(&raw).map_err(|e| format!("{}: {e}", path.display()))
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_reference_run() {
        let c = PipelineConfig::default();
        assert_eq!(c.dedup.num_perm, 256);
        assert_eq!(c.dedup.threshold, 0.95);
        assert_eq!(c.dedup.seed, 42);
        assert_eq!(c.dedup.hash_bits, 64);
        assert_eq!(c.tokenizer.vocab_size, 32_000);
        assert_eq!(c.shard.context_length, 4096);
        assert_eq!(c.schedule.peak, 1e-4);
        assert_eq!(c.schedule.warmup_steps, 2000);
        assert_eq!(c.controller.detector.window, 50);
        assert_eq!(c.controller.detector.k, 4.0);
        assert_eq!(c.controller.detector.stable_steps, 200);
    }

    #[test]
    fn partial_documents_fill_defaults() {
        let c = PipelineConfig::from_json(r#"{"dedup":{"seed":7},"shard":{"context_length":128}}"#).unwrap();
        assert_eq!(c.dedup.seed, 7);
        assert_eq!(c.dedup.num_perm, 256);
        assert_eq!(c.shard.context_length, 128);
        assert_eq!(c.tokenizer.vocab_size, 32_000);
    }

    #[test]
    fn round_trip_and_unknown_stage() {
        let c = PipelineConfig::default();
        assert_eq!(PipelineConfig::from_json(&c.to_json_pretty()).unwrap(), c);
        assert!(PipelineConfig::from_json(r#"{"dedupe":{}}"#).is_err());
    }
}
