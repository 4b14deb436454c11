use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use lyromel_core::embedding::SkipGramConfig;
use lyromel_core::gan::GanConfig;
use lyromel_core::melody::SEQUENCE_LEN;
use lyromel_core::tuning::ScaleScoring;
use serde::{Deserialize, Serialize};

/// Settings shared by all subcommands, read from a TOML file. Command-line
/// flags take precedence.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub seed: Option<u64>,
    pub paths: Paths,
    pub gan: GanConfig,
    pub embedding: SkipGramConfig,
    pub tuning: TuningConfig,
    pub evaluation: EvaluationConfig,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    pub dataset_dir: Option<PathBuf>,
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TuningConfig {
    pub scoring: ScaleScoring,
    pub emit_raw: bool,
    pub bpm: f64,
}

impl Default for TuningConfig {
    fn default() -> Self {
        Self {
            scoring: ScaleScoring::NoteCount,
            emit_raw: false,
            bpm: 120.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvaluationConfig {
    pub shuffles: usize,
    /// Fixed MMD kernel width instead of the mean-distance rule.
    pub sigma: Option<f64>,
}

impl Default for EvaluationConfig {
    fn default() -> Self {
        Self {
            shuffles: lyromel_core::eval::SHUFFLE_SAMPLES,
            sigma: None,
        }
    }
}

impl PipelineConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let config: Self = toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        config.gan.validate()?;
        if config.gan.seq_len != SEQUENCE_LEN {
            bail!("gan.seq_len must be {SEQUENCE_LEN} for dataset-driven commands");
        }
        Ok(config)
    }

    /// The `--seed` flag, falling back to the config file.
    pub fn seed(&self, flag: Option<u64>) -> Result<u64> {
        flag.or(self.seed)
            .context("a seed is required: pass --seed <n> or set `seed` in the config file")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn example_file_matches_defaults() {
        let c: PipelineConfig = toml::from_str(include_str!("../../../lyromel.example.toml")).unwrap();
        assert_eq!(c.seed, Some(1));
        let defaults = PipelineConfig {
            seed: Some(1),
            ..Default::default()
        };
        assert_eq!(c, defaults);
    }

    #[test]
    fn partial_file_keeps_defaults() {
        let c: PipelineConfig = toml::from_str("seed = 4\n[gan]\nhidden = 8\n[gan.lr]\ninitial = 0.05\ndecay = 0.99\n").unwrap();
        assert_eq!(c.seed, Some(4));
        assert_eq!(c.gan.hidden, 8);
        assert_eq!(c.gan.batch, 32);
        assert_eq!(c.gan.lr.initial, 0.05);
        assert_eq!(c.tuning.bpm, 120.0);
        assert_eq!(c.evaluation.shuffles, 10_000);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(toml::from_str::<PipelineConfig>("[gan]\nhiden = 8\n").is_err());
    }

    #[test]
    fn seed_flag_wins() {
        let c = PipelineConfig { seed: Some(1), ..Default::default() };
        assert_eq!(c.seed(Some(2)).unwrap(), 2);
        assert_eq!(c.seed(None).unwrap(), 1);
        assert!(PipelineConfig::default().seed(None).is_err());
    }
}
