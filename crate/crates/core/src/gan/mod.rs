//! Conditional LSTM generator and discriminator, their adversarial losses,
//! and the training loop with MMD-based model selection.

mod loss;
mod networks;
mod train;

use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use loss::{
    clamp_score, loss_discriminator, loss_discriminator_grad, loss_generator, loss_generator_grad, SCORE_EPS,
};
pub use networks::{Discriminator, DiscriminatorTrace, Generator, GeneratorTrace};
pub use train::{
    checkpoint_name, discriminator_gradients, generator_gradients, train, validation_mmd2, EpochRecord,
    SelectionManifest, TrainOutcome, TrainingExample,
};

use crate::embedding::{LyricsEmbedding, EMBEDDING_DIM};
use crate::error::{invalid, shape, Result};
use crate::melody::{AttributeScaling, SEQUENCE_LEN};
use crate::neural::{Checkpoint, LrSchedule, ParamSet, TensorRef, INIT_RANGE};

pub const NOISE_DIM: usize = 30;
pub const ATTRIBUTE_DIM: usize = 3;
pub const GENERATOR_INPUT: usize = NOISE_DIM + EMBEDDING_DIM + ATTRIBUTE_DIM;
pub const DISCRIMINATOR_INPUT: usize = ATTRIBUTE_DIM + EMBEDDING_DIM;

/// One noise vector per step, each component uniform in `[0, 1]`.
pub fn sample_noise<R: Rng + ?Sized>(steps: usize, rng: &mut R) -> Vec<Vec<f64>> {
    (0..steps)
        .map(|_| (0..NOISE_DIM).map(|_| rng.gen_range(0.0..=1.0)).collect())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GanConfig {
    pub hidden: usize,
    pub seq_len: usize,
    pub init_range: f64,
    /// Divide triplets by (127, 32, 32) before they enter either network.
    pub scale_attributes: bool,
    pub batch: usize,
    pub epochs: usize,
    pub lr: LrSchedule,
    /// Compute validation MMD² on tuned rather than raw generator output.
    pub validate_tuned: bool,
}

impl Default for GanConfig {
    fn default() -> Self {
        Self {
            hidden: 400,
            seq_len: SEQUENCE_LEN,
            init_range: INIT_RANGE,
            scale_attributes: true,
            batch: 32,
            epochs: 400,
            lr: LrSchedule::default(),
            validate_tuned: true,
        }
    }
}

impl GanConfig {
    pub fn scaling(&self) -> AttributeScaling {
        if self.scale_attributes {
            AttributeScaling::default()
        } else {
            AttributeScaling::identity()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.hidden == 0 || self.seq_len == 0 || self.batch == 0 || self.epochs == 0 {
            return Err(invalid("hidden size, sequence length, batch size and epochs must be positive"));
        }
        if !(self.init_range > 0.0 && self.init_range.is_finite()) {
            return Err(invalid("init_range must be positive"));
        }
        if !(self.lr.initial >= 0.0 && self.lr.decay > 0.0 && self.lr.initial.is_finite()) {
            return Err(invalid("learning-rate schedule must be non-negative with positive decay"));
        }
        Ok(())
    }
}

/// Shape information stored alongside the weights.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub hidden: usize,
    pub seq_len: usize,
    pub scaling: AttributeScaling,
}

/// Generator and discriminator pair plus the attribute scaling they were
/// trained with. Public methods take and return unscaled triplets.
#[derive(Debug, Clone, PartialEq)]
pub struct GanModel {
    pub spec: ModelSpec,
    pub generator: Generator,
    pub discriminator: Discriminator,
}

impl GanModel {
    pub fn zeros(spec: ModelSpec) -> Self {
        Self {
            spec,
            generator: Generator::zeros(spec.hidden),
            discriminator: Discriminator::zeros(spec.hidden),
        }
    }

    pub fn random<R: Rng + ?Sized>(spec: ModelSpec, limit: f64, rng: &mut R) -> Self {
        Self {
            spec,
            generator: Generator::random(spec.hidden, limit, rng),
            discriminator: Discriminator::random(spec.hidden, limit, rng),
        }
    }

    pub fn from_config<R: Rng + ?Sized>(config: &GanConfig, rng: &mut R) -> Self {
        let spec = ModelSpec {
            hidden: config.hidden,
            seq_len: config.seq_len,
            scaling: config.scaling(),
        };
        Self::random(spec, config.init_range, rng)
    }

    fn check_len(&self, n: usize) -> Result<()> {
        if n != self.spec.seq_len {
            return Err(shape(format!("model expects {} steps, got {n}", self.spec.seq_len)));
        }
        Ok(())
    }

    /// Continuous melody for the given lyrics, in attribute units.
    pub fn generate(&self, noise: &[Vec<f64>], embeds: &[LyricsEmbedding]) -> Result<Vec<[f64; 3]>> {
        self.check_len(embeds.len())?;
        let out = self.generator.forward(noise, embeds)?;
        Ok(out.into_iter().map(|t| self.spec.scaling.unscale(t)).collect())
    }

    /// Probability that `triplets` (attribute units) is a real melody for the
    /// lyrics.
    pub fn discriminate(&self, triplets: &[[f64; 3]], embeds: &[LyricsEmbedding]) -> Result<f64> {
        self.check_len(embeds.len())?;
        let scaled: Vec<[f64; 3]> = triplets.iter().map(|&t| self.spec.scaling.scale(t)).collect();
        self.discriminator.forward(&scaled, embeds)
    }

    pub fn to_checkpoint(&self) -> Result<Checkpoint> {
        Ok(Checkpoint::from_params(self, serde_json::to_string(&self.spec)?))
    }

    pub fn from_checkpoint(ckpt: &Checkpoint) -> Result<Self> {
        let spec: ModelSpec = serde_json::from_str(&ckpt.meta)?;
        let mut model = Self::zeros(spec);
        ckpt.restore_into(&mut model)?;
        Ok(model)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        self.to_checkpoint()?.save(path)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_checkpoint(&Checkpoint::load(path)?)
    }
}

impl ParamSet for GanModel {
    fn collect<'a>(&'a self, prefix: &str, out: &mut Vec<TensorRef<'a>>) {
        self.generator.collect(&format!("{prefix}generator."), out);
        self.discriminator.collect(&format!("{prefix}discriminator."), out);
    }

    fn collect_mut<'a>(&'a mut self, out: &mut Vec<&'a mut [f64]>) {
        self.generator.collect_mut(out);
        self.discriminator.collect_mut(out);
    }
}
