use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::loss::{loss_discriminator, loss_discriminator_grad, loss_generator, loss_generator_grad};
use super::{sample_noise, Discriminator, GanConfig, GanModel, Generator};
use crate::embedding::{embed, EmbeddingTable, LyricsEmbedding};
use crate::error::{invalid, shape, Result};
use crate::eval::{mmd2_unbiased, sequence_features};
use crate::melody::{AlignedSequence, AttributeScaling, NoteTriplet};
use crate::neural::{sgd_update, sum_ordered, ParamSet};
use crate::tuning::{tune, ScaleScoring};

/// A lyric sequence with its real melody.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingExample {
    pub embeds: Vec<LyricsEmbedding>,
    pub notes: Vec<NoteTriplet>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    /// One-based.
    pub epoch: usize,
    pub lr: f64,
    pub d_loss: f64,
    pub g_loss: f64,
    pub mmd2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionManifest {
    pub seed: u64,
    pub validate_tuned: bool,
    pub epochs: Vec<EpochRecord>,
    pub selected_epoch: usize,
    pub selected_mmd2: f64,
    pub selected_checkpoint: String,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    /// Parameters from the epoch with the lowest validation MMD².
    pub model: GanModel,
    pub manifest: SelectionManifest,
}

impl TrainingExample {
    /// Embeds the lyrics of an aligned sequence.
    pub fn from_sequence(seq: &AlignedSequence, words: &EmbeddingTable, syllables: &EmbeddingTable) -> Result<Self> {
        Ok(Self {
            embeds: seq
                .syllables
                .iter()
                .map(|p| embed(p, words, syllables))
                .collect::<Result<_>>()?,
            notes: seq.notes.clone(),
        })
    }
}

pub fn checkpoint_name(epoch: usize) -> String {
    format!("epoch_{epoch:04}.ckpt")
}

fn scaled(notes: &[NoteTriplet], scaling: &AttributeScaling) -> Vec<[f64; 3]> {
    notes.iter().map(|n| scaling.scale_note(n)).collect()
}

/// Gradient and value of the mean discriminator loss over one minibatch: `reals` against
/// the generator's output for `noise`.
pub fn discriminator_gradients(
    model: &GanModel,
    batch: &[&TrainingExample],
    noise: &[Vec<Vec<f64>>],
) -> Result<(Discriminator, f64)> {
    if batch.is_empty() || batch.len() != noise.len() {
        return Err(shape("discriminator step needs one noise sequence per example"));
    }
    let scaling = model.spec.scaling;
    let traced: Vec<_> = batch
        .par_iter()
        .zip(noise)
        .map(|(ex, z)| {
            let fake = model.generator.forward(z, &ex.embeds)?;
            let real = model.discriminator.forward_traced(&scaled(&ex.notes, &scaling), &ex.embeds)?;
            Ok((real, model.discriminator.forward_traced(&fake, &ex.embeds)?))
        })
        .collect::<Result<_>>()?;
    let real: Vec<f64> = traced.iter().map(|((s, _), _)| *s).collect();
    let fake: Vec<f64> = traced.iter().map(|(_, (s, _))| *s).collect();
    let loss = loss_discriminator(&real, &fake)?;
    let (d_real, d_fake) = loss_discriminator_grad(&real, &fake)?;
    let parts: Vec<Discriminator> = traced
        .par_iter()
        .enumerate()
        .map(|(i, ((_, tr), (_, tf)))| {
            let (mut g, _) = model.discriminator.backward(tr, d_real[i])?;
            let (gf, _) = model.discriminator.backward(tf, d_fake[i])?;
            g.add_assign(&gf)?;
            Ok(g)
        })
        .collect::<Result<_>>()?;
    Ok((sum_ordered(&model.discriminator, &parts)?, loss))
}

/// Gradient and value of the mean generator loss over one minibatch.
pub fn generator_gradients(
    model: &GanModel,
    batch: &[&TrainingExample],
    noise: &[Vec<Vec<f64>>],
) -> Result<(Generator, f64)> {
    if batch.is_empty() || batch.len() != noise.len() {
        return Err(shape("generator step needs one noise sequence per example"));
    }
    let traced: Vec<_> = batch
        .par_iter()
        .zip(noise)
        .map(|(ex, z)| {
            let (fake, gt) = model.generator.forward_traced(z, &ex.embeds)?;
            let (score, dt) = model.discriminator.forward_traced(&fake, &ex.embeds)?;
            Ok((score, gt, dt))
        })
        .collect::<Result<_>>()?;
    let scores: Vec<f64> = traced.iter().map(|(s, _, _)| *s).collect();
    let loss = loss_generator(&scores)?;
    let d_scores = loss_generator_grad(&scores)?;
    let parts: Vec<Generator> = traced
        .par_iter()
        .zip(&d_scores)
        .map(|((_, gt, dt), &ds)| {
            let (_, d_fake) = model.discriminator.backward(dt, ds)?;
            model.generator.backward(gt, &d_fake)
        })
        .collect::<Result<_>>()?;
    Ok((sum_ordered(&model.generator, &parts)?, loss))
}

/// MMD² between generator output for the validation lyrics and the real
/// validation melodies.
pub fn validation_mmd2(
    model: &GanModel,
    validation: &[TrainingExample],
    noise: &[Vec<Vec<f64>>],
    tuned: bool,
) -> Result<f64> {
    let generated: Vec<Vec<f64>> = validation
        .par_iter()
        .zip(noise)
        .map(|(ex, z)| {
            let raw = model.generate(z, &ex.embeds)?;
            if tuned {
                Ok(sequence_features(&tune(&raw, ScaleScoring::NoteCount)?.notes))
            } else {
                let s = AttributeScaling::default();
                Ok(raw.iter().flat_map(|&t| s.scale(t)).collect())
            }
        })
        .collect::<Result<_>>()?;
    let real: Vec<Vec<f64>> = validation.iter().map(|ex| sequence_features(&ex.notes)).collect();
    mmd2_unbiased(&generated, &real)
}

fn check_examples(examples: &[TrainingExample], seq_len: usize, what: &str) -> Result<()> {
    if examples.is_empty() {
        return Err(invalid(format!("{what} split is empty")));
    }
    for ex in examples {
        if ex.embeds.len() != seq_len || ex.notes.len() != seq_len {
            return Err(shape(format!(
                "{what} example has {} embeddings and {} notes, expected {seq_len}",
                ex.embeds.len(),
                ex.notes.len()
            )));
        }
    }
    Ok(())
}

/// Adversarial training with one discriminator and one generator SGD step per
/// minibatch. After every epoch the validation MMD² is recorded and
/// `on_epoch` receives the current parameters.
///
/// All randomness derives from `seed`: stream 0 drives shuffling and
/// training noise, stream 1 the initial weights, stream 2 the fixed
/// validation noise.
pub fn train<F>(
    train_set: &[TrainingExample],
    validation: &[TrainingExample],
    config: &GanConfig,
    seed: u64,
    mut on_epoch: F,
) -> Result<TrainOutcome>
where
    F: FnMut(&EpochRecord, &GanModel) -> Result<()>,
{
    config.validate()?;
    check_examples(train_set, config.seq_len, "training")?;
    check_examples(validation, config.seq_len, "validation")?;
    if validation.len() < 2 {
        return Err(invalid("validation MMD needs at least 2 validation sequences"));
    }
    let stream = |k: u64| {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        r.set_stream(k);
        r
    };
    let mut rng = stream(0);
    let mut model = GanModel::from_config(config, &mut stream(1));
    let mut val_rng = stream(2);
    let val_noise: Vec<_> = validation
        .iter()
        .map(|_| sample_noise(config.seq_len, &mut val_rng))
        .collect();

    let mut order: Vec<usize> = (0..train_set.len()).collect();
    let mut records = Vec::with_capacity(config.epochs);
    let mut best: Option<(usize, f64, GanModel)> = None;
    for epoch in 0..config.epochs {
        let lr = config.lr.rate(epoch);
        order.shuffle(&mut rng);
        let (mut d_sum, mut g_sum, mut batches) = (0.0, 0.0, 0usize);
        for chunk in order.chunks(config.batch) {
            let batch: Vec<&TrainingExample> = chunk.iter().map(|&i| &train_set[i]).collect();

            let noise: Vec<_> = batch.iter().map(|_| sample_noise(config.seq_len, &mut rng)).collect();
            let (gd, d_loss) = discriminator_gradients(&model, &batch, &noise)?;
            sgd_update(&mut model.discriminator, &gd, lr)?;

            let noise: Vec<_> = batch.iter().map(|_| sample_noise(config.seq_len, &mut rng)).collect();
            let (gg, g_loss) = generator_gradients(&model, &batch, &noise)?;
            sgd_update(&mut model.generator, &gg, lr)?;

            d_sum += d_loss;
            g_sum += g_loss;
            batches += 1;
        }
        if !model.all_finite() {
            return Err(invalid(format!("parameters diverged in epoch {}", epoch + 1)));
        }
        let mmd2 = validation_mmd2(&model, validation, &val_noise, config.validate_tuned)?;
        let record = EpochRecord {
            epoch: epoch + 1,
            lr,
            d_loss: d_sum / batches as f64,
            g_loss: g_sum / batches as f64,
            mmd2,
        };
        on_epoch(&record, &model)?;
        if best.as_ref().is_none_or(|(_, b, _)| mmd2 < *b) {
            best = Some((epoch + 1, mmd2, model.clone()));
        }
        records.push(record);
    }
    let (selected_epoch, selected_mmd2, best_model) = best.expect("at least one epoch");
    Ok(TrainOutcome {
        model: best_model,
        manifest: SelectionManifest {
            seed,
            validate_tuned: config.validate_tuned,
            epochs: records,
            selected_epoch,
            selected_mmd2,
            selected_checkpoint: checkpoint_name(selected_epoch),
        },
    })
}
