use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use lyromel_core::gan::{checkpoint_name, train, GanConfig, TrainingExample};
use lyromel_core::melody::AlignedSequence;
use serde::Serialize;

use super::embeddings::train_tables;
use crate::artifacts::{
    read_dataset, read_split, write_json, Embeddings, CHECKPOINT_DIR, CONFIG_FILE, MODEL_FILE, SELECTION_FILE,
};
use crate::config::PipelineConfig;

pub struct TrainArgs {
    pub dataset: PathBuf,
    pub out: PathBuf,
    pub embeddings: Option<PathBuf>,
    pub seed: u64,
    /// Save every n-th epoch checkpoint; 0 keeps only the selected model.
    pub checkpoint_every: usize,
}

#[derive(Serialize)]
struct ResolvedConfig<'a> {
    seed: u64,
    dataset: String,
    train_sequences: usize,
    validation_sequences: usize,
    gan: &'a GanConfig,
    embedding: &'a lyromel_core::embedding::SkipGramConfig,
    embeddings_trained_here: bool,
}

fn examples(seqs: &[AlignedSequence], emb: &Embeddings) -> Result<Vec<TrainingExample>> {
    seqs.iter()
        .map(|s| Ok(TrainingExample::from_sequence(s, &emb.words, &emb.syllables)?))
        .collect()
}

pub fn run(args: &TrainArgs, config: &PipelineConfig) -> Result<()> {
    let data = read_dataset(&args.dataset)?;
    let split = read_split(&args.dataset, &data, args.seed)?;
    let emb = match &args.embeddings {
        Some(dir) => Embeddings::load(dir)?,
        None => train_tables(&data, &[], &config.embedding, args.seed)?,
    };
    emb.save(&args.out)?;

    let train_set = examples(&split.train, &emb)?;
    let validation = examples(&split.validation, &emb)?;
    let ckpt_dir = args.out.join(CHECKPOINT_DIR);
    let every = args.checkpoint_every;
    let outcome = train(&train_set, &validation, &config.gan, args.seed, |record, model| {
        eprintln!(
            "epoch {:>4}  lr {:.5}  L_D {:.5}  L_G {:.5}  MMD2 {:.6}",
            record.epoch, record.lr, record.d_loss, record.g_loss, record.mmd2
        );
        if every > 0 && record.epoch % every == 0 {
            model.save(&ckpt_dir.join(checkpoint_name(record.epoch)))?;
        }
        Ok(())
    })
    .context("training failed")?;

    outcome.model.save(&args.out.join(MODEL_FILE))?;
    write_json(&args.out.join(SELECTION_FILE), &outcome.manifest)?;
    write_json(
        &args.out.join(CONFIG_FILE),
        &ResolvedConfig {
            seed: args.seed,
            dataset: file_name(&args.dataset),
            train_sequences: train_set.len(),
            validation_sequences: validation.len(),
            gan: &config.gan,
            embedding: &config.embedding,
            embeddings_trained_here: args.embeddings.is_none(),
        },
    )?;
    eprintln!(
        "selected epoch {} (MMD2 {:.6}) -> {}",
        outcome.manifest.selected_epoch,
        outcome.manifest.selected_mmd2,
        args.out.join(MODEL_FILE).display()
    );
    Ok(())
}

fn file_name(p: &Path) -> String {
    p.file_name().map_or_else(String::new, |n| n.to_string_lossy().into_owned())
}
