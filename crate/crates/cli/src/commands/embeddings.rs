use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use lyromel_core::embedding::{corpus_streams, tokenize, train_skipgram, SkipGramConfig, Syllabifier, TokenPair};
use lyromel_core::melody::AlignedSequence;

use crate::artifacts::{dataset_syllabifier, read_dataset, Embeddings};

/// Token pairs of the dataset lyrics, one sentence per sequence, followed by
/// any extra text files.
fn corpus(data: &[AlignedSequence], texts: &[PathBuf], syllabifier: &Syllabifier) -> Result<Vec<TokenPair>> {
    let mut pairs: Vec<TokenPair> = data
        .iter()
        .enumerate()
        .flat_map(|(i, s)| {
            s.syllables.iter().map(move |p| TokenPair {
                sentence: i,
                pair: p.clone(),
            })
        })
        .collect();
    let mut offset = data.len();
    for path in texts {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let extra = tokenize(&text, syllabifier);
        let sentences = extra.last().map_or(0, |t| t.sentence + 1);
        pairs.extend(extra.into_iter().map(|mut t| {
            t.sentence += offset;
            t
        }));
        offset += sentences;
    }
    Ok(pairs)
}

pub fn train_tables(
    data: &[AlignedSequence],
    texts: &[PathBuf],
    config: &SkipGramConfig,
    seed: u64,
) -> Result<Embeddings> {
    let syllabifier = dataset_syllabifier(data);
    let pairs = corpus(data, texts, &syllabifier)?;
    let (words, syllables) = corpus_streams(&pairs);
    let w = train_skipgram(&words, config, seed).context("training word embeddings")?;
    let s = train_skipgram(&syllables, config, seed.wrapping_add(1)).context("training syllable embeddings")?;
    eprintln!(
        "embeddings: {} words (final loss {:.4}), {} syllables (final loss {:.4})",
        w.table.len(),
        w.epoch_losses.last().copied().unwrap_or(f64::NAN),
        s.table.len(),
        s.epoch_losses.last().copied().unwrap_or(f64::NAN)
    );
    Ok(Embeddings {
        words: w.table,
        syllables: s.table,
        syllabifier,
    })
}

pub fn run(dataset: &Path, texts: &[PathBuf], out: &Path, config: &SkipGramConfig, seed: u64) -> Result<()> {
    let data = read_dataset(dataset)?;
    train_tables(&data, texts, config, seed)?.save(out)
}
