use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::table::{EmbeddingTable, TABLE_DIM};
use crate::error::{invalid, Result};
use crate::neural::sigmoid;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SkipGramConfig {
    pub dim: usize,
    /// Number of adjacent tokens covered by a context window, centre
    /// included.
    pub window: usize,
    pub negatives: usize,
    pub neg_alpha: f64,
    pub lr0: f64,
    pub lr_min: f64,
    /// Per-epoch multiplicative decay of the learning rate.
    pub lr_decay: f64,
    /// Fixed number of epochs; by default training stops at the first epoch
    /// run at `lr_min`.
    pub epochs: Option<usize>,
}

impl Default for SkipGramConfig {
    fn default() -> Self {
        Self {
            dim: TABLE_DIM,
            window: 7,
            negatives: 5,
            neg_alpha: 0.75,
            lr0: 0.03,
            lr_min: 0.0007,
            lr_decay: 0.9,
            epochs: None,
        }
    }
}

impl SkipGramConfig {
    pub fn learning_rate(&self, epoch: usize) -> f64 {
        (self.lr0 * self.lr_decay.powi(epoch as i32)).max(self.lr_min)
    }

    pub fn epoch_count(&self) -> usize {
        if let Some(n) = self.epochs {
            return n;
        }
        let mut e = 0;
        while self.lr0 * self.lr_decay.powi(e as i32) > self.lr_min {
            e += 1;
        }
        e + 1
    }

    fn validate(&self) -> Result<()> {
        if self.dim == 0 || self.window < 2 || self.negatives == 0 {
            return Err(invalid("skip-gram needs dim > 0, window >= 2 and at least one negative"));
        }
        if !(self.lr0 > 0.0 && self.lr_min > 0.0 && self.lr_min <= self.lr0) {
            return Err(invalid("skip-gram learning rates must satisfy 0 < lr_min <= lr0"));
        }
        if !(self.lr_decay > 0.0 && self.lr_decay < 1.0) {
            return Err(invalid("skip-gram lr_decay must lie in (0, 1)"));
        }
        if !self.neg_alpha.is_finite() {
            return Err(invalid("neg_alpha must be finite"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SkipGramResult {
    pub table: EmbeddingTable,
    /// Mean negative-sampling loss per (centre, context) pair, per epoch.
    pub epoch_losses: Vec<f64>,
}

/// Unigram counts raised to `alpha`, normalised to sum to one.
pub fn noise_distribution(counts: &[u64], alpha: f64) -> Vec<f64> {
    let weights: Vec<f64> = counts.iter().map(|&c| (c as f64).powf(alpha)).collect();
    let total: f64 = weights.iter().sum();
    weights.into_iter().map(|w| w / total).collect()
}

struct NoiseSampler {
    cumulative: Vec<f64>,
}

impl NoiseSampler {
    fn new(probs: &[f64]) -> Self {
        let mut acc = 0.0;
        let cumulative = probs
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        Self { cumulative }
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> usize {
        let u: f64 = rng.gen::<f64>() * self.cumulative.last().copied().unwrap_or(1.0);
        self.cumulative
            .partition_point(|&c| c <= u)
            .min(self.cumulative.len() - 1)
    }
}

/// Trains skip-gram with negative sampling on `sentences`. Context windows
/// never cross sentence boundaries. The input vectors form the table.
pub fn train_skipgram(sentences: &[Vec<String>], config: &SkipGramConfig, seed: u64) -> Result<SkipGramResult> {
    config.validate()?;
    let mut counts: BTreeMap<&str, u64> = BTreeMap::new();
    for s in sentences {
        for t in s {
            *counts.entry(t.as_str()).or_default() += 1;
        }
    }
    if counts.len() < 2 {
        return Err(invalid(format!(
            "skip-gram needs at least 2 distinct tokens, got {}",
            counts.len()
        )));
    }
    let vocab: Vec<&str> = counts.keys().copied().collect();
    let index: BTreeMap<&str, usize> = vocab.iter().enumerate().map(|(i, t)| (*t, i)).collect();
    let freq: Vec<u64> = counts.values().copied().collect();
    let sampler = NoiseSampler::new(&noise_distribution(&freq, config.neg_alpha));
    let corpus: Vec<Vec<usize>> = sentences
        .iter()
        .map(|s| s.iter().map(|t| index[t.as_str()]).collect())
        .collect();

    let dim = config.dim;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let limit = 0.5 / dim as f64;
    let mut input: Vec<f64> = (0..vocab.len() * dim).map(|_| rng.gen_range(-limit..=limit)).collect();
    let mut output = vec![0.0; vocab.len() * dim];
    let radius = (config.window - 1) / 2;
    let mut grad = vec![0.0; dim];
    let mut epoch_losses = Vec::new();

    for epoch in 0..config.epoch_count() {
        let lr = config.learning_rate(epoch);
        let mut loss = 0.0;
        let mut pairs = 0usize;
        for sentence in &corpus {
            for (i, &centre) in sentence.iter().enumerate() {
                let lo = i.saturating_sub(radius);
                let hi = (i + radius + 1).min(sentence.len());
                for (j, &context) in sentence.iter().enumerate().take(hi).skip(lo) {
                    if j == i {
                        continue;
                    }
                    grad.iter_mut().for_each(|g| *g = 0.0);
                    let v = centre * dim..(centre + 1) * dim;
                    for k in 0..=config.negatives {
                        let (target, label) = if k == 0 {
                            (context, 1.0)
                        } else {
                            let t = sampler.sample(&mut rng);
                            if t == context {
                                continue;
                            }
                            (t, 0.0)
                        };
                        let u = target * dim..(target + 1) * dim;
                        let score: f64 = input[v.clone()].iter().zip(&output[u.clone()]).map(|(a, b)| a * b).sum();
                        let p = sigmoid(score);
                        loss -= if label == 1.0 { p.max(1e-12).ln() } else { (1.0 - p).max(1e-12).ln() };
                        let g = lr * (label - p);
                        for d in 0..dim {
                            grad[d] += g * output[u.start + d];
                            output[u.start + d] += g * input[v.start + d];
                        }
                    }
                    for d in 0..dim {
                        input[v.start + d] += grad[d];
                    }
                    pairs += 1;
                }
            }
        }
        epoch_losses.push(if pairs == 0 { 0.0 } else { loss / pairs as f64 });
    }

    let vectors = vocab
        .iter()
        .enumerate()
        .map(|(i, t)| ((*t).to_owned(), input[i * dim..(i + 1) * dim].to_vec()))
        .collect();
    Ok(SkipGramResult {
        table: EmbeddingTable::new(dim, vectors)?,
        epoch_losses,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cosine(a: &[f64], b: &[f64]) -> f64 {
        let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
        let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
        let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
        dot / (na * nb)
    }

    fn sentences(lines: &[&str]) -> Vec<Vec<String>> {
        lines
            .iter()
            .map(|l| l.split_whitespace().map(str::to_owned).collect())
            .collect()
    }

    fn pair_corpus() -> Vec<Vec<String>> {
        // "aa"/"bb" always appear together, as do "cc"/"dd"; the two groups never
        // share a sentence.
        let mut lines = Vec::new();
        for i in 0..200 {
            lines.push(if i % 2 == 0 { "aa bb aa bb" } else { "cc dd cc dd" });
        }
        sentences(&lines)
    }

    #[test]
    fn epoch_count_reaches_floor() {
        let c = SkipGramConfig::default();
        let n = c.epoch_count();
        assert_eq!(c.learning_rate(n - 1), c.lr_min);
        assert!(c.learning_rate(n - 2) > c.lr_min);
        assert_eq!(c.learning_rate(0), 0.03);
    }

    #[test]
    fn shape_covers_vocabulary() {
        let corpus = sentences(&["la di da", "da la", "x"]);
        let cfg = SkipGramConfig { epochs: Some(2), ..Default::default() };
        let r = train_skipgram(&corpus, &cfg, 1).unwrap();
        assert_eq!(r.table.len(), 4);
        assert!(r.table.iter().all(|(_, v)| v.len() == 10 && v.iter().all(|x| x.is_finite())));
    }

    #[test]
    fn tiny_vocabulary_is_rejected() {
        let cfg = SkipGramConfig::default();
        assert!(train_skipgram(&sentences(&["la la la"]), &cfg, 0).is_err());
        assert!(train_skipgram(&[], &cfg, 0).is_err());
    }

    #[test]
    fn co_occurring_tokens_are_closer() {
        let cfg = SkipGramConfig { epochs: Some(20), ..Default::default() };
        let t = train_skipgram(&pair_corpus(), &cfg, 7).unwrap().table;
        let together = cosine(t.get("aa").unwrap(), t.get("bb").unwrap());
        let apart = cosine(t.get("aa").unwrap(), t.get("cc").unwrap());
        assert!(together > apart, "{together} vs {apart}");
    }

    #[test]
    fn deterministic_for_seed() {
        let cfg = SkipGramConfig { epochs: Some(3), ..Default::default() };
        let a = train_skipgram(&pair_corpus(), &cfg, 3).unwrap();
        let b = train_skipgram(&pair_corpus(), &cfg, 3).unwrap();
        assert_eq!(a.table, b.table);
        assert_eq!(a.epoch_losses, b.epoch_losses);
        let c = train_skipgram(&pair_corpus(), &cfg, 4).unwrap();
        assert_ne!(a.table, c.table);
    }

    #[test]
    fn windowed_loss_is_non_increasing() {
        // Sentences drawn from a fixed bigram-ish process over 30 tokens.
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let corpus: Vec<Vec<String>> = (0..300)
            .map(|_| {
                let mut t = rng.gen_range(0..30usize);
                (0..8)
                    .map(|_| {
                        t = (t + rng.gen_range(1..4)) % 30;
                        format!("t{t}")
                    })
                    .collect()
            })
            .collect();
        let cfg = SkipGramConfig { epochs: Some(40), ..Default::default() };
        let losses = train_skipgram(&corpus, &cfg, 11).unwrap().epoch_losses;
        let windows: Vec<f64> = losses.chunks(10).map(|w| w.iter().sum::<f64>() / w.len() as f64).collect();
        for w in windows.windows(2) {
            assert!(w[1] <= w[0], "{windows:?}");
        }
    }

    #[test]
    fn noise_distribution_is_normalised_power() {
        let p = noise_distribution(&[1, 16, 81], 0.75);
        let total = 1.0 + 8.0 + 27.0;
        assert!((p[0] - 1.0 / total).abs() < 1e-15);
        assert!((p[1] - 8.0 / total).abs() < 1e-15);
        assert!((p[2] - 27.0 / total).abs() < 1e-15);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn windows_stop_at_sentence_boundaries() {
        // Within-sentence neighbours only: "aa" and "zz" never share a window.
        let corpus = sentences(&["aa bb", "zz yy"]);
        let cfg = SkipGramConfig { epochs: Some(1), ..Default::default() };
        let r = train_skipgram(&corpus, &cfg, 0).unwrap();
        assert_eq!(r.table.len(), 4);
        assert!(r.epoch_losses[0].is_finite());
    }
}
