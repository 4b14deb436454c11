use std::collections::BTreeMap;
use std::path::PathBuf;

use anyhow::{bail, Result};
use lyromel_core::eval::{
    conditioning_distance, mmd2_unbiased, mmd2_unbiased_with_sigma, music_metrics, sample_baseline,
    sequence_features, transition_distribution, EvalReport, MetricsTable,
};
use lyromel_core::gan::sample_noise;
use lyromel_core::melody::NoteTriplet;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::generate::{embed_all, melody_for, Melody};
use crate::artifacts::{read_dataset, read_histograms, read_split, write_json, write_text, ModelDir};
use crate::config::PipelineConfig;

pub struct EvaluateArgs {
    pub model_dir: PathBuf,
    pub checkpoint: Option<PathBuf>,
    pub dataset: PathBuf,
    pub seed: u64,
    pub out: PathBuf,
}

fn mmd(a: &[Vec<NoteTriplet>], b: &[Vec<NoteTriplet>], sigma: Option<f64>) -> Result<f64> {
    let fa: Vec<Vec<f64>> = a.iter().map(|s| sequence_features(s)).collect();
    let fb: Vec<Vec<f64>> = b.iter().map(|s| sequence_features(s)).collect();
    Ok(match sigma {
        Some(s) => mmd2_unbiased_with_sigma(&fa, &fb, s)?,
        None => mmd2_unbiased(&fa, &fb)?,
    })
}

fn column(seqs: &[Vec<NoteTriplet>], f: fn(&NoteTriplet) -> f64) -> Vec<Vec<f64>> {
    seqs.iter().map(|s| s.iter().map(f).collect()).collect()
}

pub fn run(args: &EvaluateArgs, config: &PipelineConfig) -> Result<()> {
    let dir = ModelDir::load(&args.model_dir, args.checkpoint.as_deref())?;
    let data = read_dataset(&args.dataset)?;
    let split = read_split(&args.dataset, &data, args.seed)?;
    if split.test.len() < 2 {
        bail!("evaluation needs at least 2 test sequences, found {}", split.test.len());
    }

    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let mut melodies: Vec<Melody> = Vec::with_capacity(split.test.len());
    for seq in &split.test {
        let embeds = embed_all(&seq.syllables, &dir.embeddings)?;
        let noise = sample_noise(dir.model.spec.seq_len, &mut rng);
        melodies.push(melody_for(&dir.model, &embeds, &noise, config.tuning.scoring)?);
    }
    let truth: Vec<Vec<NoteTriplet>> = split.test.iter().map(|s| s.notes.clone()).collect();
    let raw: Vec<Vec<NoteTriplet>> = melodies.iter().map(|m| m.quantized.clone()).collect();
    let tuned: Vec<Vec<NoteTriplet>> = melodies.iter().map(|m| m.tuned.clone()).collect();

    let baseline_seed = args.seed.wrapping_add(1);
    let hist = read_histograms(&args.dataset, &data)?;
    let baseline: Vec<Vec<NoteTriplet>> = sample_baseline(&hist, truth.len(), dir.model.spec.seq_len, baseline_seed)?
        .into_iter()
        .map(|q| q.notes)
        .collect();

    let shuffles = config.evaluation.shuffles;
    let shuffle_seed = args.seed.wrapping_add(2);
    let report = EvalReport {
        sequences: truth.len(),
        metrics: MetricsTable {
            ground_truth: music_metrics(&truth)?,
            model_raw: music_metrics(&raw)?,
            model_tuned: music_metrics(&tuned)?,
            baseline: music_metrics(&baseline)?,
        },
        mmd2_model: mmd(&tuned, &truth, config.evaluation.sigma)?,
        mmd2_baseline: mmd(&baseline, &truth, config.evaluation.sigma)?,
        transitions: BTreeMap::from([
            ("ground_truth".to_owned(), transition_distribution(&truth)),
            ("model_raw".to_owned(), transition_distribution(&raw)),
            ("model_tuned".to_owned(), transition_distribution(&tuned)),
            ("baseline".to_owned(), transition_distribution(&baseline)),
        ]),
        conditioning: BTreeMap::from([
            (
                "duration".to_owned(),
                conditioning_distance(&column(&truth, |n| n.duration), &column(&tuned, |n| n.duration), shuffles, shuffle_seed)?,
            ),
            (
                "rest".to_owned(),
                conditioning_distance(&column(&truth, |n| n.rest), &column(&tuned, |n| n.rest), shuffles, shuffle_seed)?,
            ),
        ]),
        baseline_seed,
    };

    write_json(&args.out.join("report.json"), &report)?;
    write_text(&args.out.join("metrics.csv"), &report.table_csv())?;
    write_text(&args.out.join("transitions.csv"), &report.transitions_csv())?;
    write_text(&args.out.join("conditioning.csv"), &report.conditioning_csv())?;
    write_json(&args.out.join("generated.json"), &melodies)?;
    print!("{}", report.table_csv());
    Ok(())
}
