use std::path::Path;

use anyhow::Result;
use lyromel_core::eval::{music_metrics, sample_baseline, MetricsRow};
use lyromel_core::melody::SEQUENCE_LEN;
use lyromel_core::tuning::QuantizedSequence;
use serde::Serialize;

use crate::artifacts::{read_dataset, read_histograms, write_json};

#[derive(Serialize)]
struct BaselineDump {
    seed: u64,
    metrics: Option<MetricsRow>,
    sequences: Vec<QuantizedSequence>,
}

pub fn run(dataset: &Path, count: usize, seed: u64, out: &Path) -> Result<()> {
    let data = read_dataset(dataset)?;
    let hist = read_histograms(dataset, &data)?;
    let sequences = sample_baseline(&hist, count, SEQUENCE_LEN, seed)?;
    let notes: Vec<_> = sequences.iter().map(|s| s.notes.clone()).collect();
    let metrics = if notes.is_empty() { None } else { Some(music_metrics(&notes)?) };
    write_json(out, &BaselineDump { seed, metrics, sequences })?;
    eprintln!("{count} baseline melodies -> {}", out.display());
    Ok(())
}
