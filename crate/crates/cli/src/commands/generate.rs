use std::fmt::Write as _;
use std::path::PathBuf;

use anyhow::{bail, Result};
use lyromel_core::embedding::{embed, tokenize, LyricsEmbedding, SyllablePair};
use lyromel_core::gan::{sample_noise, GanModel};
use lyromel_core::melody::{lyric_event_texts, write_midi, NoteTriplet};
use lyromel_core::tuning::{quantize_sequence, tune, Scale, ScaleScoring};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::artifacts::{parse_syllable_text, write_json, write_text, Embeddings, ModelDir};
use crate::config::PipelineConfig;

pub enum LyricsInput {
    Text(String),
    Syllables(String),
}

pub struct GenerateArgs {
    pub model_dir: PathBuf,
    pub checkpoint: Option<PathBuf>,
    pub lyrics: LyricsInput,
    pub count: usize,
    pub seed: u64,
    pub out: PathBuf,
    pub emit_raw: bool,
}

/// One generated melody in every representation.
#[derive(Debug, Clone, Serialize)]
pub struct Melody {
    pub raw: Vec<[f64; 3]>,
    /// Nearest legal values, before the scale step.
    pub quantized: Vec<NoteTriplet>,
    pub tuned: Vec<NoteTriplet>,
    pub scale: Scale,
}

/// Generator output for one lyric sequence, tuned. The first note never has
/// a rest, matching how melodies are read from MIDI.
pub fn melody_for(model: &GanModel, embeds: &[LyricsEmbedding], noise: &[Vec<f64>], scoring: ScaleScoring) -> Result<Melody> {
    let raw = model.generate(noise, embeds)?;
    let mut quantized = quantize_sequence(&raw)?;
    let mut tuned = tune(&raw, scoring)?;
    for seq in [&mut quantized, &mut tuned.notes] {
        if let Some(first) = seq.first_mut() {
            first.rest = 0.0;
        }
    }
    Ok(Melody {
        raw,
        quantized,
        tuned: tuned.notes,
        scale: tuned.scale,
    })
}

#[derive(Serialize)]
struct MelodyDump<'a> {
    index: usize,
    seed: u64,
    bpm: f64,
    syllables: &'a [SyllablePair],
    input_syllables: usize,
    padded: bool,
    truncated: bool,
    #[serde(flatten)]
    melody: &'a Melody,
}

/// Repeats the final syllable or cuts the tail so exactly `len` remain.
pub fn fit_length(mut pairs: Vec<SyllablePair>, len: usize) -> Result<(Vec<SyllablePair>, bool, bool)> {
    let Some(last) = pairs.last().cloned() else {
        bail!("lyrics contain no syllables");
    };
    let (padded, truncated) = (pairs.len() < len, pairs.len() > len);
    pairs.resize(len, last);
    Ok((pairs, padded, truncated))
}

pub fn embed_all(pairs: &[SyllablePair], emb: &Embeddings) -> Result<Vec<LyricsEmbedding>> {
    pairs
        .iter()
        .map(|p| Ok(embed(p, &emb.words, &emb.syllables)?))
        .collect()
}

pub fn run(args: &GenerateArgs, config: &PipelineConfig) -> Result<()> {
    let dir = ModelDir::load(&args.model_dir, args.checkpoint.as_deref())?;
    let pairs = match &args.lyrics {
        LyricsInput::Text(t) => tokenize(t, &dir.embeddings.syllabifier)
            .into_iter()
            .map(|t| t.pair)
            .collect(),
        LyricsInput::Syllables(s) => parse_syllable_text(s)?,
    };
    let input_syllables = pairs.len();
    let seq_len = dir.model.spec.seq_len;
    let (pairs, padded, truncated) = fit_length(pairs, seq_len)?;
    if padded {
        eprintln!("warning: {input_syllables} syllables padded to {seq_len} by repeating the last one");
    }
    if truncated {
        eprintln!("warning: {input_syllables} syllables truncated to {seq_len}");
    }
    let embeds = embed_all(&pairs, &dir.embeddings)?;
    let texts = lyric_event_texts(&pairs);
    let bpm = config.tuning.bpm;
    let emit_raw = args.emit_raw || config.tuning.emit_raw;
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    for index in 0..args.count {
        let noise = sample_noise(seq_len, &mut rng);
        let melody = melody_for(&dir.model, &embeds, &noise, config.tuning.scoring)?;
        let stem = format!("melody_{index:03}");
        std::fs::create_dir_all(&args.out)?;
        lyromel_core::io::write_atomic(&args.out.join(format!("{stem}.mid")), &write_midi(&melody.tuned, &texts, bpm)?)?;
        write_json(
            &args.out.join(format!("{stem}.json")),
            &MelodyDump {
                index,
                seed: args.seed,
                bpm,
                syllables: &pairs,
                input_syllables,
                padded,
                truncated,
                melody: &melody,
            },
        )?;
        if emit_raw {
            let mut csv = String::from("syllable,midi,duration,rest\n");
            for (p, t) in pairs.iter().zip(&melody.raw) {
                writeln!(csv, "{},{},{},{}", p.syllable, t[0], t[1], t[2])?;
            }
            write_text(&args.out.join(format!("{stem}.raw.csv")), &csv)?;
        }
    }
    eprintln!("{} melodies -> {}", args.count, args.out.display());
    Ok(())
}
