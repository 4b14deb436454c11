//! Synthetic lyric MIDI corpora with known triplets, and a runner for the
//! binary.

#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use lyromel_core::embedding::SyllablePair;
use lyromel_core::melody::{lyric_event_texts, write_midi, NoteTriplet, DURATION_VALUES, REST_VALUES};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const WORDS: &[&[&str]] = &[
    &["lis", "ten"],
    &["to"],
    &["me"],
    &["beau", "ti", "ful"],
    &["la"],
    &["sing", "ing"],
    &["heart"],
    &["love"],
    &["for", "ev", "er"],
    &["night"],
    &["dan", "cing"],
    &["home"],
];

/// A song written to disk together with what it should read back as.
pub struct Song {
    pub pairs: Vec<SyllablePair>,
    pub notes: Vec<NoteTriplet>,
}

pub fn lyrics(n: usize, rng: &mut ChaCha8Rng) -> Vec<SyllablePair> {
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let word = WORDS[rng.gen_range(0..WORDS.len())];
        if out.len() + word.len() > n {
            out.push(SyllablePair::new("la", "la"));
            continue;
        }
        out.extend(word.iter().map(|s| SyllablePair::new(word.concat(), *s)));
    }
    out
}

pub fn random_notes(n: usize, rng: &mut ChaCha8Rng) -> Vec<NoteTriplet> {
    let mut notes: Vec<NoteTriplet> = (0..n)
        .map(|_| NoteTriplet {
            midi: rng.gen_range(55..=79),
            duration: DURATION_VALUES[rng.gen_range(0..8)],
            rest: if rng.gen_bool(0.6) { 0.0 } else { REST_VALUES[rng.gen_range(1..4)] },
        })
        .collect();
    notes[0].rest = 0.0;
    notes
}

pub fn song(n: usize, rng: &mut ChaCha8Rng) -> Song {
    Song {
        pairs: lyrics(n, rng),
        notes: random_notes(n, rng),
    }
}

pub fn write_song(path: &Path, song: &Song, bpm: f64) {
    let bytes = write_midi(&song.notes, &lyric_event_texts(&song.pairs), bpm).unwrap();
    std::fs::create_dir_all(path.parent().unwrap()).unwrap();
    std::fs::write(path, bytes).unwrap();
}

/// `songs` random songs of 20 to 59 notes under `dir`, at assorted tempos.
pub fn write_corpus(dir: &Path, songs: usize, seed: u64) -> Vec<Song> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..songs)
        .map(|i| {
            let s = song(rng.gen_range(20..60), &mut rng);
            let bpm = [90.0, 100.0, 120.0, 140.0][i % 4];
            write_song(&dir.join(format!("song_{i:03}.mid")), &s, bpm);
            s
        })
        .collect()
}

pub fn bin() -> PathBuf {
    PathBuf::from(env!("CARGO_BIN_EXE_lyromel"))
}

pub fn run(args: &[&str]) -> Output {
    Command::new(bin()).args(args).env("LYROMEL_THREADS", "1").output().unwrap()
}

/// Runs the binary and panics with its stderr on failure.
pub fn ok(args: &[&str]) -> Output {
    let out = run(args);
    assert!(
        out.status.success(),
        "lyromel {args:?} failed:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

pub fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// A config small enough to train in seconds.
pub fn write_tiny_config(path: &Path, epochs: usize) {
    let text = format!(
        "seed = 11\n\n[gan]\nhidden = 6\nbatch = 4\nepochs = {epochs}\n\n[embedding]\nepochs = 3\n\n[evaluation]\nshuffles = 50\n"
    );
    std::fs::write(path, text).unwrap();
}

/// build-dataset → train → generate → evaluate inside `root`.
pub fn pipeline(root: &Path, corpus: &Path, config: &Path) {
    let data = root.join("data/songs.jsonl");
    let model = root.join("model");
    ok(&["build-dataset", "--input", s(corpus), "--out", s(&data), "--seed", "3", "--config", s(config)]);
    ok(&["train", "--dataset", s(&data), "--out", s(&model), "--config", s(config)]);
    ok(&[
        "generate",
        "--model",
        s(&model),
        "--lyrics",
        "listen to me, beautiful night. singing forever, dancing home to my heart",
        "--count",
        "2",
        "--out",
        s(&root.join("gen")),
        "--emit-raw",
        "--config",
        s(config),
    ]);
    ok(&[
        "evaluate",
        "--model",
        s(&model),
        "--dataset",
        s(&data),
        "--out",
        s(&root.join("eval")),
        "--config",
        s(config),
    ]);
}

/// Every file under `root` as (relative path, bytes), sorted by path.
pub fn snapshot(root: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<(String, Vec<u8>)> = walkdir::WalkDir::new(root)
        .into_iter()
        .map(|e| e.unwrap())
        .filter(|e| e.file_type().is_file())
        .map(|e| {
            let rel = e.path().strip_prefix(root).unwrap().to_string_lossy().into_owned();
            (rel, std::fs::read(e.path()).unwrap())
        })
        .collect();
    out.sort();
    out
}
