use std::fs;
use std::path::Path;

use anyhow::{bail, Result};
use lyromel_core::melody::{
    align_song, compute_histograms, extract_sequences, parse_midi, split_indices, to_json_lines, MIN_SPLIT_SIZE,
};
use walkdir::WalkDir;

use crate::artifacts::{histograms_path, split_path, write_json, write_text};

fn is_midi(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| matches!(e.to_ascii_lowercase().as_str(), "mid" | "midi" | "kar"))
}

pub fn run(input: &Path, out: &Path, seed: u64) -> Result<()> {
    if !input.is_dir() {
        bail!("input directory {} does not exist", input.display());
    }
    let mut files = Vec::new();
    for entry in WalkDir::new(input).sort_by_file_name() {
        let entry = entry?;
        if entry.file_type().is_file() && is_midi(entry.path()) {
            files.push(entry.into_path());
        }
    }

    let mut failures = Vec::new();
    let mut parsed = 0usize;
    let mut sequences = Vec::new();
    for path in &files {
        let id = path
            .strip_prefix(input)
            .unwrap_or(path)
            .components()
            .map(|c| c.as_os_str().to_string_lossy())
            .collect::<Vec<_>>()
            .join("/");
        let song = fs::read(path).map_err(anyhow::Error::from).and_then(|b| Ok(parse_midi(&b)?));
        match song.and_then(|s| Ok(align_song(&s)?)) {
            Ok(notes) => {
                parsed += 1;
                sequences.extend(extract_sequences(&id, &notes));
            }
            Err(e) => failures.push(format!("{id}: {e:#}")),
        }
    }
    for f in &failures {
        eprintln!("skipped {f}");
    }
    if parsed == 0 {
        bail!(
            "no parseable MIDI files in {} ({} found, 0 parsed{})",
            input.display(),
            files.len(),
            if failures.is_empty() { String::new() } else { format!("; failures:\n  {}", failures.join("\n  ")) }
        );
    }
    if sequences.is_empty() {
        bail!("{parsed} files parsed but none has 20 or more syllable-aligned notes");
    }

    write_text(out, &to_json_lines(&sequences)?)?;
    write_json(&histograms_path(out), &compute_histograms(&sequences)?)?;
    if sequences.len() >= MIN_SPLIT_SIZE {
        write_json(&split_path(out), &split_indices(sequences.len(), seed)?)?;
    } else {
        eprintln!(
            "note: {} sequences is below {MIN_SPLIT_SIZE}; no split manifest written",
            sequences.len()
        );
    }
    eprintln!(
        "{} files, {parsed} parsed, {} failed, {} sequences -> {}",
        files.len(),
        failures.len(),
        sequences.len(),
        out.display()
    );
    Ok(())
}
