//! Reading and writing the files passed between subcommands.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use lyromel_core::embedding::{EmbeddingTable, Syllabifier, SyllablePair, TABLE_DIM};
use lyromel_core::gan::GanModel;
use lyromel_core::io::write_atomic;
use lyromel_core::melody::{
    compute_histograms, from_json_lines, split_indices, AlignedSequence, AttributeHistograms, DatasetSplit,
    SplitIndices,
};
use serde::Serialize;

pub const WORDS_FILE: &str = "words.emb";
pub const SYLLABLES_FILE: &str = "syllables.emb";
pub const DICTIONARY_FILE: &str = "dictionary.txt";
pub const MODEL_FILE: &str = "model.ckpt";
pub const SELECTION_FILE: &str = "selection.json";
pub const CONFIG_FILE: &str = "config.json";
pub const CHECKPOINT_DIR: &str = "checkpoints";

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text(path, &text)
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    write_atomic(path, text.as_bytes()).with_context(|| format!("writing {}", path.display()))
}

fn sidecar(dataset: &Path, suffix: &str) -> PathBuf {
    let mut name = dataset.as_os_str().to_owned();
    name.push(suffix);
    PathBuf::from(name)
}

pub fn histograms_path(dataset: &Path) -> PathBuf {
    sidecar(dataset, ".histograms.json")
}

pub fn split_path(dataset: &Path) -> PathBuf {
    sidecar(dataset, ".split.json")
}

pub fn read_dataset(path: &Path) -> Result<Vec<AlignedSequence>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading dataset {}", path.display()))?;
    let data = from_json_lines(&text).with_context(|| format!("parsing dataset {}", path.display()))?;
    if data.is_empty() {
        bail!("dataset {} holds no sequences", path.display());
    }
    Ok(data)
}

/// The split manifest written next to the dataset, or a fresh split from
/// `seed` when there is none.
pub fn read_split(dataset_path: &Path, data: &[AlignedSequence], seed: u64) -> Result<DatasetSplit> {
    let path = split_path(dataset_path);
    let indices: SplitIndices = if path.exists() {
        let text = fs::read_to_string(&path)?;
        serde_json::from_str(&text).with_context(|| format!("parsing split manifest {}", path.display()))?
    } else {
        eprintln!("note: no split manifest at {}, splitting with seed {seed}", path.display());
        split_indices(data.len(), seed)?
    };
    Ok(indices.apply(data)?)
}

pub fn read_histograms(dataset_path: &Path, data: &[AlignedSequence]) -> Result<AttributeHistograms> {
    let path = histograms_path(dataset_path);
    if path.exists() {
        let text = fs::read_to_string(&path)?;
        return serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()));
    }
    Ok(compute_histograms(data)?)
}

/// Word and syllable tables plus the syllable dictionary.
pub struct Embeddings {
    pub words: EmbeddingTable,
    pub syllables: EmbeddingTable,
    pub syllabifier: Syllabifier,
}

impl Embeddings {
    pub fn load(dir: &Path) -> Result<Self> {
        let table = |name: &str| -> Result<EmbeddingTable> {
            let path = dir.join(name);
            let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
            EmbeddingTable::from_text(&text, TABLE_DIM).with_context(|| format!("parsing {}", path.display()))
        };
        let dict = dir.join(DICTIONARY_FILE);
        let syllabifier = if dict.exists() {
            Syllabifier::from_text(&fs::read_to_string(&dict)?)
        } else {
            Syllabifier::new()
        };
        Ok(Self {
            words: table(WORDS_FILE)?,
            syllables: table(SYLLABLES_FILE)?,
            syllabifier,
        })
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        write_text(&dir.join(WORDS_FILE), &self.words.to_text())?;
        write_text(&dir.join(SYLLABLES_FILE), &self.syllables.to_text())?;
        write_text(&dir.join(DICTIONARY_FILE), &self.syllabifier.to_text())
    }
}

/// Syllabifier that knows every split seen in the dataset lyrics.
pub fn dataset_syllabifier(data: &[AlignedSequence]) -> Syllabifier {
    let mut s = Syllabifier::new();
    for seq in data {
        s.learn_from(&seq.syllables);
    }
    s
}

/// A trained model directory: selected weights and the embeddings it was
/// trained with.
pub struct ModelDir {
    pub model: GanModel,
    pub embeddings: Embeddings,
}

impl ModelDir {
    pub fn load(dir: &Path, checkpoint: Option<&Path>) -> Result<Self> {
        if !dir.is_dir() {
            bail!("model directory {} does not exist", dir.display());
        }
        let ckpt = checkpoint.map_or_else(|| dir.join(MODEL_FILE), Path::to_path_buf);
        if !ckpt.exists() {
            bail!("checkpoint {} not found; run `lyromel train` first", ckpt.display());
        }
        let model = GanModel::load(&ckpt).with_context(|| format!("loading checkpoint {}", ckpt.display()))?;
        Ok(Self {
            model,
            embeddings: Embeddings::load(dir)?,
        })
    }
}

/// Parses `lis-ten to the mu-sic` style input: words separated by spaces,
/// syllables by hyphens.
pub fn parse_syllable_text(text: &str) -> Result<Vec<SyllablePair>> {
    let mut out = Vec::new();
    for raw in text.split_whitespace() {
        let parts: Vec<String> = raw
            .split('-')
            .map(|s| s.to_lowercase())
            .filter(|s| !s.is_empty())
            .collect();
        if parts.is_empty() {
            continue;
        }
        let word = parts.concat();
        if word.chars().any(|c| !c.is_ascii_alphanumeric()) {
            bail!("syllable input {raw:?} must be ASCII letters and digits separated by '-'");
        }
        out.extend(parts.into_iter().map(|s| SyllablePair::new(word.clone(), s)));
    }
    Ok(out)
}
