use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::attributes::{
    beats_from_seconds, AttributeKind, NoteTriplet, DURATION_VALUES, MIDI_MAX, MIDI_MIN, REST_VALUES,
};
use super::lyrics::align_syllables;
use super::midi::ParsedSong;
use crate::embedding::SyllablePair;
use crate::error::{invalid, Result};

/// Notes per training sequence.
pub const SEQUENCE_LEN: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct AlignedNote {
    pub pair: SyllablePair,
    pub note: NoteTriplet,
}

/// Twenty syllables aligned one-to-one with twenty notes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSequence")]
pub struct AlignedSequence {
    pub source_id: String,
    pub syllables: Vec<SyllablePair>,
    pub notes: Vec<NoteTriplet>,
}

#[derive(Deserialize)]
struct RawSequence {
    source_id: String,
    syllables: Vec<SyllablePair>,
    notes: Vec<NoteTriplet>,
}

impl TryFrom<RawSequence> for AlignedSequence {
    type Error = crate::Error;

    fn try_from(raw: RawSequence) -> Result<Self> {
        AlignedSequence::new(raw.source_id, raw.syllables, raw.notes)
    }
}

impl AlignedSequence {
    pub fn new(source_id: impl Into<String>, syllables: Vec<SyllablePair>, notes: Vec<NoteTriplet>) -> Result<Self> {
        if syllables.len() != SEQUENCE_LEN || notes.len() != SEQUENCE_LEN {
            return Err(invalid(format!(
                "aligned sequences hold exactly {SEQUENCE_LEN} syllables and notes, got {} and {}",
                syllables.len(),
                notes.len()
            )));
        }
        Ok(Self {
            source_id: source_id.into(),
            syllables,
            notes,
        })
    }
}

/// Quantised, syllable-aligned notes of a parsed song.
///
/// Durations are `note_off − note_on`; the rest of a note is the silence since
/// the previous syllable note ended (0 for the first note, and 0 when notes
/// overlap). MIDI numbers outside the piano range are clamped into it.
pub fn align_song(song: &ParsedSong) -> Result<Vec<AlignedNote>> {
    let texts: Vec<&str> = song.notes.iter().map(|n| n.text.as_str()).collect();
    let pairs = align_syllables(&texts);
    let mut out = Vec::new();
    let mut prev_off: Option<f64> = None;
    for (note, pair) in song.notes.iter().zip(pairs) {
        let Some(pair) = pair else { continue };
        let duration = beats_from_seconds((note.note_off - note.note_on).max(0.0), song.bpm, AttributeKind::Duration)?;
        let rest = match prev_off {
            None => 0.0,
            Some(off) => beats_from_seconds((note.note_on - off).max(0.0), song.bpm, AttributeKind::Rest)?,
        };
        prev_off = Some(note.note_off);
        out.push(AlignedNote {
            pair,
            note: NoteTriplet {
                midi: note.midi.clamp(MIDI_MIN, MIDI_MAX),
                duration,
                rest,
            },
        });
    }
    Ok(out)
}

/// Cuts a song into 20-note sequences: none below 20 notes, one (notes 1–20)
/// below 40, two (notes 1–20 and 21–40) from 40 on.
pub fn extract_sequences(source_id: &str, notes: &[AlignedNote]) -> Vec<AlignedSequence> {
    let count = match notes.len() {
        n if n < SEQUENCE_LEN => 0,
        n if n < 2 * SEQUENCE_LEN => 1,
        _ => 2,
    };
    (0..count)
        .map(|k| {
            let chunk = &notes[k * SEQUENCE_LEN..(k + 1) * SEQUENCE_LEN];
            AlignedSequence {
                source_id: format!("{source_id}#{k}"),
                syllables: chunk.iter().map(|n| n.pair.clone()).collect(),
                notes: chunk.iter().map(|n| n.note).collect(),
            }
        })
        .collect()
}

/// Empirical distributions of the three attributes.
///
/// `duration` and `rest` list every legal value (ascending) with its
/// probability, zeros included.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributeHistograms {
    pub midi: BTreeMap<u8, f64>,
    pub duration: Vec<(f64, f64)>,
    pub rest: Vec<(f64, f64)>,
}

impl AttributeHistograms {
    pub fn from_notes<'a>(notes: impl IntoIterator<Item = &'a NoteTriplet>) -> Result<Self> {
        let mut midi: BTreeMap<u8, usize> = BTreeMap::new();
        let mut duration = vec![0usize; DURATION_VALUES.len()];
        let mut rest = vec![0usize; REST_VALUES.len()];
        let mut total = 0usize;
        for n in notes {
            let d = DURATION_VALUES.iter().position(|&v| v == n.duration);
            let r = REST_VALUES.iter().position(|&v| v == n.rest);
            let (Some(d), Some(r)) = (d, r) else {
                return Err(invalid(format!("note {n:?} has attribute values outside the legal sets")));
            };
            *midi.entry(n.midi).or_default() += 1;
            duration[d] += 1;
            rest[r] += 1;
            total += 1;
        }
        if total == 0 {
            return Err(invalid("cannot build histograms from an empty dataset"));
        }
        let t = total as f64;
        Ok(Self {
            midi: midi.into_iter().map(|(k, c)| (k, c as f64 / t)).collect(),
            duration: DURATION_VALUES.iter().zip(duration).map(|(&v, c)| (v, c as f64 / t)).collect(),
            rest: REST_VALUES.iter().zip(rest).map(|(&v, c)| (v, c as f64 / t)).collect(),
        })
    }

    pub fn expected_duration(&self) -> f64 {
        self.duration.iter().map(|(v, p)| v * p).sum()
    }

    pub fn expected_rest(&self) -> f64 {
        self.rest.iter().map(|(v, p)| v * p).sum()
    }

    pub fn rest_zero_probability(&self) -> f64 {
        self.rest.iter().find(|(v, _)| *v == 0.0).map_or(0.0, |(_, p)| *p)
    }
}

pub fn compute_histograms(dataset: &[AlignedSequence]) -> Result<AttributeHistograms> {
    AttributeHistograms::from_notes(dataset.iter().flat_map(|s| s.notes.iter()))
}

/// Positions of each split within the dataset it was drawn from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitIndices {
    pub seed: u64,
    pub train: Vec<usize>,
    pub validation: Vec<usize>,
    pub test: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSplit {
    pub train: Vec<AlignedSequence>,
    pub validation: Vec<AlignedSequence>,
    pub test: Vec<AlignedSequence>,
}

/// Minimum dataset size that leaves every split non-empty.
pub const MIN_SPLIT_SIZE: usize = 10;

/// Seeded shuffle into 80% / 10% / 10% (train and validation sizes rounded
/// to nearest, test takes the remainder).
pub fn split_indices(len: usize, seed: u64) -> Result<SplitIndices> {
    if len < MIN_SPLIT_SIZE {
        return Err(invalid(format!(
            "dataset of {len} sequences is too small to split (need at least {MIN_SPLIT_SIZE})"
        )));
    }
    let mut order: Vec<usize> = (0..len).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let n_train = (len as f64 * 0.8).round() as usize;
    let n_val = (len as f64 * 0.1).round() as usize;
    let test = order.split_off(n_train + n_val);
    let validation = order.split_off(n_train);
    Ok(SplitIndices {
        seed,
        train: order,
        validation,
        test,
    })
}

impl SplitIndices {
    pub fn apply(&self, dataset: &[AlignedSequence]) -> Result<DatasetSplit> {
        let pick = |idx: &[usize]| -> Result<Vec<AlignedSequence>> {
            idx.iter()
                .map(|&i| {
                    dataset
                        .get(i)
                        .cloned()
                        .ok_or_else(|| invalid(format!("split refers to sequence {i} of {}", dataset.len())))
                })
                .collect()
        };
        Ok(DatasetSplit {
            train: pick(&self.train)?,
            validation: pick(&self.validation)?,
            test: pick(&self.test)?,
        })
    }
}

pub fn split_dataset(dataset: &[AlignedSequence], seed: u64) -> Result<DatasetSplit> {
    split_indices(dataset.len(), seed)?.apply(dataset)
}

/// One JSON object per line, in dataset order.
pub fn to_json_lines(dataset: &[AlignedSequence]) -> Result<String> {
    let mut out = String::new();
    for s in dataset {
        out.push_str(&serde_json::to_string(s)?);
        out.push('\n');
    }
    Ok(out)
}

pub fn from_json_lines(text: &str) -> Result<Vec<AlignedSequence>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| invalid(format!("dataset line {}: {e}", i + 1)))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;
    use rand::Rng;

    use super::*;

    fn notes(n: usize) -> Vec<AlignedNote> {
        (0..n)
            .map(|i| AlignedNote {
                pair: SyllablePair::new(format!("w{i}"), format!("w{i}")),
                note: NoteTriplet {
                    midi: 60 + (i % 12) as u8,
                    duration: 1.0,
                    rest: 0.0,
                },
            })
            .collect()
    }

    #[test]
    fn sequence_count_thresholds() {
        assert!(extract_sequences("s", &notes(19)).is_empty());
        let one = extract_sequences("s", &notes(25));
        assert_eq!(one.len(), 1);
        assert_eq!(one[0].syllables[0].word, "w0");
        assert_eq!(one[0].syllables[19].word, "w19");
        let two = extract_sequences("s", &notes(45));
        assert_eq!(two.len(), 2);
        assert_eq!(two[1].syllables[0].word, "w20");
        assert_eq!(two[1].syllables[19].word, "w39");
        assert_eq!(extract_sequences("s", &notes(20)).len(), 1);
        assert_eq!(extract_sequences("s", &notes(40)).len(), 2);
        assert_eq!(extract_sequences("s", &notes(400)).len(), 2);
    }

    #[test]
    fn histograms_of_constant_data_are_point_masses() {
        let seq = extract_sequences("s", &vec![notes(1)[0].clone(); 20]);
        let h = compute_histograms(&seq).unwrap();
        assert_eq!(h.midi.len(), 1);
        assert_eq!(h.midi[&60], 1.0);
        assert_eq!(h.duration.iter().filter(|(_, p)| *p > 0.0).count(), 1);
        assert_eq!(h.rest_zero_probability(), 1.0);
    }

    #[test]
    fn empty_dataset_rejected() {
        assert!(compute_histograms(&[]).is_err());
    }

    #[test]
    fn two_value_uniform_midi() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let all: Vec<NoteTriplet> = (0..20_000)
            .map(|_| NoteTriplet {
                midi: if rng.gen_bool(0.5) { 60 } else { 62 },
                duration: 1.0,
                rest: 0.0,
            })
            .collect();
        let h = AttributeHistograms::from_notes(&all).unwrap();
        assert!((h.midi[&60] - 0.5).abs() < 0.02);
        assert!((h.midi[&62] - 0.5).abs() < 0.02);
        let sum: f64 = h.midi.values().sum();
        assert!((sum - 1.0).abs() < 1e-9);
    }

    #[test]
    fn split_sizes() {
        let s = split_indices(10, 0).unwrap();
        assert_eq!((s.train.len(), s.validation.len(), s.test.len()), (8, 1, 1));
        let s = split_indices(13_937, 7).unwrap();
        assert_eq!((s.train.len(), s.validation.len(), s.test.len()), (11_150, 1_394, 1_393));
        assert!(split_indices(9, 0).is_err());
    }

    #[test]
    fn split_is_seeded() {
        assert_eq!(split_indices(100, 3).unwrap(), split_indices(100, 3).unwrap());
        assert_ne!(split_indices(100, 3).unwrap(), split_indices(100, 4).unwrap());
    }

    proptest! {
        #[test]
        fn split_partitions_indices(len in 10usize..500, seed in any::<u64>()) {
            let s = split_indices(len, seed).unwrap();
            let mut all: Vec<usize> = s.train.iter().chain(&s.validation).chain(&s.test).copied().collect();
            all.sort_unstable();
            prop_assert_eq!(all, (0..len).collect::<Vec<_>>());
            prop_assert!((s.train.len() as f64 - 0.8 * len as f64).abs() <= 1.0);
            prop_assert!((s.validation.len() as f64 - 0.1 * len as f64).abs() <= 1.0);
            prop_assert!((s.test.len() as f64 - 0.1 * len as f64).abs() <= 1.0);
        }

        #[test]
        fn extracted_sequences_are_disjoint_and_ordered(n in 0usize..120) {
            let src = notes(n);
            let seqs = extract_sequences("s", &src);
            let flat: Vec<String> = seqs.iter().flat_map(|s| s.syllables.iter().map(|p| p.word.clone())).collect();
            let expected: Vec<String> = src.iter().take(flat.len()).map(|n| n.pair.word.clone()).collect();
            prop_assert_eq!(flat, expected);
        }
    }

    #[test]
    fn json_lines_reload_exactly() {
        let seqs = extract_sequences("song.mid", &notes(45));
        let text = to_json_lines(&seqs).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert_eq!(from_json_lines(&text).unwrap(), seqs);
        assert!(text.starts_with(r#"{"source_id":"song.mid#0","syllables":[["w0","w0"]"#));
    }

    #[test]
    fn json_lines_validate_length() {
        let bad = r#"{"source_id":"x","syllables":[["a","a"]],"notes":[[60,1.0,0.0]]}"#;
        assert!(from_json_lines(bad).is_err());
    }
}
