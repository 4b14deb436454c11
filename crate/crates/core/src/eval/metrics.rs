use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::melody::NoteTriplet;

/// Set averages of the in-song melody statistics.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MetricsRow {
    pub midi_span: f64,
    pub three_gram_reps: f64,
    pub two_gram_reps: f64,
    pub unique_midi: f64,
    pub notes_without_rest: f64,
    pub avg_rest: f64,
    pub song_length: f64,
}

impl MetricsRow {
    pub const COLUMNS: [&'static str; 7] = [
        "midi_span",
        "three_gram_reps",
        "two_gram_reps",
        "unique_midi",
        "notes_without_rest",
        "avg_rest",
        "song_length",
    ];

    pub fn values(&self) -> [f64; 7] {
        [
            self.midi_span,
            self.three_gram_reps,
            self.two_gram_reps,
            self.unique_midi,
            self.notes_without_rest,
            self.avg_rest,
            self.song_length,
        ]
    }
}

/// Number of length-`n` windows that repeat an earlier window.
pub fn ngram_repetitions(midi: &[u8], n: usize) -> usize {
    if n == 0 || midi.len() < n {
        return 0;
    }
    let windows = midi.windows(n);
    let total = windows.len();
    let distinct: BTreeSet<&[u8]> = midi.windows(n).collect();
    total - distinct.len()
}

/// Metrics of one sequence.
pub fn sequence_metrics(notes: &[NoteTriplet]) -> Result<MetricsRow> {
    if notes.is_empty() {
        return Err(invalid("metrics need at least one note"));
    }
    let midi: Vec<u8> = notes.iter().map(|n| n.midi).collect();
    let max = *midi.iter().max().expect("non-empty");
    let min = *midi.iter().min().expect("non-empty");
    let unique: BTreeSet<u8> = midi.iter().copied().collect();
    let total_rest: f64 = notes.iter().map(|n| n.rest).sum();
    Ok(MetricsRow {
        midi_span: f64::from(max - min),
        three_gram_reps: ngram_repetitions(&midi, 3) as f64,
        two_gram_reps: ngram_repetitions(&midi, 2) as f64,
        unique_midi: unique.len() as f64,
        notes_without_rest: notes.iter().filter(|n| n.rest == 0.0).count() as f64,
        avg_rest: total_rest / notes.len() as f64,
        song_length: notes.iter().map(|n| n.duration + n.rest).sum(),
    })
}

/// Per-sequence metrics averaged over the set.
pub fn music_metrics<S: AsRef<[NoteTriplet]>>(sequences: &[S]) -> Result<MetricsRow> {
    if sequences.is_empty() {
        return Err(invalid("metrics need at least one sequence"));
    }
    let mut sum = [0.0; 7];
    for s in sequences {
        for (acc, v) in sum.iter_mut().zip(sequence_metrics(s.as_ref())?.values()) {
            *acc += v;
        }
    }
    let n = sequences.len() as f64;
    let [a, b, c, d, e, f, g] = sum.map(|v| v / n);
    Ok(MetricsRow {
        midi_span: a,
        three_gram_reps: b,
        two_gram_reps: c,
        unique_midi: d,
        notes_without_rest: e,
        avg_rest: f,
        song_length: g,
    })
}

/// Normalised histogram of semitone steps between consecutive notes.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TransitionDistribution {
    pub probabilities: BTreeMap<i32, f64>,
    pub count: usize,
}

pub fn transition_distribution<S: AsRef<[NoteTriplet]>>(sequences: &[S]) -> TransitionDistribution {
    let mut counts: BTreeMap<i32, usize> = BTreeMap::new();
    let mut total = 0;
    for s in sequences {
        for pair in s.as_ref().windows(2) {
            *counts.entry(i32::from(pair[1].midi) - i32::from(pair[0].midi)).or_default() += 1;
            total += 1;
        }
    }
    TransitionDistribution {
        probabilities: counts
            .into_iter()
            .map(|(k, c)| (k, c as f64 / total as f64))
            .collect(),
        count: total,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn notes(midi: &[u8]) -> Vec<NoteTriplet> {
        midi.iter().map(|&m| NoteTriplet { midi: m, duration: 1.0, rest: 0.0 }).collect()
    }

    #[test]
    fn constant_sequence_closed_form() {
        let row = music_metrics(&[notes(&[60; 20])]).unwrap();
        assert_eq!(
            row,
            MetricsRow {
                midi_span: 0.0,
                three_gram_reps: 17.0,
                two_gram_reps: 18.0,
                unique_midi: 1.0,
                notes_without_rest: 20.0,
                avg_rest: 0.0,
                song_length: 20.0,
            }
        );
    }

    #[test]
    fn small_example() {
        let mut s = notes(&[60, 62, 60, 62, 64]);
        s[1].rest = 2.0;
        s[4].duration = 4.0;
        let row = sequence_metrics(&s).unwrap();
        assert_eq!(row.midi_span, 4.0);
        assert_eq!(row.two_gram_reps, 1.0);
        assert_eq!(row.three_gram_reps, 0.0);
        assert_eq!(row.unique_midi, 3.0);
        assert_eq!(row.notes_without_rest, 4.0);
        assert_eq!(row.avg_rest, 0.4);
        assert_eq!(row.song_length, 10.0);
    }

    #[test]
    fn empty_input_is_rejected() {
        assert!(music_metrics::<Vec<NoteTriplet>>(&[]).is_err());
        assert!(music_metrics(&[Vec::<NoteTriplet>::new()]).is_err());
    }

    #[test]
    fn transitions() {
        let d = transition_distribution(&[notes(&[60; 5])]);
        assert_eq!(d.probabilities, BTreeMap::from([(0, 1.0)]));
        let d = transition_distribution(&[notes(&(60..72).collect::<Vec<_>>())]);
        assert_eq!(d.probabilities, BTreeMap::from([(1, 1.0)]));
        let d = transition_distribution(&[notes(&[60, 64, 62]), notes(&[70, 74])]);
        assert_eq!(d.count, 3);
        assert!((d.probabilities.values().sum::<f64>() - 1.0).abs() < 1e-12);
        assert_eq!(d.probabilities[&4], 2.0 / 3.0);
    }
}
