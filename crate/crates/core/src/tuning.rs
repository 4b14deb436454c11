//! Snapping continuous generator output to legal attribute values and to
//! the best-fitting major or natural-minor scale.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::melody::{snap_midi, AttributeKind, NoteTriplet, MIDI_MAX, MIDI_MIN};

const MAJOR_STEPS: [u8; 7] = [0, 2, 4, 5, 7, 9, 11];
const MINOR_STEPS: [u8; 7] = [0, 2, 3, 5, 7, 8, 10];
const NOTE_NAMES: [&str; 12] = ["C", "C#", "D", "D#", "E", "F", "F#", "G", "G#", "A", "A#", "B"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Major,
    NaturalMinor,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Scale {
    root: u8,
    mode: Mode,
}

impl Scale {
    pub fn new(root: u8, mode: Mode) -> Result<Self> {
        if root > 11 {
            return Err(invalid(format!("scale root must be a pitch class 0..=11, got {root}")));
        }
        Ok(Self { root, mode })
    }

    pub fn root(&self) -> u8 {
        self.root
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn pitch_classes(&self) -> [u8; 7] {
        let steps = match self.mode {
            Mode::Major => MAJOR_STEPS,
            Mode::NaturalMinor => MINOR_STEPS,
        };
        steps.map(|s| (self.root + s) % 12)
    }

    pub fn contains_class(&self, pitch_class: u8) -> bool {
        self.pitch_classes().contains(&(pitch_class % 12))
    }

    pub fn contains(&self, midi: u8) -> bool {
        self.contains_class(midi % 12)
    }

    /// All 24 candidates in tie-break order: ascending root, major first.
    pub fn all() -> impl Iterator<Item = Scale> {
        (0..12u8).flat_map(|root| {
            [Mode::Major, Mode::NaturalMinor]
                .into_iter()
                .map(move |mode| Scale { root, mode })
        })
    }
}

impl fmt::Display for Scale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mode = match self.mode {
            Mode::Major => "major",
            Mode::NaturalMinor => "minor",
        };
        write!(f, "{} {mode}", NOTE_NAMES[self.root as usize])
    }
}

/// How candidate scales are scored against a sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScaleScoring {
    /// Number of notes whose pitch class is in the scale.
    #[default]
    NoteCount,
    /// Total duration of in-scale notes.
    DurationWeighted,
}

/// Nearest legal triplet for a continuous `[midi, duration, rest]` output.
/// Ties resolve to the smaller value.
pub fn quantize_triplet(raw: [f64; 3]) -> Result<NoteTriplet> {
    if raw.iter().any(|x| !x.is_finite()) {
        return Err(invalid(format!("cannot quantise non-finite triplet {raw:?}")));
    }
    Ok(NoteTriplet {
        midi: snap_midi(raw[0]),
        duration: AttributeKind::Duration.snap(raw[1]),
        rest: AttributeKind::Rest.snap(raw[2]),
    })
}

pub fn quantize_sequence(raw: &[[f64; 3]]) -> Result<Vec<NoteTriplet>> {
    raw.iter().map(|&t| quantize_triplet(t)).collect()
}

pub fn detect_scale(notes: &[NoteTriplet]) -> Result<Scale> {
    detect_scale_with(notes, ScaleScoring::NoteCount)
}

/// Best-scoring scale; the first candidate in [`Scale::all`] order wins ties.
pub fn detect_scale_with(notes: &[NoteTriplet], scoring: ScaleScoring) -> Result<Scale> {
    if notes.is_empty() {
        return Err(invalid("cannot detect the scale of an empty sequence"));
    }
    let mut weight = [0.0f64; 12];
    for n in notes {
        weight[(n.midi % 12) as usize] += match scoring {
            ScaleScoring::NoteCount => 1.0,
            ScaleScoring::DurationWeighted => n.duration,
        };
    }
    let mut best: Option<(Scale, f64)> = None;
    for scale in Scale::all() {
        let score: f64 = scale.pitch_classes().iter().map(|&pc| weight[pc as usize]).sum();
        if best.is_none_or(|(_, s)| score > s) {
            best = Some((scale, score));
        }
    }
    Ok(best.expect("24 candidates").0)
}

/// Nearest in-scale MIDI number within `[lo, hi]`, ties toward the lower
/// pitch. Notes already in scale and in range are returned unchanged.
pub fn nearest_in_scale(midi: u8, scale: &Scale, lo: u8, hi: u8) -> u8 {
    (lo..=hi)
        .filter(|&m| scale.contains(m))
        .min_by_key(|&m| (m.abs_diff(midi), m))
        .expect("any 12-semitone range holds an in-scale note")
}

pub fn constrain_to_scale(notes: &[NoteTriplet], scale: &Scale) -> Vec<NoteTriplet> {
    constrain_to_scale_in_range(notes, scale, MIDI_MIN, MIDI_MAX).expect("full piano range is valid")
}

/// Like [`constrain_to_scale`], but candidates are restricted to `[lo, hi]`.
/// The range must span at least an octave.
pub fn constrain_to_scale_in_range(notes: &[NoteTriplet], scale: &Scale, lo: u8, hi: u8) -> Result<Vec<NoteTriplet>> {
    if lo < MIDI_MIN || hi > MIDI_MAX || hi < lo.saturating_add(11) {
        return Err(invalid(format!("pitch range [{lo}, {hi}] must span an octave within the piano range")));
    }
    Ok(notes
        .iter()
        .map(|n| NoteTriplet {
            midi: nearest_in_scale(n.midi, scale, lo, hi),
            ..*n
        })
        .collect())
}

/// A tuned sequence and the scale it was constrained to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantizedSequence {
    pub scale: Scale,
    pub notes: Vec<NoteTriplet>,
}

/// Full tuning pipeline: quantise, detect the scale, constrain.
pub fn tune(raw: &[[f64; 3]], scoring: ScaleScoring) -> Result<QuantizedSequence> {
    let quantized = quantize_sequence(raw)?;
    let scale = detect_scale_with(&quantized, scoring)?;
    Ok(QuantizedSequence {
        notes: constrain_to_scale(&quantized, &scale),
        scale,
    })
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    fn t(midi: u8) -> NoteTriplet {
        NoteTriplet { midi, duration: 1.0, rest: 0.0 }
    }

    fn c_major() -> Scale {
        Scale::new(0, Mode::Major).unwrap()
    }

    #[test]
    fn quantize_examples() {
        assert_eq!(quantize_triplet([60.4, 0.9, 0.2]).unwrap(), (60, 1.0, 0.0).into());
        assert_eq!(quantize_triplet([20.0, 0.25, 0.0]).unwrap(), (21, 0.25, 0.0).into());
        assert_eq!(quantize_triplet([64.5, 0.625, 3.0]).unwrap(), (64, 0.5, 2.0).into());
        assert_eq!(quantize_triplet([500.0, 100.0, -4.0]).unwrap(), (108, 32.0, 0.0).into());
    }

    #[test]
    fn quantize_rejects_non_finite() {
        assert!(quantize_triplet([f64::NAN, 1.0, 0.0]).is_err());
        assert!(quantize_triplet([60.0, f64::INFINITY, 0.0]).is_err());
    }

    #[test]
    fn scale_members() {
        assert_eq!(c_major().pitch_classes(), [0, 2, 4, 5, 7, 9, 11]);
        assert_eq!(Scale::new(9, Mode::NaturalMinor).unwrap().pitch_classes(), [9, 11, 0, 2, 4, 5, 7]);
        assert!(Scale::new(12, Mode::Major).is_err());
        assert_eq!(Scale::all().count(), 24);
        assert_eq!(Scale::new(6, Mode::NaturalMinor).unwrap().to_string(), "F# minor");
    }

    #[test]
    fn white_keys_detect_c_major() {
        let notes: Vec<_> = [60, 62, 64, 65, 67, 69, 71, 72].into_iter().map(t).collect();
        assert_eq!(detect_scale(&notes).unwrap(), c_major());
    }

    #[test]
    fn chromatic_and_single_note_tie_to_c_major() {
        let chromatic: Vec<_> = (60..72).map(t).collect();
        // Brute force: every scale holds exactly seven of the twelve classes.
        for s in Scale::all() {
            assert_eq!(chromatic.iter().filter(|n| s.contains(n.midi)).count(), 7);
        }
        assert_eq!(detect_scale(&chromatic).unwrap(), c_major());
        assert_eq!(detect_scale(&[t(60)]).unwrap(), c_major());
        assert!(detect_scale(&[]).is_err());
    }

    #[test]
    fn relative_minor_with_lower_root_wins() {
        // D natural minor and F major share these classes; D is the lower root.
        let notes: Vec<_> = [62, 64, 65, 67, 69, 70, 72].into_iter().map(t).collect();
        assert_eq!(detect_scale(&notes).unwrap(), Scale::new(2, Mode::NaturalMinor).unwrap());
    }

    #[test]
    fn duration_weighting_changes_the_vote() {
        // No diatonic scale holds F, F# and G together.
        let notes = vec![
            NoteTriplet { midi: 66, duration: 8.0, rest: 0.0 },
            NoteTriplet { midi: 65, duration: 0.25, rest: 0.0 },
            NoteTriplet { midi: 67, duration: 0.25, rest: 0.0 },
        ];
        assert_eq!(detect_scale_with(&notes, ScaleScoring::NoteCount).unwrap(), c_major());
        assert!(detect_scale_with(&notes, ScaleScoring::DurationWeighted).unwrap().contains(66));
    }

    #[test]
    fn constrain_examples() {
        assert_eq!(constrain_to_scale(&[t(66)], &c_major()), vec![t(65)]);
        let inside: Vec<_> = [60, 64, 67].into_iter().map(t).collect();
        assert_eq!(constrain_to_scale(&inside, &c_major()), inside);
        let kept = NoteTriplet { midi: 61, duration: 1.5, rest: 2.0 };
        assert_eq!(constrain_to_scale(&[kept], &c_major())[0], NoteTriplet { midi: 60, ..kept });
    }

    #[test]
    fn constrain_respects_range() {
        let s = c_major();
        let out = constrain_to_scale_in_range(&[t(40), t(100), t(66)], &s, 60, 80).unwrap();
        assert_eq!(out.iter().map(|n| n.midi).collect::<Vec<_>>(), vec![60, 79, 65]);
        assert!(constrain_to_scale_in_range(&[t(60)], &s, 60, 65).is_err());
    }

    fn arb_scale() -> impl Strategy<Value = Scale> {
        (0u8..12, any::<bool>()).prop_map(|(r, minor)| {
            Scale::new(r, if minor { Mode::NaturalMinor } else { Mode::Major }).unwrap()
        })
    }

    proptest! {
        #[test]
        fn quantize_is_idempotent(m in -50.0f64..200.0, d in -5.0f64..50.0, r in -5.0f64..50.0) {
            let q = quantize_triplet([m, d, r]).unwrap();
            prop_assert!(q.is_legal());
            let again = quantize_triplet([f64::from(q.midi), q.duration, q.rest]).unwrap();
            prop_assert_eq!(again, q);
        }

        #[test]
        fn constrain_is_idempotent_and_local(midis in prop::collection::vec(MIDI_MIN..=MIDI_MAX, 1..40), scale in arb_scale()) {
            let notes: Vec<_> = midis.into_iter().map(t).collect();
            let once = constrain_to_scale(&notes, &scale);
            prop_assert_eq!(constrain_to_scale(&once, &scale), once.clone());
            for (a, b) in notes.iter().zip(&once) {
                prop_assert!(scale.contains(b.midi));
                prop_assert!(a.midi.abs_diff(b.midi) <= 2);
                if scale.contains(a.midi) {
                    prop_assert_eq!(a, b);
                }
            }
        }

        #[test]
        fn detection_matches_brute_force(midis in prop::collection::vec(MIDI_MIN..=MIDI_MAX, 1..30)) {
            let notes: Vec<_> = midis.into_iter().map(t).collect();
            let mut expected = None;
            let mut best = 0;
            for root in 0..12u8 {
                for mode in [Mode::Major, Mode::NaturalMinor] {
                    let s = Scale::new(root, mode).unwrap();
                    let score = notes.iter().filter(|n| s.contains(n.midi)).count();
                    if score > best {
                        best = score;
                        expected = Some(s);
                    }
                }
            }
            prop_assert_eq!(detect_scale(&notes).unwrap(), expected.unwrap());
        }

        #[test]
        fn pipeline_is_total(raw in prop::collection::vec(prop::array::uniform3(-1e6f64..1e6), 1..30)) {
            let tuned = tune(&raw, ScaleScoring::NoteCount).unwrap();
            prop_assert!(tuned.notes.iter().all(|n| n.is_legal() && tuned.scale.contains(n.midi)));
        }
    }
}
