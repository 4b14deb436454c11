//! Legal values of the three melody attributes and the nearest-value
//! quantiser used both when parsing MIDI and when tuning generator output.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Note durations in beats (quarter note = 1).
pub const DURATION_VALUES: [f64; 12] = [0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0, 4.0, 6.0, 8.0, 16.0, 32.0];

/// Rest durations in beats; 0 means the note follows without silence.
pub const REST_VALUES: [f64; 7] = [0.0, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0];

pub const MIDI_MIN: u8 = 21;
pub const MIDI_MAX: u8 = 108;

/// One melody event: pitch, how long it sounds, and the silence before it.
///
/// Serialised as a `[midi, duration, rest]` array.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "(u8, f64, f64)", into = "(u8, f64, f64)")]
pub struct NoteTriplet {
    pub midi: u8,
    pub duration: f64,
    pub rest: f64,
}

impl From<(u8, f64, f64)> for NoteTriplet {
    fn from((midi, duration, rest): (u8, f64, f64)) -> Self {
        Self { midi, duration, rest }
    }
}

impl From<NoteTriplet> for (u8, f64, f64) {
    fn from(n: NoteTriplet) -> Self {
        (n.midi, n.duration, n.rest)
    }
}

impl NoteTriplet {
    pub fn to_array(&self) -> [f64; 3] {
        [f64::from(self.midi), self.duration, self.rest]
    }

    /// True when every attribute is one of its legal discrete values.
    pub fn is_legal(&self) -> bool {
        (MIDI_MIN..=MIDI_MAX).contains(&self.midi)
            && AttributeKind::Duration.is_legal(self.duration)
            && AttributeKind::Rest.is_legal(self.rest)
    }
}

/// Per-attribute divisors mapping triplets into comparable ranges before they
/// enter a network or a kernel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AttributeScaling {
    pub midi: f64,
    pub duration: f64,
    pub rest: f64,
}

impl Default for AttributeScaling {
    fn default() -> Self {
        Self {
            midi: 127.0,
            duration: 32.0,
            rest: 32.0,
        }
    }
}

impl AttributeScaling {
    pub fn identity() -> Self {
        Self {
            midi: 1.0,
            duration: 1.0,
            rest: 1.0,
        }
    }

    pub fn scale(&self, raw: [f64; 3]) -> [f64; 3] {
        [raw[0] / self.midi, raw[1] / self.duration, raw[2] / self.rest]
    }

    pub fn unscale(&self, scaled: [f64; 3]) -> [f64; 3] {
        [scaled[0] * self.midi, scaled[1] * self.duration, scaled[2] * self.rest]
    }

    pub fn scale_note(&self, n: &NoteTriplet) -> [f64; 3] {
        self.scale(n.to_array())
    }

    /// Scaled notes laid end to end, three values per note.
    pub fn flatten(&self, notes: &[NoteTriplet]) -> Vec<f64> {
        notes.iter().flat_map(|n| self.scale_note(n)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AttributeKind {
    Duration,
    Rest,
}

impl AttributeKind {
    pub fn legal_values(self) -> &'static [f64] {
        match self {
            AttributeKind::Duration => &DURATION_VALUES,
            AttributeKind::Rest => &REST_VALUES,
        }
    }

    /// Nearest legal value for a raw beat count.
    pub fn snap(self, beats: f64) -> f64 {
        snap_to_set(beats, self.legal_values())
    }

    pub fn is_legal(self, value: f64) -> bool {
        self.legal_values().contains(&value)
    }
}

/// Closest member of an ascending `set`. Equidistant values resolve to the
/// smaller member; anything beyond the ends lands on the nearest end.
pub fn snap_to_set(x: f64, set: &[f64]) -> f64 {
    let mut best = set[0];
    let mut best_dist = (x - best).abs();
    for &v in &set[1..] {
        let d = (x - v).abs();
        if d < best_dist {
            best = v;
            best_dist = d;
        }
    }
    best
}

/// Nearest integer MIDI number, ties downward, clamped to the piano range.
pub fn snap_midi(x: f64) -> u8 {
    let rounded = (x - 0.5).ceil();
    rounded.clamp(f64::from(MIDI_MIN), f64::from(MIDI_MAX)) as u8
}

/// Converts a span in seconds to beats at `bpm` and snaps it to the legal set
/// of `kind`.
pub fn beats_from_seconds(seconds: f64, bpm: f64, kind: AttributeKind) -> Result<f64> {
    if !(seconds.is_finite() && seconds >= 0.0) {
        return Err(invalid(format!("time span must be a finite non-negative number, got {seconds}")));
    }
    if !(bpm.is_finite() && bpm > 0.0) {
        return Err(invalid(format!("tempo must be positive, got {bpm} BPM")));
    }
    Ok(kind.snap(seconds * bpm / 60.0))
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    #[test]
    fn exact_quarter_note() {
        assert_eq!(beats_from_seconds(0.5, 120.0, AttributeKind::Duration).unwrap(), 1.0);
    }

    #[test]
    fn exact_eighth_note() {
        assert_eq!(beats_from_seconds(0.3, 100.0, AttributeKind::Duration).unwrap(), 0.5);
    }

    #[test]
    fn rest_snaps_to_nearest_member() {
        // raw 0.7 beats: |0.7-0| = 0.7, |0.7-1| = 0.3
        assert_eq!(beats_from_seconds(0.7, 60.0, AttributeKind::Rest).unwrap(), 1.0);
    }

    #[test]
    fn negative_time_rejected() {
        assert!(beats_from_seconds(-0.1, 120.0, AttributeKind::Rest).is_err());
        assert!(beats_from_seconds(0.1, 0.0, AttributeKind::Rest).is_err());
        assert!(beats_from_seconds(f64::NAN, 120.0, AttributeKind::Rest).is_err());
    }

    #[test]
    fn ties_round_down() {
        assert_eq!(AttributeKind::Duration.snap(0.625), 0.5);
        assert_eq!(AttributeKind::Rest.snap(3.0), 2.0);
        assert_eq!(AttributeKind::Rest.snap(0.5), 0.0);
        assert_eq!(snap_midi(64.5), 64);
        assert_eq!(snap_midi(64.500001), 65);
    }

    #[test]
    fn large_values_clamp() {
        assert_eq!(AttributeKind::Duration.snap(1000.0), 32.0);
        assert_eq!(AttributeKind::Rest.snap(1000.0), 32.0);
        assert_eq!(snap_midi(300.0), MIDI_MAX);
        assert_eq!(snap_midi(-5.0), MIDI_MIN);
    }

    proptest! {
        #[test]
        fn snapping_is_idempotent(x in 0.0f64..100.0) {
            for kind in [AttributeKind::Duration, AttributeKind::Rest] {
                let once = kind.snap(x);
                prop_assert!(kind.is_legal(once));
                prop_assert_eq!(kind.snap(once), once);
            }
        }

        #[test]
        fn snapped_value_is_a_closest_member(x in -10.0f64..60.0) {
            for kind in [AttributeKind::Duration, AttributeKind::Rest] {
                let s = kind.snap(x);
                let best = kind.legal_values().iter().map(|v| (x - v).abs()).fold(f64::INFINITY, f64::min);
                prop_assert_eq!((x - s).abs(), best);
            }
        }
    }
}
