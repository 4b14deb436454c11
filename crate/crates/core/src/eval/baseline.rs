use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Result};
use crate::melody::{AttributeHistograms, NoteTriplet};
use crate::tuning::{constrain_to_scale_in_range, detect_scale, QuantizedSequence};

/// Pitch range of baseline melodies.
pub const BASELINE_MIDI_RANGE: (u8, u8) = (60, 80);

fn weighted<T: Copy>(items: &[(T, f64)]) -> Result<(Vec<T>, WeightedIndex<f64>)> {
    let values = items.iter().map(|(v, _)| *v).collect();
    let dist = WeightedIndex::new(items.iter().map(|(_, p)| *p))
        .map_err(|e| invalid(format!("invalid histogram: {e}")))?;
    Ok((values, dist))
}

/// Random melodies drawing every attribute of every note independently from
/// the dataset histograms. Pitches are clamped into [`BASELINE_MIDI_RANGE`]
/// and then constrained to the detected scale within that range.
pub fn sample_baseline(hist: &AttributeHistograms, n: usize, len: usize, seed: u64) -> Result<Vec<QuantizedSequence>> {
    if n == 0 {
        return Ok(Vec::new());
    }
    if len == 0 {
        return Err(invalid("baseline sequences need at least one note"));
    }
    let midi_items: Vec<(u8, f64)> = hist.midi.iter().map(|(&k, &p)| (k, p)).collect();
    let (midi_vals, midi_dist) = weighted(&midi_items)?;
    let (dur_vals, dur_dist) = weighted(&hist.duration)?;
    let (rest_vals, rest_dist) = weighted(&hist.rest)?;
    let (lo, hi) = BASELINE_MIDI_RANGE;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let notes: Vec<NoteTriplet> = (0..len)
                .map(|_| NoteTriplet {
                    midi: midi_vals[midi_dist.sample(&mut rng)].clamp(lo, hi),
                    duration: dur_vals[dur_dist.sample(&mut rng)],
                    rest: rest_vals[rest_dist.sample(&mut rng)],
                })
                .collect();
            let scale = detect_scale(&notes)?;
            Ok(QuantizedSequence {
                notes: constrain_to_scale_in_range(&notes, &scale, lo, hi)?,
                scale,
            })
        })
        .collect()
}
