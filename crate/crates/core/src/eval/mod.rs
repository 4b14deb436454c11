//! Sample-set distances, melody statistics, the histogram baseline and the
//! lyric-conditioning shuffle experiment.

mod baseline;
mod conditioning;
mod metrics;
mod mmd;
mod report;

pub use baseline::{sample_baseline, BASELINE_MIDI_RANGE};
pub use conditioning::{conditioning_distance, matrix_distance, ConditioningResult, Summary, SHUFFLE_SAMPLES};
pub use metrics::{
    music_metrics, ngram_repetitions, sequence_metrics, transition_distribution, MetricsRow, TransitionDistribution,
};
pub use mmd::{median_bandwidth, mmd2_unbiased, mmd2_unbiased_with_sigma, Bandwidth};
pub use report::{EvalReport, MetricsTable};

use crate::melody::{AttributeScaling, NoteTriplet};

/// Kernel features of a melody: scaled attributes, flattened.
pub fn sequence_features(notes: &[NoteTriplet]) -> Vec<f64> {
    AttributeScaling::default().flatten(notes)
}
