//! Melody data: attribute quantisation, MIDI input/output and dataset
//! assembly.

mod attributes;
mod dataset;
mod lyrics;
mod midi;

pub use attributes::{
    beats_from_seconds, snap_midi, snap_to_set, AttributeKind, AttributeScaling, NoteTriplet, DURATION_VALUES, MIDI_MAX, MIDI_MIN,
    REST_VALUES,
};
pub use dataset::{
    align_song, compute_histograms, extract_sequences, from_json_lines, split_dataset, split_indices,
    to_json_lines, AlignedNote, AlignedSequence, AttributeHistograms, DatasetSplit, SplitIndices, MIN_SPLIT_SIZE,
    SEQUENCE_LEN,
};
pub use lyrics::{align_syllables, lyric_event_texts};
pub use midi::{parse_midi, write_midi, LyricNote, ParsedSong, WRITER_TICKS_PER_QUARTER};
