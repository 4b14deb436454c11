//! Lyrics-conditioned melody generation.
//!
//! The crate covers the whole pipeline: syllable-aligned MIDI datasets
//! ([`melody`]), skip-gram lyric embeddings ([`embedding`]), a conditional
//! LSTM-GAN built on hand-written layers ([`neural`], [`gan`]), the discrete
//! tuning step ([`tuning`]) and the evaluation suite ([`eval`]).

pub mod embedding;
pub mod error;
pub mod eval;
pub mod gan;
pub mod io;
pub mod melody;
pub mod neural;
pub mod tuning;

pub use error::{Error, Result};
