use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::token::SyllablePair;
use crate::error::{invalid, shape, Result};

/// Dimension of each of the word and syllable embeddings.
pub const TABLE_DIM: usize = 10;
/// Dimension of a concatenated lyric embedding.
pub const EMBEDDING_DIM: usize = 2 * TABLE_DIM;

/// Token → vector lookup. Every vector has `dim` finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    dim: usize,
    vectors: BTreeMap<String, Vec<f64>>,
}

impl EmbeddingTable {
    pub fn new(dim: usize, vectors: BTreeMap<String, Vec<f64>>) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("embedding dimension must be positive"));
        }
        for (token, v) in &vectors {
            if v.len() != dim {
                return Err(shape(format!("vector for {token:?} has length {}, expected {dim}", v.len())));
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(invalid(format!("vector for {token:?} is not finite")));
            }
        }
        Ok(Self { dim, vectors })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn get(&self, token: &str) -> Option<&[f64]> {
        self.vectors.get(token).map(Vec::as_slice)
    }

    pub fn contains(&self, token: &str) -> bool {
        self.vectors.contains_key(token)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[f64])> {
        self.vectors.iter().map(|(k, v)| (k.as_str(), v.as_slice()))
    }

    /// Vector for `token`, or zeros when it is out of vocabulary.
    pub fn lookup_or_zero(&self, token: &str) -> Vec<f64> {
        self.get(token).map_or_else(|| vec![0.0; self.dim], <[f64]>::to_vec)
    }

    /// One line per token: the token followed by its space-separated values.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (token, v) in &self.vectors {
            out.push_str(token);
            for x in v {
                write!(out, " {x}").unwrap();
            }
            out.push('\n');
        }
        out
    }

    /// Parses [`EmbeddingTable::to_text`] output, requiring `dim` values per
    /// line.
    pub fn from_text(text: &str, dim: usize) -> Result<Self> {
        let mut vectors = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let mut fields = line.split_whitespace();
            let token = fields.next().expect("non-empty line has a first field");
            let values: Vec<f64> = fields
                .map(|f| f.parse::<f64>().map_err(|e| invalid(format!("line {}: {e}", i + 1))))
                .collect::<Result<_>>()?;
            if values.len() != dim {
                return Err(shape(format!(
                    "line {}: token {token:?} has {} values, expected {dim}",
                    i + 1,
                    values.len()
                )));
            }
            if vectors.insert(token.to_owned(), values).is_some() {
                return Err(invalid(format!("line {}: duplicate token {token:?}", i + 1)));
            }
        }
        Self::new(dim, vectors)
    }
}

/// Word embedding followed by syllable embedding.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LyricsEmbedding(#[serde(with = "array20")] pub [f64; EMBEDDING_DIM]);

mod array20 {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use super::EMBEDDING_DIM;

    pub fn serialize<S: Serializer>(v: &[f64; EMBEDDING_DIM], s: S) -> Result<S::Ok, S::Error> {
        v.as_slice().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<[f64; EMBEDDING_DIM], D::Error> {
        let v = Vec::<f64>::deserialize(d)?;
        v.try_into()
            .map_err(|v: Vec<f64>| serde::de::Error::invalid_length(v.len(), &"20 values"))
    }
}

impl LyricsEmbedding {
    pub fn zeros() -> Self {
        Self([0.0; EMBEDDING_DIM])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn word_part(&self) -> &[f64] {
        &self.0[..TABLE_DIM]
    }

    pub fn syllable_part(&self) -> &[f64] {
        &self.0[TABLE_DIM..]
    }
}

/// Concatenates the word and syllable vectors of a pair. Unknown tokens
/// contribute a zero half.
pub fn embed(pair: &SyllablePair, words: &EmbeddingTable, syllables: &EmbeddingTable) -> Result<LyricsEmbedding> {
    if words.dim() != TABLE_DIM || syllables.dim() != TABLE_DIM {
        return Err(shape(format!(
            "lyric embeddings need {TABLE_DIM}-dimensional tables, got {} and {}",
            words.dim(),
            syllables.dim()
        )));
    }
    let mut out = [0.0; EMBEDDING_DIM];
    if let Some(w) = words.get(&pair.word) {
        out[..TABLE_DIM].copy_from_slice(w);
    }
    if let Some(s) = syllables.get(&pair.syllable) {
        out[TABLE_DIM..].copy_from_slice(s);
    }
    Ok(LyricsEmbedding(out))
}
