//! Lyric tokens and skip-gram embeddings.

mod skipgram;
mod syllabify;
mod table;
mod token;
mod tokenize;

pub use skipgram::{noise_distribution, train_skipgram, SkipGramConfig, SkipGramResult};
pub use syllabify::Syllabifier;
pub use table::{embed, EmbeddingTable, LyricsEmbedding, EMBEDDING_DIM, TABLE_DIM};
pub use token::{normalize_fragment, SyllablePair, Token, TokenKind};
pub use tokenize::{corpus_streams, tokenize, TokenPair};
