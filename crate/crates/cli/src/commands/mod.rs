pub mod baseline;
pub mod dataset;
pub mod embeddings;
pub mod evaluate;
pub mod generate;
pub mod train;
