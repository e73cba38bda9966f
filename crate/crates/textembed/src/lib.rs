//! Report text processing: tokenization, skip-gram embeddings trained
//! with negative sampling, summed sentence embeddings with the
//! average-vector OOV rule, and 2D PCA projection.

pub mod error;
pub mod pca;
pub mod persist;
pub mod skipgram;
pub mod svg;
pub mod tokenize;
pub mod vocab;

pub use error::TextError;
pub use pca::pca_project;
pub use persist::{load_embeddings, save_embeddings};
pub use skipgram::{
    average_embedding, cosine, sentence_embedding, train_skipgram, EmbeddingModel,
    SentenceEmbedding, SkipgramConfig,
};
pub use svg::write_scatter_svg;
pub use tokenize::tokenize;
pub use vocab::{build_vocabulary, Vocabulary};
