//! Character n-gram TF-IDF, external sentence embeddings and their fusion
//! into a single style vector.

mod embedding;
mod featurizer;
mod style;
mod tfidf;
mod vocab;

pub use embedding::{load_embeddings, write_embeddings, EmbeddingRecord, EmbeddingVector, EMBEDDING_DIM};
pub use featurizer::Featurizer;
pub use style::{fuse, StyleVector};
pub use tfidf::{vectorize_tfidf, TfIdfVector};
pub use vocab::{fit_vocabulary, fit_vocabulary_with, grams_of, NGramVocabulary, VocabularyOptions};
