use std::collections::HashMap;

use rayon::prelude::*;

use super::embedding::EmbeddingVector;
use super::style::{fuse, StyleVector};
use super::tfidf::vectorize_tfidf;
use super::vocab::NGramVocabulary;
use crate::{Error, Result};

/// Turns texts into fused style vectors with a fixed vocabulary, fusion weight
/// and embedding table. With `alpha == 0` no embeddings are consulted.
#[derive(Debug, Clone)]
pub struct Featurizer {
    vocab: NGramVocabulary,
    alpha: f64,
    embeddings: HashMap<String, EmbeddingVector>,
}

impl Featurizer {
    pub fn new(vocab: NGramVocabulary, alpha: f64, embeddings: HashMap<String, EmbeddingVector>) -> Result<Self> {
        if !alpha.is_finite() || alpha < 0.0 {
            return Err(Error::InvalidConfig(format!("fusion weight alpha = {alpha} must be finite and >= 0")));
        }
        Ok(Featurizer {
            vocab,
            alpha,
            embeddings,
        })
    }

    pub fn tfidf_only(vocab: NGramVocabulary) -> Self {
        Featurizer {
            vocab,
            alpha: 0.0,
            embeddings: HashMap::new(),
        }
    }

    pub fn vocab(&self) -> &NGramVocabulary {
        &self.vocab
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn embedding(&self, id: &str) -> Result<Option<&EmbeddingVector>> {
        if self.alpha == 0.0 {
            return Ok(None);
        }
        self.embeddings
            .get(id)
            .map(Some)
            .ok_or_else(|| Error::MissingEmbedding(id.to_string()))
    }

    /// Style vector for `text`; `id` keys the embedding lookup.
    pub fn vectorize(&self, id: &str, text: &str) -> Result<StyleVector> {
        let tfidf = vectorize_tfidf(text, &self.vocab);
        fuse(&tfidf, self.embedding(id)?, self.alpha)
    }

    /// Vectorizes `(id, text)` items in parallel, preserving order.
    pub fn vectorize_all<I, T>(&self, items: &[(I, T)]) -> Result<Vec<StyleVector>>
    where
        I: AsRef<str> + Sync,
        T: AsRef<str> + Sync,
    {
        items
            .par_iter()
            .map(|(id, text)| self.vectorize(id.as_ref(), text.as_ref()))
            .collect()
    }
}
