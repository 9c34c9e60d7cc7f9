use serde::{Deserialize, Serialize};

use super::vocab::{grams_of, NGramVocabulary};

/// Sparse TF-IDF weights keyed by vocabulary index, ascending.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TfIdfVector {
    pub entries: Vec<(u32, f64)>,
    pub doc_char_count: usize,
}

impl TfIdfVector {
    pub fn weight(&self, index: u32) -> f64 {
        self.entries
            .binary_search_by_key(&index, |&(i, _)| i)
            .map(|k| self.entries[k].1)
            .unwrap_or(0.0)
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Weights every vocabulary gram present in `text` by
/// `(f(g, d) / |d|) * ln(N / df(g))`, where `f` counts overlapping
/// occurrences and `|d|` is the character count of the text.
pub fn vectorize_tfidf(text: &str, vocab: &NGramVocabulary) -> TfIdfVector {
    let text = vocab.prepare(text);
    let doc_char_count = text.chars().count();
    let (n_min, n_max) = vocab.n_range();

    let mut hits: Vec<u32> = grams_of(&text, n_min, n_max)
        .filter_map(|g| vocab.index_of(g))
        .collect();
    hits.sort_unstable();

    let n = vocab.corpus_size() as f64;
    let len = doc_char_count as f64;
    let mut entries = Vec::new();
    let mut k = 0;
    while k < hits.len() {
        let idx = hits[k];
        let run = hits[k..].iter().take_while(|&&h| h == idx).count();
        let df = vocab.doc_freq()[idx as usize] as f64;
        entries.push((idx, (run as f64 / len) * (n / df).ln()));
        k += run;
    }
    TfIdfVector {
        entries,
        doc_char_count,
    }
}
