use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::text::normalized_tokens;
use crate::{Error, Result};

/// Marks whose rate per 1,000 characters goes into a profile.
pub const PUNCTUATION_MARKS: [char; 10] = ['.', ',', ';', ':', '!', '?', '\u{2014}', '(', ')', '"'];

const TOP_BIGRAMS: usize = 20;

/// Statistical summary of an author's writing. The field set is a concrete
/// choice: sentence-length mean and spread, punctuation rates, the most
/// frequent word bigrams and the type/token ratio.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StyleProfile {
    pub avg_sentence_words: f64,
    pub sentence_words_std: f64,
    /// Mark → occurrences per 1,000 characters.
    pub punctuation_ratios: BTreeMap<String, f64>,
    /// Sorted by descending count, then lexicographically.
    pub top_bigrams: Vec<((String, String), u64)>,
    pub type_token_ratio: f64,
}

/// Sentences are maximal spans ending in `.`, `!` or `?` followed by
/// whitespace; trailing text without such an ending is a final sentence.
pub fn sentences(text: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut start = 0;
    let mut chars = text.char_indices().peekable();
    while let Some((_, c)) = chars.next() {
        if matches!(c, '.' | '!' | '?') {
            if let Some(&(j, next)) = chars.peek() {
                if next.is_whitespace() {
                    out.push(&text[start..j]);
                    start = j;
                }
            }
        }
    }
    out.push(&text[start..]);
    out.into_iter().map(str::trim).filter(|s| !s.is_empty()).collect()
}

pub fn extract_style_profile(text: &str) -> Result<StyleProfile> {
    let sents = sentences(text);
    if sents.is_empty() {
        return Err(Error::EmptyDocument("profile source".into()));
    }

    let lengths: Vec<f64> = sents.iter().map(|s| s.split_whitespace().count() as f64).collect();
    let n = lengths.len() as f64;
    let avg = lengths.iter().sum::<f64>() / n;
    let var = lengths.iter().map(|l| (l - avg).powi(2)).sum::<f64>() / n;

    let total_chars = text.chars().count() as f64;
    let punctuation_ratios = PUNCTUATION_MARKS
        .iter()
        .map(|&m| {
            let count = text.chars().filter(|&c| c == m).count() as f64;
            (m.to_string(), 1000.0 * count / total_chars)
        })
        .collect();

    let mut bigrams: HashMap<(String, String), u64> = HashMap::new();
    let mut types = HashSet::new();
    let mut tokens = 0usize;
    for s in &sents {
        let words: Vec<String> = normalized_tokens(s).collect();
        tokens += words.len();
        for w in words.windows(2) {
            *bigrams.entry((w[0].clone(), w[1].clone())).or_default() += 1;
        }
        types.extend(words);
    }
    let mut top_bigrams: Vec<_> = bigrams.into_iter().collect();
    top_bigrams.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    top_bigrams.truncate(TOP_BIGRAMS);

    Ok(StyleProfile {
        avg_sentence_words: avg,
        sentence_words_std: var.sqrt(),
        punctuation_ratios,
        top_bigrams,
        type_token_ratio: if tokens == 0 { 0.0 } else { types.len() as f64 / tokens as f64 },
    })
}

impl StyleProfile {
    /// Fixed plain-text rendering embedded in zero-shot prompts.
    pub fn to_prompt_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "Average sentence length: {:.1} words", self.avg_sentence_words);
        let _ = writeln!(out, "Sentence length standard deviation: {:.1} words", self.sentence_words_std);
        let _ = writeln!(out, "Type/token ratio: {:.3}", self.type_token_ratio);
        let _ = writeln!(out, "Punctuation per 1,000 characters:");
        for mark in PUNCTUATION_MARKS {
            let rate = self.punctuation_ratios.get(&mark.to_string()).copied().unwrap_or(0.0);
            let _ = writeln!(out, "  {mark}  {rate:.2}");
        }
        let _ = writeln!(out, "Most common word pairs:");
        for ((a, b), count) in &self.top_bigrams {
            let _ = writeln!(out, "  \"{a} {b}\" ({count})");
        }
        out
    }
}
