use std::borrow::Cow;
use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct VocabularyOptions {
    pub n_min: usize,
    pub n_max: usize,
    pub max_grams: usize,
    pub lowercase: bool,
}

impl Default for VocabularyOptions {
    fn default() -> Self {
        VocabularyOptions {
            n_min: 3,
            n_max: 5,
            max_grams: 10_000,
            lowercase: true,
        }
    }
}

/// The selected character n-grams in rank order (descending document
/// frequency, ties lexicographic) with their document frequencies.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "VocabularyFile", into = "VocabularyFile")]
pub struct NGramVocabulary {
    n_min: usize,
    n_max: usize,
    corpus_size: usize,
    lowercase: bool,
    grams: Vec<String>,
    doc_freq: Vec<u32>,
    index: HashMap<String, u32>,
}

#[derive(Serialize, Deserialize)]
struct VocabularyFile {
    n_min: usize,
    n_max: usize,
    #[serde(rename = "N")]
    corpus_size: usize,
    grams: Vec<String>,
    doc_freq: Vec<u32>,
    #[serde(default = "yes", skip_serializing_if = "is_true")]
    lowercase: bool,
}

fn yes() -> bool {
    true
}

fn is_true(b: &bool) -> bool {
    *b
}

impl TryFrom<VocabularyFile> for NGramVocabulary {
    type Error = String;

    fn try_from(f: VocabularyFile) -> std::result::Result<Self, String> {
        if f.grams.len() != f.doc_freq.len() {
            return Err("grams and doc_freq differ in length".into());
        }
        if f.n_min == 0 || f.n_min > f.n_max {
            return Err(format!("invalid n-gram range {}..={}", f.n_min, f.n_max));
        }
        for (g, &df) in f.grams.iter().zip(&f.doc_freq) {
            let len = g.chars().count();
            if len < f.n_min || len > f.n_max {
                return Err(format!("gram {g:?} has length {len}"));
            }
            if df == 0 || df as usize > f.corpus_size {
                return Err(format!("gram {g:?} has document frequency {df} with N = {}", f.corpus_size));
            }
        }
        NGramVocabulary::from_parts(f.n_min, f.n_max, f.corpus_size, f.lowercase, f.grams, f.doc_freq)
    }
}

impl From<NGramVocabulary> for VocabularyFile {
    fn from(v: NGramVocabulary) -> Self {
        VocabularyFile {
            n_min: v.n_min,
            n_max: v.n_max,
            corpus_size: v.corpus_size,
            grams: v.grams,
            doc_freq: v.doc_freq,
            lowercase: v.lowercase,
        }
    }
}

impl NGramVocabulary {
    fn from_parts(
        n_min: usize,
        n_max: usize,
        corpus_size: usize,
        lowercase: bool,
        grams: Vec<String>,
        doc_freq: Vec<u32>,
    ) -> std::result::Result<Self, String> {
        let mut index = HashMap::with_capacity(grams.len());
        for (i, g) in grams.iter().enumerate() {
            if index.insert(g.clone(), i as u32).is_some() {
                return Err(format!("duplicate gram {g:?}"));
            }
        }
        Ok(NGramVocabulary {
            n_min,
            n_max,
            corpus_size,
            lowercase,
            grams,
            doc_freq,
            index,
        })
    }

    /// Builds a vocabulary from explicit grams and document frequencies, in
    /// the given order.
    pub fn from_grams(
        entries: Vec<(String, u32)>,
        corpus_size: usize,
        options: VocabularyOptions,
    ) -> Result<Self> {
        let (grams, doc_freq) = entries.into_iter().unzip();
        VocabularyFile {
            n_min: options.n_min,
            n_max: options.n_max,
            corpus_size,
            grams,
            doc_freq,
            lowercase: options.lowercase,
        }
        .try_into()
        .map_err(|e| Error::malformed("vocabulary", e))
    }

    pub fn len(&self) -> usize {
        self.grams.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grams.is_empty()
    }

    pub fn corpus_size(&self) -> usize {
        self.corpus_size
    }

    pub fn n_range(&self) -> (usize, usize) {
        (self.n_min, self.n_max)
    }

    pub fn lowercase(&self) -> bool {
        self.lowercase
    }

    pub fn grams(&self) -> &[String] {
        &self.grams
    }

    pub fn doc_freq(&self) -> &[u32] {
        &self.doc_freq
    }

    pub fn index_of(&self, gram: &str) -> Option<u32> {
        self.index.get(gram).copied()
    }

    pub(crate) fn prepare<'a>(&self, text: &'a str) -> Cow<'a, str> {
        if self.lowercase {
            Cow::Owned(text.to_lowercase())
        } else {
            Cow::Borrowed(text)
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("vocabulary serializes")
    }

    /// SHA-256 of the canonical JSON form, hex encoded. Stores record it so a
    /// verifier can notice when it is paired with a different vocabulary.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_json().as_bytes()))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::malformed(path.display().to_string(), e))
    }
}

/// Every character n-gram of `text` for `n` in `n_min..=n_max`, overlapping,
/// whitespace and punctuation included.
pub fn grams_of(text: &str, n_min: usize, n_max: usize) -> impl Iterator<Item = &str> {
    let bounds: Vec<usize> = text
        .char_indices()
        .map(|(i, _)| i)
        .chain(std::iter::once(text.len()))
        .collect();
    let chars = bounds.len() - 1;
    (n_min..=n_max).flat_map(move |n| {
        let bounds = bounds.clone();
        (0..(chars + 1).saturating_sub(n)).map(move |k| (bounds[k], bounds[k + n]))
    })
    .map(move |(s, e)| &text[s..e])
}

/// [`fit_vocabulary_with`] at the default 3–5 gram range, lowercased.
pub fn fit_vocabulary<S: AsRef<str> + Sync>(texts: &[S], max_grams: usize) -> Result<NGramVocabulary> {
    fit_vocabulary_with(
        texts,
        VocabularyOptions {
            max_grams,
            ..Default::default()
        },
    )
}

/// Counts document frequencies of all n-grams in parallel and keeps the
/// `max_grams` most frequent (ties lexicographic). The result does not depend
/// on thread count.
pub fn fit_vocabulary_with<S: AsRef<str> + Sync>(
    texts: &[S],
    options: VocabularyOptions,
) -> Result<NGramVocabulary> {
    if texts.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    if options.n_min == 0 || options.n_min > options.n_max {
        return Err(Error::InvalidConfig(format!(
            "invalid n-gram range {}..={}",
            options.n_min, options.n_max
        )));
    }
    let doc_freq: HashMap<String, u32> = texts
        .par_iter()
        .fold(HashMap::new, |mut acc: HashMap<String, u32>, text| {
            let text = if options.lowercase {
                Cow::Owned(text.as_ref().to_lowercase())
            } else {
                Cow::Borrowed(text.as_ref())
            };
            let distinct: HashSet<&str> = grams_of(&text, options.n_min, options.n_max).collect();
            for g in distinct {
                match acc.get_mut(g) {
                    Some(c) => *c += 1,
                    None => {
                        acc.insert(g.to_string(), 1);
                    }
                }
            }
            acc
        })
        .reduce(HashMap::new, |a, b| {
            let (mut big, small) = if a.len() >= b.len() { (a, b) } else { (b, a) };
            for (g, c) in small {
                *big.entry(g).or_default() += c;
            }
            big
        });

    let mut ranked: Vec<(String, u32)> = doc_freq.into_iter().collect();
    let by_rank = |a: &(String, u32), b: &(String, u32)| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0));
    if ranked.len() > options.max_grams {
        if options.max_grams > 0 {
            ranked.select_nth_unstable_by(options.max_grams - 1, by_rank);
        }
        ranked.truncate(options.max_grams);
    }
    ranked.sort_unstable_by(by_rank);
    NGramVocabulary::from_grams(ranked, texts.len(), options)
}
