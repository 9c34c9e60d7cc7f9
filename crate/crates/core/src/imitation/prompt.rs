use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::profile::{extract_style_profile, StyleProfile};
use crate::corpus::RawDocument;
use crate::text::word_spans;
use crate::{Error, Result};

/// System prompt shared by every strategy.
pub const SYSTEM_PREAMBLE: &str = "Output only the requested content. No prefaces, disclaimers, or explanations.";

const ESSAY_WORDS: WordRange = WordRange { min: 300, max: 500 };

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    ZeroShot,
    OneShot,
    FewShot,
    Completion,
}

impl Strategy {
    pub const ALL: [Strategy; 4] = [Strategy::ZeroShot, Strategy::OneShot, Strategy::FewShot, Strategy::Completion];

    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::ZeroShot => "zero_shot",
            Strategy::OneShot => "one_shot",
            Strategy::FewShot => "few_shot",
            Strategy::Completion => "completion",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Strategy::ALL
            .into_iter()
            .find(|st| st.as_str() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown strategy `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WordRange {
    pub min: usize,
    pub max: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Prompt {
    pub source_doc_id: String,
    pub strategy: Strategy,
    pub system_preamble: String,
    pub user_prompt: String,
    pub target_words: WordRange,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct PromptOptions {
    /// Completion needs at least twice this many words.
    pub min_half_words: usize,
}

impl Default for PromptOptions {
    fn default() -> Self {
        PromptOptions { min_half_words: 50 }
    }
}

/// Paragraphs are maximal runs of non-blank lines; blank lines separate them.
pub fn paragraphs(text: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut start: Option<usize> = None;
    let mut end = 0;
    let mut offset = 0;
    for line in text.split_inclusive('\n') {
        let line_start = offset;
        offset += line.len();
        if line.trim().is_empty() {
            if let Some(s) = start.take() {
                out.push(&text[s..end]);
            }
        } else {
            if start.is_none() {
                start = Some(line_start);
            }
            end = line_start + line.trim_end().len();
        }
    }
    if let Some(s) = start {
        out.push(&text[s..end]);
    }
    out
}

/// Indices of the `k` paragraphs with the most words (earlier paragraphs win
/// ties), returned in document order.
fn longest_paragraphs(paras: &[&str], k: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..paras.len()).collect();
    order.sort_by_key(|&i| std::cmp::Reverse(paras[i].split_whitespace().count()));
    order.truncate(k);
    order.sort_unstable();
    order
}

/// Builds the prompt for one (document, strategy) pair. Zero-shot uses
/// `profile` when given and derives it from the document otherwise. The output
/// is a pure function of its inputs.
pub fn make_prompt(
    doc: &RawDocument,
    strategy: Strategy,
    profile: Option<&StyleProfile>,
    options: &PromptOptions,
) -> Result<Prompt> {
    let (user_prompt, target_words) = match strategy {
        Strategy::ZeroShot => {
            let owned;
            let profile = match profile {
                Some(p) => p,
                None => {
                    owned = extract_style_profile(&doc.text)?;
                    &owned
                }
            };
            (
                format!(
                    "Write an essay of {} to {} words on any topic. Match the writing style described by this \
                     statistical profile of the author:\n\n{}",
                    ESSAY_WORDS.min,
                    ESSAY_WORDS.max,
                    profile.to_prompt_text()
                ),
                ESSAY_WORDS,
            )
        }
        Strategy::OneShot | Strategy::FewShot => {
            let needed = if strategy == Strategy::OneShot { 1 } else { 2 };
            let paras = paragraphs(&doc.text);
            if paras.len() < needed {
                return Err(Error::InsufficientParagraphs {
                    doc_id: doc.id.clone(),
                    strategy: strategy.as_str(),
                    needed,
                    found: paras.len(),
                });
            }
            let anchors = longest_paragraphs(&paras, needed);
            let body = if needed == 1 {
                format!(
                    "Here is a paragraph written by the target author:\n\n{}\n\n",
                    paras[anchors[0]]
                )
            } else {
                let mut body = String::from("Here are paragraphs written by the target author:\n\n");
                for (n, &i) in anchors.iter().enumerate() {
                    body.push_str(&format!("Paragraph {}:\n{}\n\n", n + 1, paras[i]));
                }
                body
            };
            (
                format!(
                    "{body}Write an essay of {} to {} words on a different topic, imitating this author's \
                     writing style.",
                    ESSAY_WORDS.min, ESSAY_WORDS.max
                ),
                ESSAY_WORDS,
            )
        }
        Strategy::Completion => {
            let spans = word_spans(&doc.text);
            let required = 2 * options.min_half_words.max(1);
            if spans.len() < required {
                return Err(Error::TooShortForCompletion {
                    doc_id: doc.id.clone(),
                    words: spans.len(),
                    required,
                });
            }
            let half = spans.len() / 2;
            let first = &doc.text[spans[0].0..spans[half - 1].1];
            let target = spans.len() - half;
            (
                format!(
                    "Continue the following text with a passage of similar length (about {target} words), in \
                     the same style, without repetition or explicit reference to the original passage.\n\n{first}"
                ),
                WordRange {
                    min: target,
                    max: target,
                },
            )
        }
    };
    Ok(Prompt {
        source_doc_id: doc.id.clone(),
        strategy,
        system_preamble: SYSTEM_PREAMBLE.to_string(),
        user_prompt,
        target_words,
    })
}
