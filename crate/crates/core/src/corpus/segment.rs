use std::fmt;

use serde::{Deserialize, Serialize};

use super::RawDocument;
use crate::text::word_spans;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Position {
    Head,
    Tail,
}

impl Position {
    pub fn as_str(self) -> &'static str {
        match self {
            Position::Head => "head",
            Position::Tail => "tail",
        }
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A block of consecutive words cut from the start or end of a document.
/// The text is a verbatim slice of the source, so internal line breaks and
/// spacing survive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub doc_id: String,
    pub position: Position,
    pub text: String,
    #[serde(default)]
    pub word_count: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub author_id: Option<String>,
}

impl Segment {
    /// Interchange id, `<doc_id>#<head|tail>`.
    pub fn id(&self) -> String {
        segment_id(&self.doc_id, self.position)
    }
}

pub fn segment_id(doc_id: &str, position: Position) -> String {
    format!("{doc_id}#{position}")
}

/// Splits a document into its first and last `block_words` words. Requires at
/// least `2 * block_words` words so the two blocks never share a word.
pub fn segment_document(doc: &RawDocument, block_words: usize) -> Result<(Segment, Segment)> {
    if block_words == 0 {
        return Err(Error::InvalidConfig("block_words must be positive".into()));
    }
    let spans = word_spans(&doc.text);
    let required = 2 * block_words;
    if spans.len() < required {
        return Err(Error::IneligibleDocument {
            doc_id: doc.id.clone(),
            words: spans.len(),
            required,
        });
    }
    let head = (spans[0].0, spans[block_words - 1].1);
    let tail = (spans[spans.len() - block_words].0, spans[spans.len() - 1].1);
    let make = |position, (s, e): (usize, usize)| Segment {
        doc_id: doc.id.clone(),
        position,
        text: doc.text[s..e].to_string(),
        word_count: block_words,
        author_id: doc.author_id.clone(),
    };
    Ok((make(Position::Head, head), make(Position::Tail, tail)))
}
