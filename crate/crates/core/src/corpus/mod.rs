//! Corpus ingest, cleaning, segmentation and labelled pair construction.

mod clean;
mod dictionary;
mod pairs;
mod paratext;
mod segment;

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use clean::{clean_document, CleanedDocument, Cleaner, CleaningConfig, CleaningReport, RejectReason};
pub use dictionary::{Dictionary, DictionarySource};
pub use pairs::{build_pairs, build_pairs_with_rng, split_documents, Label, SegmentRef, TextPair};
pub use paratext::{strip_paratext, strip_paratext_with, ParatextRules};
pub use segment::{segment_document, segment_id, Position, Segment};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceDomain {
    Academic,
    Conversational,
    Synthetic,
    #[default]
    Other,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawDocument {
    pub id: String,
    pub text: String,
    #[serde(default)]
    pub source_domain: SourceDomain,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub author_id: Option<String>,
}

impl RawDocument {
    pub fn new(id: impl Into<String>, text: impl Into<String>) -> Self {
        RawDocument {
            id: id.into(),
            text: text.into(),
            source_domain: SourceDomain::Other,
            author_id: None,
        }
    }

    pub fn with_author(mut self, author: impl Into<String>) -> Self {
        self.author_id = Some(author.into());
        self
    }

    pub fn with_domain(mut self, domain: SourceDomain) -> Self {
        self.source_domain = domain;
        self
    }
}

/// Loads a corpus from a directory of `.txt` files (file stem = id, sorted by
/// file name) or from a JSONL file of [`RawDocument`] records.
pub fn load_corpus(path: &Path) -> Result<Vec<RawDocument>> {
    let docs = if path.is_dir() {
        let mut entries: Vec<_> = fs::read_dir(path)
            .map_err(|e| Error::io(path, e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|ext| ext == "txt"))
            .collect();
        entries.sort();
        entries
            .into_iter()
            .map(|p| {
                let text = fs::read_to_string(&p).map_err(|e| Error::io(&p, e))?;
                let id = p
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_default();
                Ok(RawDocument::new(id, text))
            })
            .collect::<Result<Vec<_>>>()?
    } else {
        crate::io::read_jsonl(path)?
    };
    validate_corpus(&docs)?;
    Ok(docs)
}

/// Checks corpus-level invariants: nonempty unique ids and nonempty texts.
pub fn validate_corpus(docs: &[RawDocument]) -> Result<()> {
    let mut seen = HashSet::with_capacity(docs.len());
    for doc in docs {
        if doc.id.is_empty() {
            return Err(Error::malformed("corpus", "document with empty id"));
        }
        if doc.text.trim().is_empty() {
            return Err(Error::EmptyDocument(doc.id.clone()));
        }
        if !seen.insert(doc.id.as_str()) {
            return Err(Error::DuplicateId(doc.id.clone()));
        }
    }
    Ok(())
}
