//! Word list used by the misspelling filter.

use std::collections::HashSet;
use std::fs;
use std::io::Read;
use std::path::PathBuf;
use std::sync::OnceLock;

use flate2::read::GzDecoder;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

static BUNDLED_GZ: &[u8] = include_bytes!("../../data/en_words.txt.gz");
static BUNDLED: OnceLock<Dictionary> = OnceLock::new();

/// Where the misspelling filter gets its word list from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DictionarySource {
    #[default]
    Bundled,
    /// Plain-text word list, one word per line.
    File(PathBuf),
    /// Skip the check; every document scores a misspell ratio of 0.
    Disabled,
}

#[derive(Debug, Clone)]
pub struct Dictionary {
    words: HashSet<String>,
}

impl Dictionary {
    pub fn from_words<I, S>(words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        Dictionary {
            words: words
                .into_iter()
                .map(|w| w.as_ref().trim().to_lowercase())
                .filter(|w| !w.is_empty())
                .collect(),
        }
    }

    /// The bundled English list, decompressed once per process.
    pub fn bundled() -> &'static Dictionary {
        BUNDLED.get_or_init(|| {
            let mut text = String::new();
            GzDecoder::new(BUNDLED_GZ)
                .read_to_string(&mut text)
                .expect("bundled word list is valid gzip");
            Dictionary::from_words(text.lines())
        })
    }

    pub fn load(source: &DictionarySource) -> Result<Option<Dictionary>> {
        match source {
            DictionarySource::Bundled => Ok(Some(Dictionary::bundled().clone())),
            DictionarySource::Disabled => Ok(None),
            DictionarySource::File(path) => {
                let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
                Ok(Some(Dictionary::from_words(text.lines())))
            }
        }
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Membership for an already normalized token (lowercase, outer
    /// punctuation stripped). Possessive `'s` and hyphenated compounds whose
    /// parts are all known also count as known.
    pub fn knows(&self, token: &str) -> bool {
        if self.words.contains(token) {
            return true;
        }
        if let Some(base) = token.strip_suffix("'s") {
            if self.words.contains(base) {
                return true;
            }
        }
        if token.contains(['-', '\u{2014}', '\u{2013}']) {
            let mut parts = token
                .split(['-', '\u{2014}', '\u{2013}'])
                .filter(|p| !p.is_empty())
                .peekable();
            return parts.peek().is_some() && parts.all(|p| self.knows(p));
        }
        false
    }
}
