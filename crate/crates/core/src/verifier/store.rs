//! Store file: a JSON envelope
//! `{"version":1,"metric":"cosine","alpha":…,"vocab_hash":"…","same":[…],"diff":[…],"checksum":"…"}`
//! with an optional `build_timestamp`. The checksum is SHA-256 over the
//! canonical JSON serialization of every other field, so any edited byte is
//! caught on load.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{DistanceDistribution, StoreMeta};
use crate::distance::Metric;
use crate::{Error, Result};

pub const STORE_VERSION: u64 = 1;

#[derive(Debug, Clone, PartialEq)]
pub enum StoreWarning {
    /// The store was built with a different n-gram vocabulary than the one
    /// it is being used with.
    VocabularyMismatch { store: String, active: String },
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StoreFile {
    version: u64,
    metric: Metric,
    alpha: f64,
    vocab_hash: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    build_timestamp: Option<u64>,
    same: Vec<f64>,
    diff: Vec<f64>,
    checksum: String,
}

#[derive(Serialize)]
struct Canonical<'a> {
    version: u64,
    metric: Metric,
    alpha: f64,
    vocab_hash: &'a str,
    build_timestamp: Option<u64>,
    same: &'a [f64],
    diff: &'a [f64],
}

fn checksum(c: &Canonical<'_>) -> String {
    let bytes = serde_json::to_vec(c).expect("canonical store serializes");
    hex::encode(Sha256::digest(&bytes))
}

impl DistanceDistribution {
    pub fn to_bytes(&self) -> Vec<u8> {
        let canonical = Canonical {
            version: STORE_VERSION,
            metric: self.metric,
            alpha: self.meta.alpha,
            vocab_hash: &self.meta.vocab_hash,
            build_timestamp: self.meta.build_timestamp,
            same: &self.same,
            diff: &self.diff,
        };
        let file = StoreFile {
            version: STORE_VERSION,
            metric: self.metric,
            alpha: self.meta.alpha,
            vocab_hash: self.meta.vocab_hash.clone(),
            build_timestamp: self.meta.build_timestamp,
            checksum: checksum(&canonical),
            same: self.same.clone(),
            diff: self.diff.clone(),
        };
        serde_json::to_vec(&file).expect("store serializes")
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let value: serde_json::Value =
            serde_json::from_slice(bytes).map_err(|e| Error::CorruptStore(format!("unreadable envelope: {e}")))?;
        let version = value
            .get("version")
            .and_then(|v| v.as_u64())
            .ok_or_else(|| Error::CorruptStore("missing version".into()))?;
        if version != STORE_VERSION {
            return Err(Error::VersionMismatch {
                found: version,
                expected: STORE_VERSION,
            });
        }
        let file: StoreFile =
            serde_json::from_value(value).map_err(|e| Error::CorruptStore(format!("bad envelope: {e}")))?;
        let expected = checksum(&Canonical {
            version: file.version,
            metric: file.metric,
            alpha: file.alpha,
            vocab_hash: &file.vocab_hash,
            build_timestamp: file.build_timestamp,
            same: &file.same,
            diff: &file.diff,
        });
        if expected != file.checksum {
            return Err(Error::CorruptStore("checksum mismatch".into()));
        }
        for list in [&file.same, &file.diff] {
            if list.windows(2).any(|w| w[0] > w[1]) {
                return Err(Error::CorruptStore("distances not ascending".into()));
            }
        }
        DistanceDistribution::from_distances(
            file.same,
            file.diff,
            file.metric,
            StoreMeta {
                vocab_hash: file.vocab_hash,
                alpha: file.alpha,
                build_timestamp: file.build_timestamp,
            },
        )
        .map_err(|e| Error::CorruptStore(e.to_string()))
    }

    /// Compares the recorded vocabulary hash against the one in use.
    pub fn check_vocabulary(&self, active_hash: &str) -> Vec<StoreWarning> {
        if self.meta.vocab_hash == active_hash {
            Vec::new()
        } else {
            vec![StoreWarning::VocabularyMismatch {
                store: self.meta.vocab_hash.clone(),
                active: active_hash.to_string(),
            }]
        }
    }
}

pub fn save_store(dist: &DistanceDistribution, path: &Path) -> Result<()> {
    fs::write(path, dist.to_bytes()).map_err(|e| Error::io(path, e))
}

pub fn load_store(path: &Path) -> Result<DistanceDistribution> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    DistanceDistribution::from_bytes(&bytes)
}
