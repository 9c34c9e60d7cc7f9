use std::collections::HashMap;
use std::fs;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const EMBEDDING_DIM: usize = 384;

/// A mean-pooled sentence embedding, always [`EMBEDDING_DIM`] finite values.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingVector(Vec<f64>);

impl EmbeddingVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() != EMBEDDING_DIM {
            return Err(Error::malformed(
                "embedding",
                format!("expected {EMBEDDING_DIM} values, got {}", values.len()),
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("embedding".into()));
        }
        Ok(EmbeddingVector(values))
    }

    pub fn zeros() -> Self {
        EmbeddingVector(vec![0.0; EMBEDDING_DIM])
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }
}

/// One line of the embedding interchange file:
/// `{"id": "<doc_id>#<head|tail>", "dim": 384, "vec": [...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EmbeddingRecord {
    pub id: String,
    pub dim: usize,
    pub vec: Vec<f64>,
}

/// Reads the interchange file into a map keyed by id. Any record with the
/// wrong dimension, a mismatched `dim` field or a non-finite value is an error,
/// as is a repeated id.
pub fn load_embeddings(path: &Path) -> Result<HashMap<String, EmbeddingVector>> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = HashMap::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let location = || format!("{}:{}", path.display(), i + 1);
        let record: EmbeddingRecord =
            serde_json::from_str(&line).map_err(|e| Error::malformed(location(), e))?;
        if record.dim != EMBEDDING_DIM || record.vec.len() != EMBEDDING_DIM {
            return Err(Error::malformed(
                location(),
                format!(
                    "record `{}` declares dim {} with {} values, expected {EMBEDDING_DIM}",
                    record.id,
                    record.dim,
                    record.vec.len()
                ),
            ));
        }
        if record.vec.iter().any(|v| !v.is_finite()) {
            return Err(Error::malformed(location(), format!("record `{}` has a non-finite value", record.id)));
        }
        if out.contains_key(&record.id) {
            return Err(Error::DuplicateId(record.id));
        }
        out.insert(record.id, EmbeddingVector(record.vec));
    }
    Ok(out)
}

/// Serializes records in the interchange format, preserving order.
pub fn write_embeddings<'a, I>(records: I) -> Vec<u8>
where
    I: IntoIterator<Item = (&'a str, &'a EmbeddingVector)>,
{
    let records: Vec<EmbeddingRecord> = records
        .into_iter()
        .map(|(id, v)| EmbeddingRecord {
            id: id.to_string(),
            dim: EMBEDDING_DIM,
            vec: v.0.clone(),
        })
        .collect();
    crate::io::to_jsonl(&records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn record(id: &str, n: usize) -> String {
        let vec: Vec<f64> = (0..n).map(|i| i as f64 * 0.001).collect();
        serde_json::to_string(&EmbeddingRecord {
            id: id.into(),
            dim: n,
            vec,
        })
        .unwrap()
    }

    fn load_str(contents: &str) -> Result<HashMap<String, EmbeddingVector>> {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("emb.jsonl");
        fs::write(&path, contents).unwrap();
        load_embeddings(&path)
    }

    #[test]
    fn wrong_dimension() {
        let err = load_str(&record("d#head", 383)).unwrap_err();
        assert!(matches!(err, Error::MalformedRecord { .. }));
    }

    #[test]
    fn duplicate_ids() {
        let contents = format!("{}\n{}\n", record("d#head", 384), record("d#head", 384));
        assert!(matches!(load_str(&contents), Err(Error::DuplicateId(id)) if id == "d#head"));
    }

    #[test]
    fn empty_file() {
        assert!(load_str("").unwrap().is_empty());
    }

    #[test]
    fn non_finite_is_malformed() {
        let line = record("x", 384).replace("0.001", "NaN");
        assert!(matches!(load_str(&line), Err(Error::MalformedRecord { .. })));
    }

    proptest! {
        #[test]
        fn round_trips_bit_exactly(vals in prop::collection::vec(-1e6f64..1e6, EMBEDDING_DIM)) {
            let v = EmbeddingVector::new(vals).unwrap();
            let bytes = write_embeddings([("a#head", &v)]);
            let map = load_str(std::str::from_utf8(&bytes).unwrap()).unwrap();
            let back = &map["a#head"];
            for (x, y) in back.values().iter().zip(v.values()) {
                prop_assert_eq!(x.to_bits(), y.to_bits());
            }
        }
    }
}
