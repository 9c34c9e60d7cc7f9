use super::embedding::EmbeddingVector;
use super::tfidf::TfIdfVector;
use crate::{Error, Result};

/// A fused style vector: a sparse block (TF-IDF, indexed by vocabulary rank)
/// followed by a dense block (the embedding). Distances treat it as the
/// concatenation of both blocks; a dense block shorter than its partner is
/// padded with zeros, so an empty dense block is the zero block.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct StyleVector {
    pub(crate) sparse: Vec<(u32, f64)>,
    pub(crate) dense: Vec<f64>,
}

impl StyleVector {
    /// Builds a vector from raw blocks without normalization. Sparse entries
    /// must be strictly ascending by index.
    pub fn from_blocks(sparse: Vec<(u32, f64)>, dense: Vec<f64>) -> Result<Self> {
        if sparse.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(Error::malformed("style vector", "sparse indices not strictly ascending"));
        }
        if sparse.iter().any(|e| !e.1.is_finite()) || dense.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("style vector".into()));
        }
        Ok(StyleVector { sparse, dense })
    }

    pub fn dense(values: Vec<f64>) -> Result<Self> {
        Self::from_blocks(Vec::new(), values)
    }

    pub fn sparse_block(&self) -> &[(u32, f64)] {
        &self.sparse
    }

    pub fn dense_block(&self) -> &[f64] {
        &self.dense
    }

    pub fn scaled(&self, c: f64) -> StyleVector {
        StyleVector {
            sparse: self.sparse.iter().map(|&(i, w)| (i, w * c)).collect(),
            dense: self.dense.iter().map(|v| v * c).collect(),
        }
    }

    pub fn norm_squared(&self) -> f64 {
        let s: f64 = self.sparse.iter().map(|&(_, w)| w * w).sum();
        let d: f64 = self.dense.iter().map(|v| v * v).sum();
        s + d
    }
}

fn l2_norm<'a>(values: impl Iterator<Item = &'a f64>) -> f64 {
    values.map(|v| v * v).sum::<f64>().sqrt()
}

/// Normalizes each block to unit L2 norm (zero blocks stay zero) and scales the
/// embedding block by `alpha`. `None` stands for an all-zero embedding, which
/// is what an `alpha` of 0 produces anyway.
pub fn fuse(tfidf: &TfIdfVector, embedding: Option<&EmbeddingVector>, alpha: f64) -> Result<StyleVector> {
    if !alpha.is_finite() || alpha < 0.0 {
        return Err(Error::InvalidConfig(format!("fusion weight alpha = {alpha} must be finite and >= 0")));
    }
    if tfidf.entries.iter().any(|e| !e.1.is_finite()) {
        return Err(Error::NonFinite("tf-idf block".into()));
    }
    let sparse_norm = l2_norm(tfidf.entries.iter().map(|(_, w)| w));
    let sparse = if sparse_norm > 0.0 {
        tfidf.entries.iter().map(|&(i, w)| (i, w / sparse_norm)).collect()
    } else {
        tfidf.entries.iter().map(|&(i, _)| (i, 0.0)).collect()
    };

    let dense = match embedding {
        Some(e) if alpha > 0.0 => {
            let values = e.values();
            if values.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite("embedding block".into()));
            }
            let norm = l2_norm(values.iter());
            if norm > 0.0 {
                values.iter().map(|v| alpha * (v / norm)).collect()
            } else {
                vec![0.0; values.len()]
            }
        }
        _ => Vec::new(),
    };
    Ok(StyleVector { sparse, dense })
}
