//! Distances between fused style vectors.
//!
//! Both metrics walk the sparse block by merge-join and the dense block by
//! index, always in ascending index order, so results are bit-reproducible
//! and symmetric in their arguments.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::features::StyleVector;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    #[default]
    Cosine,
    Euclidean,
}

impl Metric {
    pub fn distance(self, x: &StyleVector, y: &StyleVector) -> Result<f64> {
        match self {
            Metric::Cosine => cosine_distance(x, y),
            Metric::Euclidean => Ok(euclidean_distance(x, y)),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Cosine => "cosine",
            Metric::Euclidean => "euclidean",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cosine" => Ok(Metric::Cosine),
            "euclidean" => Ok(Metric::Euclidean),
            other => Err(Error::InvalidConfig(format!("unknown metric `{other}`"))),
        }
    }
}

fn sparse_dot(a: &[(u32, f64)], b: &[(u32, f64)]) -> f64 {
    let (mut i, mut j, mut acc) = (0, 0, 0.0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            Ordering::Less => i += 1,
            Ordering::Greater => j += 1,
            Ordering::Equal => {
                acc += a[i].1 * b[j].1;
                i += 1;
                j += 1;
            }
        }
    }
    acc
}

fn dense_dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn dot(x: &StyleVector, y: &StyleVector) -> f64 {
    sparse_dot(x.sparse_block(), y.sparse_block()) + dense_dot(x.dense_block(), y.dense_block())
}

/// `1 - x·y / (‖x‖‖y‖)`, clamped to `[0, 2]`. Fails on a zero-norm argument.
pub fn cosine_distance(x: &StyleVector, y: &StyleVector) -> Result<f64> {
    let nx = x.norm_squared();
    let ny = y.norm_squared();
    if nx == 0.0 || ny == 0.0 {
        return Err(Error::ZeroVector);
    }
    let sim = dot(x, y) / (nx.sqrt() * ny.sqrt());
    Ok((1.0 - sim).clamp(0.0, 2.0))
}

/// `‖x − y‖₂` over the concatenated blocks.
pub fn euclidean_distance(x: &StyleVector, y: &StyleVector) -> f64 {
    let (a, b) = (x.sparse_block(), y.sparse_block());
    let (mut i, mut j, mut acc) = (0, 0, 0.0);
    while i < a.len() || j < b.len() {
        let diff = match (a.get(i), b.get(j)) {
            (Some(p), Some(q)) if p.0 == q.0 => {
                i += 1;
                j += 1;
                p.1 - q.1
            }
            (Some(p), Some(q)) if p.0 < q.0 => {
                i += 1;
                p.1
            }
            (Some(p), None) => {
                i += 1;
                p.1
            }
            (_, Some(q)) => {
                j += 1;
                q.1
            }
            (None, None) => unreachable!(),
        };
        acc += diff * diff;
    }
    let (da, db) = (x.dense_block(), y.dense_block());
    for k in 0..da.len().max(db.len()) {
        let d = da.get(k).copied().unwrap_or(0.0) - db.get(k).copied().unwrap_or(0.0);
        acc += d * d;
    }
    acc.sqrt()
}
