//! Training-free authorship verification.
//!
//! Two texts are compared through a fused style vector (character 3–5-gram
//! TF-IDF plus an externally computed sentence embedding). The distance between
//! the vectors is located inside two stored empirical distributions, one of
//! same-author distances and one of different-author distances, and the pair
//! is labelled by whichever distribution claims it more strongly. Nothing is
//! fitted: a "model" is just the two sorted distance lists.
//!
//! Around the verifier sit the supporting stages:
//!
//! - [`corpus`]: cleaning filters, head/tail segmentation, labelled pair sets
//! - [`features`]: n-gram vocabulary, TF-IDF, embedding ingest, fusion
//! - [`distance`]: cosine and Euclidean distance over fused vectors
//! - [`verifier`]: distribution store, scoring and classification
//! - [`evaluation`]: accuracy, F1, ROC AUC, confusion matrix, McNemar
//! - [`detection`]: perplexity from token log-probabilities
//! - [`imitation`]: style-imitation prompts, generation, scoring
//!
//! ```
//! use styloverify::verifier::{DistanceDistribution, Label, StoreMeta};
//! use styloverify::distance::Metric;
//!
//! let dist = DistanceDistribution::from_distances(
//!     vec![0.2, 0.25, 0.3],
//!     vec![0.6, 0.65, 0.7],
//!     Metric::Cosine,
//!     StoreMeta::default(),
//! )?;
//! let verdict = dist.verdict(0.25)?;
//! assert_eq!(verdict.predicted, Label::SameAuthor);
//! assert_eq!(verdict.confidence, 1.0);
//! # Ok::<(), styloverify::Error>(())
//! ```

pub mod cli;
pub mod config;
pub mod corpus;
pub mod detection;
pub mod distance;
pub mod evaluation;
pub mod features;
pub mod imitation;
pub mod io;
pub mod rng;
pub mod text;
pub mod verifier;

mod error;

pub use error::{Error, ErrorCategory, Result};
