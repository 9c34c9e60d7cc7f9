//! Run configuration.
//!
//! A run is described by one TOML file; command-line flags override the
//! corresponding keys. Every key is optional and falls back to the default
//! shown here:
//!
//! ```toml
//! seed = 7                  # required by `pairs` and `imitate`
//! block_words = 500
//! max_grams = 10000
//! alpha = 1.0               # 0 disables the embedding block
//! metric = "cosine"         # or "euclidean"
//!
//! [paths]
//! corpus = "corpus/"        # directory of .txt files or a JSONL file
//! embeddings = "emb.jsonl"
//! store = "store.json"
//! vocab = "vocab.json"
//! outputs = "out/"
//!
//! [cleaning]
//! min_words = 500
//! max_numeric_ratio = 0.10
//! max_misspell_ratio = 0.05
//! max_token_type_ratio = 0.10
//! max_symbol_ratio = 0.05
//! dictionary = "bundled"    # or "disabled", or { file = "words.txt" }
//!
//! [pairs]
//! n_positive = 50000
//! n_negative = 50000
//! holdout_fraction = 0.0
//! holdout_positive = 0
//! holdout_negative = 0
//!
//! [imitation]
//! reclean = false
//! min_half_words = 50
//! sample = 0                # 0 = every document
//!
//! [endpoint]                # optional
//! url = "http://localhost:8000/generate"
//! model_tag = "my-model"
//! retries = 2
//! timeout_secs = 120
//! max_in_flight = 4
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::corpus::CleaningConfig;
use crate::distance::Metric;
use crate::imitation::EndpointConfig;
use crate::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    pub corpus: Option<PathBuf>,
    pub embeddings: Option<PathBuf>,
    pub store: Option<PathBuf>,
    pub vocab: Option<PathBuf>,
    pub outputs: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PairsConfig {
    pub n_positive: usize,
    pub n_negative: usize,
    /// Share of documents set aside before construction pairs are drawn.
    pub holdout_fraction: f64,
    pub holdout_positive: usize,
    pub holdout_negative: usize,
}

impl Default for PairsConfig {
    fn default() -> Self {
        PairsConfig {
            n_positive: 50_000,
            n_negative: 50_000,
            holdout_fraction: 0.0,
            holdout_positive: 0,
            holdout_negative: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ImitationConfig {
    /// Run generated texts through the cleaning filters before scoring.
    pub reclean: bool,
    pub min_half_words: usize,
    /// Number of source documents to sample; 0 uses all of them.
    pub sample: usize,
}

impl Default for ImitationConfig {
    fn default() -> Self {
        ImitationConfig {
            reclean: false,
            min_half_words: 50,
            sample: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub block_words: usize,
    pub max_grams: usize,
    pub alpha: f64,
    pub metric: Metric,
    pub paths: Paths,
    pub cleaning: CleaningConfig,
    pub pairs: PairsConfig,
    pub imitation: ImitationConfig,
    pub endpoint: Option<EndpointConfig>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: None,
            block_words: 500,
            max_grams: 10_000,
            alpha: 1.0,
            metric: Metric::Cosine,
            paths: Paths::default(),
            cleaning: CleaningConfig::default(),
            pairs: PairsConfig::default(),
            imitation: ImitationConfig::default(),
            endpoint: None,
        }
    }
}

impl RunConfig {
    pub fn from_toml(source: &str) -> Result<Self> {
        toml::from_str(source).map_err(|e| Error::InvalidConfig(e.message().to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let source = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&source).map_err(|e| match e {
            Error::InvalidConfig(msg) => Error::InvalidConfig(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.cleaning.validate()?;
        if self.block_words == 0 {
            return Err(Error::InvalidConfig("block_words must be at least 1".into()));
        }
        if self.max_grams == 0 {
            return Err(Error::InvalidConfig("max_grams must be at least 1".into()));
        }
        if !self.alpha.is_finite() || self.alpha < 0.0 {
            return Err(Error::InvalidConfig(format!("alpha = {} must be finite and >= 0", self.alpha)));
        }
        if !(0.0..=1.0).contains(&self.pairs.holdout_fraction) {
            return Err(Error::InvalidConfig(format!(
                "pairs.holdout_fraction = {} is outside [0, 1]",
                self.pairs.holdout_fraction
            )));
        }
        if self.imitation.min_half_words == 0 {
            return Err(Error::InvalidConfig("imitation.min_half_words must be at least 1".into()));
        }
        if let Some(endpoint) = &self.endpoint {
            endpoint.validate()?;
        }
        Ok(())
    }

    /// The seed, or a config error naming the step that needed it.
    pub fn require_seed(&self, step: &str) -> Result<u64> {
        self.seed
            .ok_or_else(|| Error::InvalidConfig(format!("`{step}` samples randomly and needs a seed (--seed or `seed =`)")))
    }
}
