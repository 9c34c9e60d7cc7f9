use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::generate::GenerationRecord;
use super::prompt::Strategy;
use crate::corpus::{Cleaner, Label, Position, RawDocument, Segment};
use crate::features::{Featurizer, StyleVector};
use crate::verifier::{DistanceDistribution, Verdict};
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct ScoreOptions {
    /// Which segment of the source document a generation is compared with.
    pub reference: Position,
    /// When set, generations rejected by this cleaner are counted but not scored.
    pub reclean: Option<Cleaner>,
}

impl Default for ScoreOptions {
    fn default() -> Self {
        ScoreOptions {
            reference: Position::Tail,
            reclean: None,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImitationCell {
    /// Generations that reached the verifier.
    pub n: usize,
    /// Of those, the ones judged same-author.
    pub matched: usize,
    /// Generations dropped by re-cleaning.
    pub rejected: usize,
}

impl ImitationCell {
    /// Style-match accuracy; `None` for an empty cell.
    pub fn accuracy(&self) -> Option<f64> {
        (self.n > 0).then(|| self.matched as f64 / self.n as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredGeneration {
    pub source_doc_id: String,
    pub strategy: Strategy,
    pub model_tag: String,
    /// `None` when the generation was rejected by re-cleaning.
    pub verdict: Option<Verdict>,
}

/// Match accuracy per model and strategy.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ImitationTable {
    pub cells: BTreeMap<String, BTreeMap<Strategy, ImitationCell>>,
    pub scored: Vec<ScoredGeneration>,
}

impl ImitationTable {
    pub fn cell(&self, model_tag: &str, strategy: Strategy) -> Option<&ImitationCell> {
        self.cells.get(model_tag)?.get(&strategy)
    }

    /// One row per model, one column per strategy; empty cells stay blank.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("model_tag");
        for s in Strategy::ALL {
            out.push(',');
            out.push_str(s.as_str());
        }
        out.push('\n');
        for (model, row) in &self.cells {
            out.push_str(&csv_field(model));
            for s in Strategy::ALL {
                out.push(',');
                if let Some(acc) = row.get(&s).and_then(ImitationCell::accuracy) {
                    let _ = write!(out, "{acc:.4}");
                }
            }
            out.push('\n');
        }
        out
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Embedding id under which a generated text is looked up.
pub fn generation_id(record: &GenerationRecord) -> String {
    format!("{}#gen#{}#{}", record.source_doc_id, record.strategy, record.model_tag)
}

/// Classifies every (reference segment, generated text) pair with `store`.
pub fn score_imitation(
    records: &[GenerationRecord],
    originals: &[Segment],
    featurizer: &Featurizer,
    store: &DistanceDistribution,
    options: &ScoreOptions,
) -> Result<ImitationTable> {
    let references: HashMap<&str, &Segment> = originals
        .iter()
        .filter(|s| s.position == options.reference)
        .map(|s| (s.doc_id.as_str(), s))
        .collect();

    let mut needed: Vec<&str> = records.iter().map(|r| r.source_doc_id.as_str()).collect();
    needed.sort_unstable();
    needed.dedup();
    let ref_vectors: HashMap<&str, StyleVector> = needed
        .par_iter()
        .map(|&doc| {
            let seg = references.get(doc).ok_or_else(|| {
                Error::InsufficientCorpus(format!("no {} segment for source document `{doc}`", options.reference))
            })?;
            Ok((doc, featurizer.vectorize(&seg.id(), &seg.text)?))
        })
        .collect::<Result<_>>()?;

    let scored: Vec<ScoredGeneration> = records
        .par_iter()
        .map(|r| {
            let id = generation_id(r);
            let text = match &options.reclean {
                Some(cleaner) => {
                    let cleaned = cleaner.clean(&RawDocument::new(id.clone(), r.text.clone()))?;
                    if !cleaned.report.accepted {
                        return Ok(None);
                    }
                    Some(cleaned.text)
                }
                None => None,
            };
            let generated = featurizer.vectorize(&id, text.as_deref().unwrap_or(&r.text))?;
            store.classify(&ref_vectors[r.source_doc_id.as_str()], &generated).map(Some)
        })
        .zip(records.par_iter())
        .map(|(verdict, r)| {
            Ok(ScoredGeneration {
                source_doc_id: r.source_doc_id.clone(),
                strategy: r.strategy,
                model_tag: r.model_tag.clone(),
                verdict: verdict?,
            })
        })
        .collect::<Result<_>>()?;

    let mut table = ImitationTable::default();
    for s in &scored {
        let cell = table.cells.entry(s.model_tag.clone()).or_default().entry(s.strategy).or_default();
        match &s.verdict {
            Some(v) => {
                cell.n += 1;
                if v.predicted == Label::SameAuthor {
                    cell.matched += 1;
                }
            }
            None => cell.rejected += 1,
        }
    }
    table.scored = scored;
    Ok(table)
}
