//! Perplexity of texts from externally produced token log-probabilities.
//!
//! Log-probability files are JSONL. The first line is a header declaring the
//! logarithm base, which must be natural:
//!
//! ```text
//! {"log_base": "e"}
//! {"id": "essay-1", "scorer_tag": "gpt2", "logprobs": [-2.1, -0.4, ...]}
//! ```
//!
//! A record may repeat `"log_base"`; any value other than the header's is
//! rejected.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const NATURAL_LOG: &str = "e";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TokenLogProbs {
    pub id: String,
    #[serde(default)]
    pub scorer_tag: String,
    pub logprobs: Vec<f64>,
}

#[derive(Deserialize)]
struct Header {
    log_base: String,
}

#[derive(Deserialize)]
struct Record {
    id: String,
    #[serde(default)]
    scorer_tag: String,
    logprobs: Vec<f64>,
    #[serde(default)]
    log_base: Option<String>,
}

/// `exp(−mean(logprobs))`. The sum is compensated so long sequences keep
/// full precision.
pub fn perplexity(tlp: &TokenLogProbs) -> Result<f64> {
    check(tlp)?;
    let mean = neumaier_sum(&tlp.logprobs) / tlp.logprobs.len() as f64;
    Ok((-mean).exp())
}

fn neumaier_sum(values: &[f64]) -> f64 {
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for &v in values {
        let t = sum + v;
        comp += if sum.abs() >= v.abs() { (sum - t) + v } else { (v - t) + sum };
        sum = t;
    }
    sum + comp
}

fn check(tlp: &TokenLogProbs) -> Result<()> {
    if tlp.logprobs.is_empty() {
        return Err(Error::EmptySequence(tlp.id.clone()));
    }
    for &value in &tlp.logprobs {
        if value.is_nan() || value == f64::NEG_INFINITY {
            return Err(Error::NonFinite(format!("log-probability of `{}`", tlp.id)));
        }
        if value > 0.0 {
            return Err(Error::PositiveLogprob {
                id: tlp.id.clone(),
                value,
            });
        }
    }
    Ok(())
}

pub fn load_logprobs(path: &Path) -> Result<Vec<TokenLogProbs>> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut lines = BufReader::new(file)
        .lines()
        .enumerate()
        .filter(|(_, l)| l.as_ref().map_or(true, |l| !l.trim().is_empty()));
    let location = |i: usize| format!("{}:{}", path.display(), i + 1);

    let header: Header = match lines.next() {
        None => return Err(Error::malformed(location(0), "missing header line")),
        Some((i, line)) => {
            let line = line.map_err(|e| Error::io(path, e))?;
            serde_json::from_str(&line).map_err(|e| Error::malformed(location(i), format!("bad header: {e}")))?
        }
    };
    if header.log_base != NATURAL_LOG {
        return Err(Error::malformed(
            location(0),
            format!("log base `{}` is not supported, expected `{NATURAL_LOG}`", header.log_base),
        ));
    }

    let mut out = Vec::new();
    for (i, line) in lines {
        let line = line.map_err(|e| Error::io(path, e))?;
        let r: Record = serde_json::from_str(&line).map_err(|e| Error::malformed(location(i), e))?;
        if let Some(base) = r.log_base {
            if base != header.log_base {
                return Err(Error::MixedLogBase {
                    header: header.log_base,
                    record: base,
                    id: r.id,
                });
            }
        }
        let tlp = TokenLogProbs {
            id: r.id,
            scorer_tag: r.scorer_tag,
            logprobs: r.logprobs,
        };
        check(&tlp)?;
        out.push(tlp);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdRow {
    pub threshold: f64,
    /// Per group, the share of documents with perplexity at or below the
    /// threshold.
    pub fractions: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerplexityReport {
    /// group → document id → perplexity
    pub per_doc: BTreeMap<String, BTreeMap<String, f64>>,
    pub group_means: BTreeMap<String, f64>,
    /// Ascending by threshold.
    pub cdf_at: Vec<ThresholdRow>,
}

/// Perplexity per document, mean per group, and the fraction of each group at
/// or below every threshold.
pub fn detectability_report(
    groups: &BTreeMap<String, Vec<TokenLogProbs>>,
    thresholds: &[f64],
) -> Result<PerplexityReport> {
    if let Some(t) = thresholds.iter().find(|t| !t.is_finite()) {
        return Err(Error::NonFinite(format!("threshold {t}")));
    }
    let mut per_doc = BTreeMap::new();
    let mut group_means = BTreeMap::new();
    let mut sorted_ppl: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for (group, docs) in groups {
        if docs.is_empty() {
            return Err(Error::EmptyGroup(group.clone()));
        }
        let mut ppls = BTreeMap::new();
        let mut values = Vec::with_capacity(docs.len());
        for d in docs {
            let p = perplexity(d)?;
            if ppls.insert(d.id.clone(), p).is_some() {
                return Err(Error::DuplicateId(format!("{group}/{}", d.id)));
            }
            values.push(p);
        }
        group_means.insert(group.clone(), values.iter().sum::<f64>() / values.len() as f64);
        values.sort_by(f64::total_cmp);
        sorted_ppl.insert(group, values);
        per_doc.insert(group.clone(), ppls);
    }

    let mut ts = thresholds.to_vec();
    ts.sort_by(f64::total_cmp);
    ts.dedup();
    let cdf_at = ts
        .into_iter()
        .map(|threshold| ThresholdRow {
            threshold,
            fractions: sorted_ppl
                .iter()
                .map(|(g, v)| {
                    let at_or_below = v.partition_point(|&p| p <= threshold);
                    (g.to_string(), at_or_below as f64 / v.len() as f64)
                })
                .collect(),
        })
        .collect();

    Ok(PerplexityReport {
        per_doc,
        group_means,
        cdf_at,
    })
}

impl PerplexityReport {
    fn sorted_group(&self, group: &str) -> Vec<f64> {
        let mut v: Vec<f64> = self.per_doc[group].values().copied().collect();
        v.sort_by(f64::total_cmp);
        v
    }

    /// `group,bin_lo,bin_hi,count` over bins `[k·w, (k+1)·w)` shared by all
    /// groups, from 0 up to the largest perplexity.
    pub fn histogram_csv(&self, bin_width: f64) -> Result<String> {
        if !(bin_width.is_finite() && bin_width > 0.0) {
            return Err(Error::InvalidConfig(format!("bin width {bin_width} must be positive")));
        }
        let max = self
            .per_doc
            .values()
            .flat_map(|m| m.values())
            .fold(0.0f64, |a, &b| a.max(b));
        let bins = (max / bin_width).floor() as usize + 1;
        let mut out = String::from("group,bin_lo,bin_hi,count\n");
        for group in self.per_doc.keys() {
            let mut counts = vec![0u64; bins];
            for p in self.per_doc[group].values() {
                counts[((p / bin_width).floor() as usize).min(bins - 1)] += 1;
            }
            for (k, c) in counts.iter().enumerate() {
                let _ = writeln!(out, "{group},{},{},{c}", k as f64 * bin_width, (k + 1) as f64 * bin_width);
            }
        }
        Ok(out)
    }

    /// `group,perplexity,cdf`: the empirical CDF evaluated at every observed
    /// perplexity.
    pub fn cdf_csv(&self) -> String {
        let mut out = String::from("group,perplexity,cdf\n");
        for group in self.per_doc.keys() {
            let v = self.sorted_group(group);
            let n = v.len() as f64;
            let mut i = 0;
            while i < v.len() {
                let j = v[i..].iter().take_while(|&&x| x == v[i]).count() + i;
                let _ = writeln!(out, "{group},{},{}", v[i], j as f64 / n);
                i = j;
            }
        }
        out
    }
}
