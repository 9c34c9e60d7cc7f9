//! Verifier scoring over labelled pairs.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::verifier::{Label, Verdict};
use crate::{Error, Result};

/// Critical value of χ² with one degree of freedom at α = 0.05.
pub const CHI2_1DF_05: f64 = 3.841;

/// Counts with same-author as the positive class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub fp: u64,
    pub tn: u64,
}

impl ConfusionMatrix {
    pub fn record(&mut self, predicted: Label, truth: Label) {
        match (truth, predicted) {
            (Label::SameAuthor, Label::SameAuthor) => self.tp += 1,
            (Label::SameAuthor, Label::DifferentAuthor) => self.fn_ += 1,
            (Label::DifferentAuthor, Label::SameAuthor) => self.fp += 1,
            (Label::DifferentAuthor, Label::DifferentAuthor) => self.tn += 1,
        }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fn_ + self.fp + self.tn
    }

    pub fn accuracy(&self) -> f64 {
        let n = self.total();
        if n == 0 {
            0.0
        } else {
            (self.tp + self.tn) as f64 / n as f64
        }
    }

    /// `2tp / (2tp + fp + fn)`, 0 when the denominator is 0.
    pub fn f1(&self) -> f64 {
        let denom = 2 * self.tp + self.fp + self.fn_;
        if denom == 0 {
            0.0
        } else {
            (2 * self.tp) as f64 / denom as f64
        }
    }

    /// Share of different-author pairs judged same-author.
    pub fn false_positive_rate(&self) -> f64 {
        let neg = self.fp + self.tn;
        if neg == 0 {
            0.0
        } else {
            self.fp as f64 / neg as f64
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McNemarResult {
    pub n01: u64,
    pub n10: u64,
    pub chi2: f64,
    pub significant_at_05: bool,
}

impl McNemarResult {
    /// `(|n01 − n10| − 1)² / (n01 + n10)`; 0 and not significant without
    /// discordant pairs.
    pub fn from_counts(n01: u64, n10: u64) -> Self {
        let total = n01 + n10;
        if total == 0 {
            return McNemarResult {
                n01,
                n10,
                chi2: 0.0,
                significant_at_05: false,
            };
        }
        let diff = n01.abs_diff(n10) as f64 - 1.0;
        let chi2 = diff * diff / total as f64;
        McNemarResult {
            n01,
            n10,
            chi2,
            significant_at_05: chi2 > CHI2_1DF_05,
        }
    }
}

/// McNemar's paired test. `n01` counts pairs system A gets wrong and B gets
/// right, `n10` the reverse.
pub fn mcnemar(preds_a: &[Label], preds_b: &[Label], truth: &[Label]) -> Result<McNemarResult> {
    if preds_a.len() != truth.len() || preds_b.len() != truth.len() {
        return Err(Error::LengthMismatch(format!(
            "{} / {} predictions for {} labels",
            preds_a.len(),
            preds_b.len(),
            truth.len()
        )));
    }
    if truth.is_empty() {
        return Err(Error::EmptyInput);
    }
    let (mut n01, mut n10) = (0, 0);
    for ((a, b), y) in preds_a.iter().zip(preds_b).zip(truth) {
        match (a == y, b == y) {
            (false, true) => n01 += 1,
            (true, false) => n10 += 1,
            _ => {}
        }
    }
    Ok(McNemarResult::from_counts(n01, n10))
}

/// Mann–Whitney AUC: `[#(s⁺ > s⁻) + ½ #(s⁺ = s⁻)] / (|S⁺| |S⁻|)`, from the rank
/// sum of the positives with tied ranks averaged.
pub fn roc_auc(scores_pos: &[f64], scores_neg: &[f64]) -> Result<f64> {
    if scores_pos.is_empty() {
        return Err(Error::EmptyClass("positive"));
    }
    if scores_neg.is_empty() {
        return Err(Error::EmptyClass("negative"));
    }
    if scores_pos.iter().chain(scores_neg).any(|s| s.is_nan()) {
        return Err(Error::NonFinite("score".into()));
    }
    let mut all: Vec<(f64, bool)> = scores_pos
        .iter()
        .map(|&s| (s, true))
        .chain(scores_neg.iter().map(|&s| (s, false)))
        .collect();
    all.sort_by(|a, b| a.0.total_cmp(&b.0));

    // Twice the rank sum keeps tied (half-integer) ranks exact.
    let mut rank_sum_x2: u128 = 0;
    let mut i = 0;
    while i < all.len() {
        let mut j = i;
        while j < all.len() && all[j].0 == all[i].0 {
            j += 1;
        }
        // ranks i+1 ..= j share the average (i + 1 + j) / 2
        let positives = all[i..j].iter().filter(|e| e.1).count() as u128;
        rank_sum_x2 += positives * (i as u128 + 1 + j as u128);
        i = j;
    }
    let n_pos = scores_pos.len() as u128;
    let n_neg = scores_neg.len() as u128;
    let u_x2 = rank_sum_x2 - n_pos * (n_pos + 1);
    Ok(u_x2 as f64 / (2 * n_pos * n_neg) as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub n: u64,
    pub accuracy: f64,
    pub f1: f64,
    /// `None` when the evaluated pairs hold only one label.
    pub roc_auc: Option<f64>,
    pub confusion: ConfusionMatrix,
    pub confidence_mean: f64,
    pub confidence_std: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mcnemar: Option<McNemarResult>,
}

/// Scores verdicts against ground truth. AUC ranks each verdict by its
/// same-author score ([`Verdict::same_author_score`]).
pub fn evaluate(verdicts: &[(Verdict, Label)]) -> Result<EvalReport> {
    if verdicts.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut confusion = ConfusionMatrix::default();
    let (mut pos, mut neg) = (Vec::new(), Vec::new());
    for (v, truth) in verdicts {
        confusion.record(v.predicted, *truth);
        match truth {
            Label::SameAuthor => pos.push(v.same_author_score()),
            Label::DifferentAuthor => neg.push(v.same_author_score()),
        }
    }
    let n = verdicts.len() as f64;
    let confidence_mean = verdicts.iter().map(|(v, _)| v.confidence).sum::<f64>() / n;
    let confidence_var = verdicts
        .iter()
        .map(|(v, _)| (v.confidence - confidence_mean).powi(2))
        .sum::<f64>()
        / n;
    let roc_auc = if pos.is_empty() || neg.is_empty() {
        None
    } else {
        Some(roc_auc(&pos, &neg)?)
    };
    Ok(EvalReport {
        n: confusion.total(),
        accuracy: confusion.accuracy(),
        f1: confusion.f1(),
        roc_auc,
        confusion,
        confidence_mean,
        confidence_std: confidence_var.sqrt(),
        mcnemar: None,
    })
}

impl EvalReport {
    /// Plain-text table: one metric per row.
    pub fn to_table(&self) -> String {
        let mut rows: Vec<(&str, String)> = vec![
            ("Accuracy", format!("{:.2}%", 100.0 * self.accuracy)),
            (
                "ROC AUC",
                self.roc_auc.map_or_else(|| "n/a".to_string(), |a| format!("{a:.3}")),
            ),
            ("F1", format!("{:.3}", self.f1)),
            (
                "Confidence",
                format!("{:.1}% ± {:.1}", 100.0 * self.confidence_mean, 100.0 * self.confidence_std),
            ),
        ];
        if let Some(m) = &self.mcnemar {
            rows.push((
                "McNemar χ²",
                format!("{:.3}{}", m.chi2, if m.significant_at_05 { " (p<0.05)" } else { "" }),
            ));
        }
        rows.push((
            "Confusion",
            format!(
                "TP {} FN {} FP {} TN {}",
                self.confusion.tp, self.confusion.fn_, self.confusion.fp, self.confusion.tn
            ),
        ));
        rows.push(("Pairs", self.n.to_string()));
        let width = rows.iter().map(|(k, _)| k.chars().count()).max().unwrap_or(0);
        let mut out = String::new();
        for (k, v) in rows {
            let pad = width - k.chars().count();
            let _ = writeln!(out, "{k}{}  {v}", " ".repeat(pad));
        }
        out
    }
}
