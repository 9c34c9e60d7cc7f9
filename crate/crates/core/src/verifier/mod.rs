//! The nonparametric verifier.
//!
//! A [`DistanceDistribution`] holds the sorted distances of labelled
//! same-author pairs (D⁺) and different-author pairs (D⁻). A query distance
//! `d*` is scored as
//!
//! - `S = #{δ ∈ D⁺ : δ > d*} / |D⁺|`, the share of same-author distances
//!   that are larger, and
//! - `D = #{δ ∈ D⁻ : δ < d*} / |D⁻|`, the share of different-author
//!   distances that are smaller.
//!
//! The pair is same-author iff `S > D` (ties go to different-author), with
//! confidence `|S − D| / max(S, D)` (0 when both are 0). Both counts are binary
//! searches over the sorted lists.

mod store;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distance::Metric;
use crate::features::StyleVector;
use crate::{Error, Result};

pub use crate::corpus::Label;
pub use store::{load_store, save_store, StoreWarning, STORE_VERSION};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoreMeta {
    pub vocab_hash: String,
    pub alpha: f64,
    /// Seconds since the Unix epoch; left unset by default so that identical
    /// inputs give byte-identical stores.
    pub build_timestamp: Option<u64>,
}

impl Default for StoreMeta {
    fn default() -> Self {
        StoreMeta {
            vocab_hash: String::new(),
            alpha: 1.0,
            build_timestamp: None,
        }
    }
}

/// The verifier's entire state: two ascending lists of finite, non-negative
/// distances. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceDistribution {
    same: Vec<f64>,
    diff: Vec<f64>,
    metric: Metric,
    meta: StoreMeta,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub predicted: Label,
    pub s_prob: f64,
    pub d_prob: f64,
    pub confidence: f64,
    pub distance: f64,
}

impl Verdict {
    /// Maps the verdict onto a same-author score in `[0, 1]`:
    /// `0.5 ± 0.5 · confidence`, positive when predicted same-author.
    pub fn same_author_score(&self) -> f64 {
        match self.predicted {
            Label::SameAuthor => 0.5 + 0.5 * self.confidence,
            Label::DifferentAuthor => 0.5 - 0.5 * self.confidence,
        }
    }
}

/// Decision rule and confidence for already computed `S` and `D`.
pub fn decide(s_prob: f64, d_prob: f64) -> (Label, f64) {
    let predicted = if s_prob > d_prob {
        Label::SameAuthor
    } else {
        Label::DifferentAuthor
    };
    let max = s_prob.max(d_prob);
    let confidence = if max > 0.0 { (s_prob - d_prob).abs() / max } else { 0.0 };
    (predicted, confidence)
}

fn check_distances(values: &[f64], what: &str) -> Result<()> {
    if let Some(v) = values.iter().find(|v| !v.is_finite() || **v < 0.0) {
        return Err(Error::NonFinite(format!("{what} distance {v}")));
    }
    Ok(())
}

fn sorted(mut values: Vec<f64>) -> Vec<f64> {
    for v in values.iter_mut() {
        // fold -0.0 into +0.0 so the stored bytes are canonical
        *v += 0.0;
    }
    values.sort_by(f64::total_cmp);
    values
}

impl DistanceDistribution {
    /// Builds a store from raw distances. Nothing is fitted; the lists are
    /// only validated and sorted.
    pub fn from_distances(same: Vec<f64>, diff: Vec<f64>, metric: Metric, meta: StoreMeta) -> Result<Self> {
        if same.is_empty() {
            return Err(Error::MissingLabelClass("same_author"));
        }
        if diff.is_empty() {
            return Err(Error::MissingLabelClass("different_author"));
        }
        check_distances(&same, "same-author")?;
        check_distances(&diff, "different-author")?;
        Ok(DistanceDistribution {
            same: sorted(same),
            diff: sorted(diff),
            metric,
            meta,
        })
    }

    /// Builds a store from labelled distances.
    pub fn from_labelled<I>(labelled: I, metric: Metric, meta: StoreMeta) -> Result<Self>
    where
        I: IntoIterator<Item = (f64, Label)>,
    {
        let (mut same, mut diff) = (Vec::new(), Vec::new());
        for (d, label) in labelled {
            match label {
                Label::SameAuthor => same.push(d),
                Label::DifferentAuthor => diff.push(d),
            }
        }
        Self::from_distances(same, diff, metric, meta)
    }

    /// Computes the distance of every labelled pair under `metric` (in
    /// parallel, order-preserving) and builds the store.
    pub fn build(pairs: &[(&StyleVector, &StyleVector, Label)], metric: Metric, meta: StoreMeta) -> Result<Self> {
        let distances: Vec<(f64, Label)> = pairs
            .par_iter()
            .map(|(a, b, label)| Ok((metric.distance(a, b)?, *label)))
            .collect::<Result<_>>()?;
        Self::from_labelled(distances, metric, meta)
    }

    pub fn same_sorted(&self) -> &[f64] {
        &self.same
    }

    pub fn diff_sorted(&self) -> &[f64] {
        &self.diff
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    pub fn meta(&self) -> &StoreMeta {
        &self.meta
    }

    pub fn n_same(&self) -> usize {
        self.same.len()
    }

    pub fn n_diff(&self) -> usize {
        self.diff.len()
    }

    /// `(S, D)` for a query distance, by binary search.
    pub fn score(&self, d_star: f64) -> Result<(f64, f64)> {
        if !d_star.is_finite() {
            return Err(Error::NonFinite(format!("query distance {d_star}")));
        }
        let above = self.same.len() - self.same.partition_point(|&x| x <= d_star);
        let below = self.diff.partition_point(|&x| x < d_star);
        Ok((
            above as f64 / self.same.len() as f64,
            below as f64 / self.diff.len() as f64,
        ))
    }

    pub fn verdict(&self, d_star: f64) -> Result<Verdict> {
        let (s_prob, d_prob) = self.score(d_star)?;
        let (predicted, confidence) = decide(s_prob, d_prob);
        Ok(Verdict {
            predicted,
            s_prob,
            d_prob,
            confidence,
            distance: d_star,
        })
    }

    pub fn classify(&self, a: &StyleVector, b: &StyleVector) -> Result<Verdict> {
        self.verdict(self.metric.distance(a, b)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn toy() -> DistanceDistribution {
        DistanceDistribution::from_distances(
            vec![0.3, 0.2, 0.25],
            vec![0.7, 0.6, 0.65],
            Metric::Cosine,
            StoreMeta::default(),
        )
        .unwrap()
    }

    fn brute(dist: &DistanceDistribution, d: f64) -> (f64, f64) {
        let s = dist.same_sorted().iter().filter(|&&x| x > d).count() as f64 / dist.n_same() as f64;
        let dd = dist.diff_sorted().iter().filter(|&&x| x < d).count() as f64 / dist.n_diff() as f64;
        (s, dd)
    }

    #[test]
    fn build_sorts() {
        let d = DistanceDistribution::from_distances(vec![0.3, 0.2], vec![0.7], Metric::Cosine, StoreMeta::default())
            .unwrap();
        assert_eq!(d.same_sorted(), [0.2, 0.3]);
        assert_eq!(d.diff_sorted(), [0.7]);
    }

    #[test]
    fn missing_class() {
        let e = DistanceDistribution::from_distances(vec![], vec![0.7], Metric::Cosine, StoreMeta::default());
        assert!(matches!(e, Err(Error::MissingLabelClass("same_author"))));
        let e = DistanceDistribution::from_labelled([(0.1, Label::SameAuthor)], Metric::Cosine, StoreMeta::default());
        assert!(matches!(e, Err(Error::MissingLabelClass("different_author"))));
    }

    #[test]
    fn worked_example() {
        let d = toy();
        let (s, dd) = d.score(0.25).unwrap();
        assert_eq!((s, dd), (1.0 / 3.0, 0.0));
        assert_eq!((s, dd), brute(&d, 0.25));
        let v = d.verdict(0.25).unwrap();
        assert_eq!(v.predicted, Label::SameAuthor);
        assert_eq!(v.confidence, 1.0);
    }

    #[test]
    fn extremes_and_ties() {
        let d = toy();
        assert_eq!(d.score(0.0).unwrap(), (1.0, 0.0));
        // equal to a stored D+ value: excluded by the strict inequality
        assert_eq!(d.score(0.2).unwrap().0, 2.0 / 3.0);
        assert!(d.score(f64::NAN).is_err());
    }

    #[test]
    fn decision_ties() {
        assert_eq!(decide(0.5, 0.5), (Label::DifferentAuthor, 0.0));
        assert_eq!(decide(0.0, 0.0), (Label::DifferentAuthor, 0.0));
        assert_eq!(decide(0.0, 0.4), (Label::DifferentAuthor, 1.0));
    }

    #[test]
    fn classify_uses_metric() {
        let d = toy();
        let a = StyleVector::dense(vec![1.0, 0.0]).unwrap();
        let b = StyleVector::dense(vec![1.0, 0.0]).unwrap();
        let v = d.classify(&a, &b).unwrap();
        assert_eq!(v.distance, 0.0);
        assert_eq!(v.predicted, Label::SameAuthor);
        let z = StyleVector::default();
        assert!(matches!(d.classify(&a, &z), Err(Error::ZeroVector)));
    }

    fn distances() -> impl Strategy<Value = Vec<f64>> {
        // coarse grid so that ties with the query are common
        prop::collection::vec((0u32..40).prop_map(|k| k as f64 / 20.0), 1..60)
    }

    proptest! {
        #[test]
        fn matches_brute_force(same in distances(), diff in distances(), q in (0u32..45).prop_map(|k| k as f64 / 20.0)) {
            let d = DistanceDistribution::from_distances(same, diff, Metric::Cosine, StoreMeta::default()).unwrap();
            prop_assert_eq!(d.score(q).unwrap(), brute(&d, q));
        }

        #[test]
        fn monotone_and_bounded(same in distances(), diff in distances(), a in 0.0f64..2.0, b in 0.0f64..2.0) {
            let d = DistanceDistribution::from_distances(same, diff, Metric::Cosine, StoreMeta::default()).unwrap();
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let (s_lo, d_lo) = d.score(lo).unwrap();
            let (s_hi, d_hi) = d.score(hi).unwrap();
            prop_assert!(s_hi <= s_lo);
            prop_assert!(d_hi >= d_lo);
            let v = d.verdict(a).unwrap();
            prop_assert!((0.0..=1.0).contains(&v.confidence));
            prop_assert_eq!(v.predicted == Label::SameAuthor, v.s_prob > v.d_prob);
            if (v.s_prob == 0.0) != (v.d_prob == 0.0) {
                prop_assert_eq!(v.confidence, 1.0);
            }
        }

        #[test]
        fn separated_distributions(gap in 0.01f64..0.5, q in 0.0f64..1.0) {
            let same = vec![0.1, 0.2, 0.3];
            let diff: Vec<f64> = [0.0, 0.1, 0.2].iter().map(|x| 0.3 + gap + x).collect();
            let d = DistanceDistribution::from_distances(same, diff.clone(), Metric::Cosine, StoreMeta::default()).unwrap();
            let v = d.verdict(q).unwrap();
            if q < diff[0] && q < 0.3 {
                prop_assert_eq!(v.predicted, Label::SameAuthor);
            }
            if q > 0.3 {
                prop_assert_eq!(v.predicted, Label::DifferentAuthor);
            }
        }
    }
}
