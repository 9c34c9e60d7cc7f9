use std::collections::{BTreeMap, HashSet};
use std::fmt;

use rand::seq::{index, SliceRandom};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::segment::{Position, Segment};
use crate::rng;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    SameAuthor,
    DifferentAuthor,
}

impl Label {
    pub fn is_same(self) -> bool {
        self == Label::SameAuthor
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::SameAuthor => "same_author",
            Label::DifferentAuthor => "different_author",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SegmentRef {
    pub doc_id: String,
    pub position: Position,
}

impl SegmentRef {
    pub fn of(segment: &Segment) -> Self {
        SegmentRef {
            doc_id: segment.doc_id.clone(),
            position: segment.position,
        }
    }

    pub fn id(&self) -> String {
        super::segment::segment_id(&self.doc_id, self.position)
    }
}

/// A labelled pair of segments. Serialized flat as
/// `{"a_doc", "a_pos", "b_doc", "b_pos", "label"}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "PairRecord", into = "PairRecord")]
pub struct TextPair {
    pub a: SegmentRef,
    pub b: SegmentRef,
    pub label: Label,
}

#[derive(Serialize, Deserialize)]
struct PairRecord {
    a_doc: String,
    a_pos: Position,
    b_doc: String,
    b_pos: Position,
    label: Label,
}

impl From<PairRecord> for TextPair {
    fn from(r: PairRecord) -> Self {
        TextPair {
            a: SegmentRef {
                doc_id: r.a_doc,
                position: r.a_pos,
            },
            b: SegmentRef {
                doc_id: r.b_doc,
                position: r.b_pos,
            },
            label: r.label,
        }
    }
}

impl From<TextPair> for PairRecord {
    fn from(p: TextPair) -> Self {
        PairRecord {
            a_doc: p.a.doc_id,
            a_pos: p.a.position,
            b_doc: p.b.doc_id,
            b_pos: p.b.position,
            label: p.label,
        }
    }
}

struct DocEntry<'a> {
    author: &'a str,
    segments: Vec<&'a Segment>,
}

fn index_documents(segments: &[Segment]) -> Result<Vec<DocEntry<'_>>> {
    let mut docs: BTreeMap<&str, DocEntry<'_>> = BTreeMap::new();
    for seg in segments {
        let entry = docs.entry(seg.doc_id.as_str()).or_insert_with(|| DocEntry {
            author: seg.author_id.as_deref().unwrap_or(&seg.doc_id),
            segments: Vec::new(),
        });
        if entry.segments.iter().any(|s| s.position == seg.position) {
            return Err(Error::DuplicateId(seg.id()));
        }
        entry.segments.push(seg);
    }
    for entry in docs.values_mut() {
        entry.segments.sort_by_key(|s| s.position);
    }
    Ok(docs.into_values().collect())
}

/// Samples `n_positive` same-author pairs and
/// `n_negative` different-author pairs using the `pairs.construction` stream
/// of `seed`.
pub fn build_pairs(
    segments: &[Segment],
    n_positive: usize,
    n_negative: usize,
    seed: u64,
) -> Result<Vec<TextPair>> {
    let mut rng = rng::stream(seed, rng::PAIRS_CONSTRUCTION);
    build_pairs_with_rng(segments, n_positive, n_negative, &mut rng)
}

/// The author of a segment is its `author_id` when present, its document
/// otherwise. Positive pairs are distinct same-author segment pairs drawn
/// uniformly, which without author metadata means the head and tail of one
/// document. Negative pairs come from documents with different authors:
/// document pairs are drawn uniformly without replacement, then one segment of
/// each document is drawn uniformly. When more negatives are requested than
/// there are document pairs, distinct segment pairs are drawn instead.
pub fn build_pairs_with_rng<R: Rng + ?Sized>(
    segments: &[Segment],
    n_positive: usize,
    n_negative: usize,
    rng: &mut R,
) -> Result<Vec<TextPair>> {
    let docs = index_documents(segments)?;
    let mut pairs = Vec::with_capacity(n_positive + n_negative);
    if n_positive > 0 {
        sample_positives(&docs, n_positive, rng, &mut pairs)?;
    }

    if n_negative > 0 {
        sample_negatives(&docs, n_negative, rng, &mut pairs)?;
    }
    Ok(pairs)
}

/// Same-author candidates are all unordered segment pairs within one author:
/// just the (head, tail) of each document when there is no author metadata.
/// Candidates are ranked author by author (sorted by author, then document,
/// then position), and `n_positive` distinct ranks are drawn uniformly.
fn sample_positives<R: Rng + ?Sized>(
    docs: &[DocEntry<'_>],
    n_positive: usize,
    rng: &mut R,
    out: &mut Vec<TextPair>,
) -> Result<()> {
    let mut by_author: BTreeMap<&str, Vec<&Segment>> = BTreeMap::new();
    for d in docs {
        by_author.entry(d.author).or_default().extend(d.segments.iter().copied());
    }
    let groups: Vec<Vec<&Segment>> = by_author.into_values().filter(|g| g.len() >= 2).collect();
    let sizes: Vec<u64> = groups.iter().map(|g| choose2(g.len() as u64)).collect();
    let total: u64 = sizes.iter().sum();
    if n_positive as u64 > total {
        return Err(Error::InsufficientCorpus(format!(
            "{n_positive} positive pairs requested, only {total} distinct same-author segment pairs exist"
        )));
    }
    let total = usize::try_from(total)
        .map_err(|_| Error::InsufficientCorpus("too many same-author candidates to index".into()))?;
    for rank in index::sample(rng, total, n_positive) {
        let mut rank = rank as u64;
        let mut g = 0;
        while rank >= sizes[g] {
            rank -= sizes[g];
            g += 1;
        }
        let (i, j) = unrank_pair(rank, groups[g].len() as u64);
        out.push(TextPair {
            a: SegmentRef::of(groups[g][i]),
            b: SegmentRef::of(groups[g][j]),
            label: Label::SameAuthor,
        });
    }
    Ok(())
}

fn choose2(n: u64) -> u64 {
    n * n.saturating_sub(1) / 2
}

/// The `rank`-th pair `(i, j)`, `i < j < n`, in row-major order.
fn unrank_pair(mut rank: u64, n: u64) -> (usize, usize) {
    let mut i = 0;
    while rank >= n - 1 - i {
        rank -= n - 1 - i;
        i += 1;
    }
    (i as usize, (i + 1 + rank) as usize)
}

fn sample_negatives<R: Rng + ?Sized>(
    docs: &[DocEntry<'_>],
    n_negative: usize,
    rng: &mut R,
    out: &mut Vec<TextPair>,
) -> Result<()> {
    let n = docs.len();
    let mut per_author: BTreeMap<&str, u64> = BTreeMap::new();
    for d in docs {
        *per_author.entry(d.author).or_default() += 1;
    }
    let all_pairs = (n as u64) * (n as u64).saturating_sub(1) / 2;
    let same_author_pairs: u64 = per_author.values().map(|&c| c * (c - 1) / 2).sum();
    let cross_pairs = all_pairs - same_author_pairs;

    let cross_doc_pairs = || {
        (0..n).flat_map(move |i| (i + 1..n).map(move |j| (i, j)))
            .filter(|&(i, j)| docs[i].author != docs[j].author)
    };
    let push = |out: &mut Vec<TextPair>, a: &Segment, b: &Segment| {
        out.push(TextPair {
            a: SegmentRef::of(a),
            b: SegmentRef::of(b),
            label: Label::DifferentAuthor,
        })
    };

    if n_negative as u64 > cross_pairs {
        // Fewer document pairs than requested: draw distinct segment pairs.
        let mut candidates: Vec<(&Segment, &Segment)> = cross_doc_pairs()
            .flat_map(|(i, j)| {
                docs[i]
                    .segments
                    .iter()
                    .flat_map(move |a| docs[j].segments.iter().map(move |b| (*a, *b)))
            })
            .collect();
        if candidates.len() < n_negative {
            return Err(Error::InsufficientCorpus(format!(
                "{n_negative} negative pairs requested, only {} distinct different-author segment pairs exist",
                candidates.len()
            )));
        }
        candidates.shuffle(rng);
        for (a, b) in candidates.into_iter().take(n_negative) {
            push(out, a, b);
        }
        return Ok(());
    }

    let chosen: Vec<(usize, usize)> = if 2 * n_negative as u64 >= cross_pairs {
        let mut all: Vec<(usize, usize)> = cross_doc_pairs().collect();
        all.shuffle(rng);
        all.truncate(n_negative);
        all
    } else {
        let mut seen = HashSet::with_capacity(n_negative);
        let mut chosen = Vec::with_capacity(n_negative);
        while chosen.len() < n_negative {
            let i = rng.random_range(0..n);
            let mut j = rng.random_range(0..n - 1);
            if j >= i {
                j += 1;
            }
            let key = (i.min(j), i.max(j));
            if docs[key.0].author != docs[key.1].author && seen.insert(key) {
                chosen.push(key);
            }
        }
        chosen
    };
    for (i, j) in chosen {
        let a = docs[i].segments[rng.random_range(0..docs[i].segments.len())];
        let b = docs[j].segments[rng.random_range(0..docs[j].segments.len())];
        push(out, a, b);
    }
    Ok(())
}

/// Partitions segments by document into (construction, held-out), assigning
/// `round(holdout_fraction * documents)` documents to the held-out side using
/// the `pairs.split` stream of `seed`.
pub fn split_documents(
    segments: &[Segment],
    holdout_fraction: f64,
    seed: u64,
) -> Result<(Vec<Segment>, Vec<Segment>)> {
    if !(0.0..=1.0).contains(&holdout_fraction) {
        return Err(Error::InvalidConfig(format!(
            "holdout fraction {holdout_fraction} is outside [0, 1]"
        )));
    }
    let mut ids: Vec<&str> = segments.iter().map(|s| s.doc_id.as_str()).collect();
    ids.sort_unstable();
    ids.dedup();
    let mut rng = rng::stream(seed, rng::PAIRS_SPLIT);
    ids.shuffle(&mut rng);
    let n_holdout = (holdout_fraction * ids.len() as f64).round() as usize;
    let holdout: HashSet<&str> = ids[..n_holdout].iter().copied().collect();
    let (held, built): (Vec<Segment>, Vec<Segment>) = segments
        .iter()
        .cloned()
        .partition(|s| holdout.contains(s.doc_id.as_str()));
    Ok((built, held))
}
