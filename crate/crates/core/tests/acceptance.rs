//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits nonzero if any failed.

use std::collections::HashMap;
use std::panic::{self, AssertUnwindSafe};
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use styloverify::corpus::{
    build_pairs, build_pairs_with_rng, segment_document, split_documents, Cleaner, CleaningConfig, DictionarySource,
    Label, Position, RawDocument, Segment, TextPair,
};
use styloverify::detection::{perplexity, TokenLogProbs};
use styloverify::distance::{cosine_distance, dot, euclidean_distance, Metric};
use styloverify::evaluation::{evaluate, roc_auc, EvalReport, McNemarResult, CHI2_1DF_05};
use styloverify::features::{
    fit_vocabulary, vectorize_tfidf, Featurizer, NGramVocabulary, StyleVector, VocabularyOptions,
};
use styloverify::imitation::{
    make_prompt, run_batch, score_imitation, GenerationRecord, OfflineCompletions, PromptOptions, ScoreOptions,
    Strategy,
};
use styloverify::rng;
use styloverify::verifier::{load_store, save_store, DistanceDistribution, StoreMeta, Verdict};
use styloverify::Error;

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn main() {
    let mut results: Vec<(&str, Outcome)> = Vec::new();
    let mut run = |name: &'static str, f: &mut dyn FnMut() -> Outcome| {
        let outcome = panic::catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match &outcome {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(detail) => println!("FAIL  {name}: {detail}"),
        }
        results.push((name, outcome));
    };

    let mut synthetic: Option<Synthetic> = None;
    run("synthetic separation", &mut || {
        let s = Synthetic::run()?;
        let detail = s.describe();
        let r = &s.report;
        let auc = r.roc_auc.unwrap_or(0.0);
        let ok = r.accuracy >= 0.90 && auc >= 0.95 && s.pipeline_time < Duration::from_secs(60);
        synthetic = Some(s);
        if ok {
            Ok(detail)
        } else {
            Err(detail)
        }
    });
    run("verifier oracle equivalence", &mut verifier_oracle);
    run("decision-rule conformance", &mut decision_rule);
    run("metric properties", &mut metric_properties);
    run("AUC oracle", &mut auc_oracle);
    run("McNemar", &mut mcnemar_cases);
    run("TF-IDF conformance", &mut tfidf_conformance);
    run("perplexity", &mut perplexity_cases);
    run("store round-trip", &mut || match &synthetic {
        Some(s) => store_round_trip(s),
        None => Err("synthetic pipeline unavailable".into()),
    });
    run("imitation harness offline", &mut || match &synthetic {
        Some(s) => imitation_offline(s),
        None => Err("synthetic pipeline unavailable".into()),
    });
    run("construction speed", &mut construction_speed);

    let failed = results.iter().filter(|(_, o)| o.is_err()).count();
    println!("{} of {} acceptance criteria passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}

// ---------------------------------------------------------------------------
// Synthetic two-author corpus

const ALPHABET: &[u8] = b"abcdefghijklmnopqrstuvwxyz ";
const SPACE: usize = 26;
const SYMBOLS: usize = 27;

/// Order-2 character Markov chain. Both authors share base weights; in every
/// state the letters are split into two disjoint halves and each author
/// boosts its own half.
struct MarkovAuthor {
    /// Cumulative next-symbol weights per state `prev2 * 27 + prev1`.
    cumulative: Vec<[f64; SYMBOLS]>,
}

fn markov_authors(seed: u64) -> [MarkovAuthor; 2] {
    const BIAS: f64 = 6.0;
    const SPACE_PROB: f64 = 0.17;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tables = [Vec::new(), Vec::new()];
    for state in 0..SYMBOLS * SYMBOLS {
        let base: Vec<f64> = (0..26).map(|_| rng.random_range(0.1..1.0)).collect();
        let mut letters: Vec<usize> = (0..26).collect();
        letters.shuffle(&mut rng);
        for (author, table) in tables.iter_mut().enumerate() {
            let mut w = [0.0; SYMBOLS];
            w[..26].copy_from_slice(&base);
            for &l in &letters[author * 13..(author + 1) * 13] {
                w[l] *= BIAS;
            }
            let letter_mass: f64 = w[..26].iter().sum();
            if state % SYMBOLS != SPACE {
                w[SPACE] = letter_mass * SPACE_PROB / (1.0 - SPACE_PROB);
            }
            let mut acc = 0.0;
            for x in &mut w {
                acc += *x;
                *x = acc;
            }
            table.push(w);
        }
    }
    tables.map(|cumulative| MarkovAuthor { cumulative })
}

impl MarkovAuthor {
    fn document(&self, rng: &mut ChaCha8Rng, n_words: usize) -> String {
        let (mut prev2, mut prev1) = (SPACE, SPACE);
        let mut text = String::with_capacity(n_words * 7);
        let mut words = 0;
        let mut word_len = 0;
        let mut next_break = rng.random_range(80..160);
        while words < n_words {
            let row = &self.cumulative[prev2 * SYMBOLS + prev1];
            let u = rng.random::<f64>() * row[SYMBOLS - 1];
            let mut c = row.partition_point(|&x| x <= u).min(SYMBOLS - 1);
            if word_len >= 14 {
                c = SPACE;
            }
            if c == SPACE {
                words += 1;
                word_len = 0;
                if words == n_words {
                    break;
                }
                if words == next_break {
                    text.push_str("\n\n");
                    next_break += rng.random_range(80..160);
                } else {
                    text.push(' ');
                }
            } else {
                text.push(ALPHABET[c] as char);
                word_len += 1;
            }
            prev2 = prev1;
            prev1 = c;
        }
        text
    }
}

fn synthetic_corpus(seed: u64) -> Vec<RawDocument> {
    let authors = markov_authors(seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let mut docs = Vec::with_capacity(800);
    for (k, author) in authors.iter().enumerate() {
        for i in 0..400 {
            let n_words = rng.random_range(1150..1250);
            docs.push(RawDocument::new(format!("author{k}-doc{i:03}"), author.document(&mut rng, n_words)).with_author(format!("author{k}")));
        }
    }
    docs
}

struct Synthetic {
    docs: Vec<RawDocument>,
    heldout_segments: Vec<Segment>,
    heldout_pairs: Vec<TextPair>,
    featurizer: Featurizer,
    store: DistanceDistribution,
    vectors: HashMap<String, StyleVector>,
    verdicts: Vec<Verdict>,
    report: EvalReport,
    accepted: usize,
    generation_time: Duration,
    pipeline_time: Duration,
}

impl Synthetic {
    fn run() -> Result<Self, String> {
        const SEED: u64 = 20_240_601;
        let t0 = Instant::now();
        let docs = synthetic_corpus(SEED);
        let generation_time = t0.elapsed();

        let t1 = Instant::now();
        let config = CleaningConfig {
            dictionary: DictionarySource::Disabled,
            ..CleaningConfig::default()
        };
        let cleaner = Cleaner::new(config).map_err(|e| e.to_string())?;
        let mut segments = Vec::new();
        let mut accepted = 0;
        for doc in &docs {
            let cleaned = cleaner.clean(doc).map_err(|e| e.to_string())?;
            if !cleaned.report.accepted {
                continue;
            }
            accepted += 1;
            let stripped = RawDocument {
                text: cleaned.text,
                ..doc.clone()
            };
            let (h, t) = segment_document(&stripped, 500).map_err(|e| e.to_string())?;
            segments.extend([h, t]);
        }

        let (construction_segments, heldout_segments) =
            split_documents(&segments, 1.0 / 3.0, SEED).map_err(|e| e.to_string())?;
        let construction = build_pairs(&construction_segments, 1000, 1000, SEED).map_err(|e| e.to_string())?;
        let mut holdout_rng = rng::stream(SEED, rng::PAIRS_HOLDOUT);
        let heldout_pairs =
            build_pairs_with_rng(&heldout_segments, 500, 500, &mut holdout_rng).map_err(|e| e.to_string())?;

        let index: HashMap<String, &Segment> = segments.iter().map(|s| (s.id(), s)).collect();
        let mut used: Vec<String> = construction.iter().flat_map(|p| [p.a.id(), p.b.id()]).collect();
        used.sort();
        used.dedup();
        let texts: Vec<&str> = used.iter().map(|id| index[id].text.as_str()).collect();
        let vocab = fit_vocabulary(&texts, 10_000).map_err(|e| e.to_string())?;
        let meta = StoreMeta {
            vocab_hash: vocab.hash(),
            alpha: 0.0,
            build_timestamp: None,
        };
        let featurizer = Featurizer::tfidf_only(vocab);

        let items: Vec<(String, &str)> = segments.iter().map(|s| (s.id(), s.text.as_str())).collect();
        let vecs = featurizer.vectorize_all(&items).map_err(|e| e.to_string())?;
        let vectors: HashMap<String, StyleVector> = items.into_iter().map(|(id, _)| id).zip(vecs).collect();

        let triples: Vec<(&StyleVector, &StyleVector, Label)> = construction
            .iter()
            .map(|p| (&vectors[&p.a.id()], &vectors[&p.b.id()], p.label))
            .collect();
        let store = DistanceDistribution::build(&triples, Metric::Cosine, meta).map_err(|e| e.to_string())?;

        let verdicts: Vec<Verdict> = heldout_pairs
            .iter()
            .map(|p| store.classify(&vectors[&p.a.id()], &vectors[&p.b.id()]))
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        let labelled: Vec<(Verdict, Label)> = verdicts.iter().copied().zip(heldout_pairs.iter().map(|p| p.label)).collect();
        let report = evaluate(&labelled).map_err(|e| e.to_string())?;
        let pipeline_time = t1.elapsed();

        Ok(Synthetic {
            docs,
            heldout_segments,
            heldout_pairs,
            featurizer,
            store,
            vectors,
            verdicts,
            report,
            accepted,
            generation_time,
            pipeline_time,
        })
    }

    fn describe(&self) -> String {
        let r = &self.report;
        format!(
            "{} docs ({} accepted), store {}+{}, {} held-out pairs: accuracy {:.4} (>= 0.90), AUC {:.4} (>= 0.95), \
             pipeline {:.2}s (< 60s; corpus generation {:.2}s)",
            self.docs.len(),
            self.accepted,
            self.store.n_same(),
            self.store.n_diff(),
            r.n,
            r.accuracy,
            r.roc_auc.unwrap_or(f64::NAN),
            self.pipeline_time.as_secs_f64(),
            self.generation_time.as_secs_f64()
        )
    }
}

// ---------------------------------------------------------------------------
// Verifier

fn brute_force(store: &DistanceDistribution, d: f64) -> (f64, f64) {
    let s = store.same_sorted().iter().filter(|&&x| x > d).count() as f64 / store.n_same() as f64;
    let dd = store.diff_sorted().iter().filter(|&&x| x < d).count() as f64 / store.n_diff() as f64;
    (s, dd)
}

fn verifier_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    // Rounded to three decimals so that ties are common.
    let mut draw = |lo: f64, hi: f64| (rng.random_range(lo..hi) * 1000.0).round() / 1000.0;
    let same: Vec<f64> = (0..5000).map(|_| draw(0.0, 0.7)).collect();
    let diff: Vec<f64> = (0..5000).map(|_| draw(0.3, 1.0)).collect();
    let store = DistanceDistribution::from_distances(same.clone(), diff.clone(), Metric::Cosine, StoreMeta::default())
        .map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut mismatches = 0;
    for q in 0..1000 {
        let d = match q % 3 {
            0 => same[rng.random_range(0..same.len())],
            1 => diff[rng.random_range(0..diff.len())],
            _ => rng.random_range(-0.1..1.1f64).max(0.0),
        };
        let (s, dd) = store.score(d).map_err(|e| e.to_string())?;
        if (s, dd) != brute_force(&store, d) {
            mismatches += 1;
        }
    }
    ensure(mismatches == 0, || format!("{mismatches} of 1000 queries differ from brute-force counts"))?;
    Ok("1000 queries against a 10,000-entry store, zero mismatches".into())
}

fn decision_rule() -> Outcome {
    let store = DistanceDistribution::from_distances(
        vec![0.2, 0.25, 0.3],
        vec![0.6, 0.65, 0.7],
        Metric::Cosine,
        StoreMeta::default(),
    )
    .map_err(|e| e.to_string())?;
    let v = store.verdict(0.25).map_err(|e| e.to_string())?;
    ensure(
        v.s_prob == 1.0 / 3.0 && v.d_prob == 0.0 && v.predicted == Label::SameAuthor && v.confidence == 1.0,
        || format!("got {v:?}"),
    )?;
    Ok(format!(
        "d*=0.25: S={:.4}, D={}, {}, confidence {}",
        v.s_prob,
        v.d_prob,
        v.predicted.as_str(),
        v.confidence
    ))
}

// ---------------------------------------------------------------------------
// Metrics

fn random_vector(rng: &mut ChaCha8Rng) -> StyleVector {
    loop {
        let n_sparse = rng.random_range(0..60);
        let mut idx: Vec<u32> = (0..n_sparse).map(|_| rng.random_range(0..200)).collect();
        idx.sort_unstable();
        idx.dedup();
        let sparse: Vec<(u32, f64)> = idx.into_iter().map(|i| (i, rng.random_range(0.0..1.0))).collect();
        let n_dense = if rng.random_bool(0.5) { rng.random_range(0..40) } else { 0 };
        let dense: Vec<f64> = (0..n_dense).map(|_| rng.random_range(-1.0..1.0)).collect();
        let v = StyleVector::from_blocks(sparse, dense).unwrap();
        if v.norm_squared() > 1e-6 {
            return v;
        }
    }
}

fn metric_properties() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut worst_scale, mut worst_identity, mut worst_self) = (0.0f64, 0.0f64, 0.0f64);
    for trial in 0..10_000 {
        let x = random_vector(&mut rng);
        let y = if trial % 10 == 0 { x.clone() } else { random_vector(&mut rng) };
        let c = cosine_distance(&x, &y).map_err(|e| e.to_string())?;
        ensure((0.0..=2.0).contains(&c), || format!("trial {trial}: cosine {c} outside [0, 2]"))?;
        let c_rev = cosine_distance(&y, &x).map_err(|e| e.to_string())?;
        ensure(c.to_bits() == c_rev.to_bits(), || format!("trial {trial}: cosine not symmetric"))?;
        let e = euclidean_distance(&x, &y);
        ensure(e.to_bits() == euclidean_distance(&y, &x).to_bits(), || {
            format!("trial {trial}: euclidean not symmetric")
        })?;

        let k = 10f64.powf(rng.random_range(-3.0..3.0));
        let scaled = cosine_distance(&x.scaled(k), &y).map_err(|e| e.to_string())?;
        worst_scale = worst_scale.max((scaled - c).abs());

        let (nx, ny) = (x.norm_squared(), y.norm_squared());
        let identity = nx + ny - 2.0 * dot(&x, &y);
        worst_identity = worst_identity.max((e * e - identity).abs() / (nx + ny).max(1.0));

        let self_d = cosine_distance(&x, &x).map_err(|e| e.to_string())?;
        worst_self = worst_self.max(self_d.abs());
    }
    ensure(worst_scale <= 1e-9, || format!("scale invariance error {worst_scale:e} > 1e-9"))?;
    ensure(worst_identity <= 1e-12, || format!("dot-product identity error {worst_identity:e} > 1e-12"))?;
    ensure(worst_self <= 1e-12, || format!("cosine(x, x) = {worst_self:e} > 1e-12"))?;
    Ok(format!(
        "10,000 trials; max scale error {worst_scale:.1e} (<= 1e-9), identity error {worst_identity:.1e} (<= 1e-12), \
         self-distance {worst_self:.1e}; range and bitwise symmetry hold"
    ))
}

// ---------------------------------------------------------------------------
// Evaluation

fn auc_enumerated(pos: &[f64], neg: &[f64]) -> f64 {
    let mut wins = 0.0;
    for &p in pos {
        for &n in neg {
            if p > n {
                wins += 1.0;
            } else if p == n {
                wins += 0.5;
            }
        }
    }
    wins / (pos.len() * neg.len()) as f64
}

fn auc_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = 0.0f64;
    for set in 0..100 {
        let n_pos = rng.random_range(1..=500);
        let n_neg = rng.random_range(1..=500);
        let tie_heavy = set % 2 == 0;
        let mut draw = |shift: f64| {
            if tie_heavy {
                (rng.random_range(0..6) as f64 + if rng.random_bool(0.3) { shift } else { 0.0 }).floor()
            } else {
                rng.random::<f64>() + shift
            }
        };
        let pos: Vec<f64> = (0..n_pos).map(|_| draw(0.3)).collect();
        let neg: Vec<f64> = (0..n_neg).map(|_| draw(0.0)).collect();
        let fast = roc_auc(&pos, &neg).map_err(|e| e.to_string())?;
        worst = worst.max((fast - auc_enumerated(&pos, &neg)).abs());
    }
    ensure(worst <= 1e-9, || format!("max deviation {worst:e} > 1e-9"))?;
    Ok(format!("100 score sets (half tie-heavy), max deviation {worst:.1e} (<= 1e-9)"))
}

fn mcnemar_cases() -> Outcome {
    let a = McNemarResult::from_counts(10, 2);
    ensure((a.chi2 - 49.0 / 12.0).abs() <= 1e-12 && a.significant_at_05, || format!("(10, 2) gave {a:?}"))?;
    let b = McNemarResult::from_counts(5, 5);
    ensure((b.chi2 - 0.1).abs() <= 1e-12 && !b.significant_at_05, || format!("(5, 5) gave {b:?}"))?;
    let c = McNemarResult::from_counts(0, 0);
    ensure(c.chi2 == 0.0 && !c.significant_at_05, || format!("(0, 0) gave {c:?}"))?;
    Ok(format!(
        "(10,2) -> {:.12} = 49/12, significant at {CHI2_1DF_05}; (5,5) -> {:.12}; (0,0) -> 0, not significant",
        a.chi2, b.chi2
    ))
}

// ---------------------------------------------------------------------------
// TF-IDF

fn overlapping_count(text: &str, gram: &str) -> usize {
    let chars: Vec<char> = text.chars().collect();
    let g: Vec<char> = gram.chars().collect();
    chars.windows(g.len()).filter(|w| *w == g.as_slice()).count()
}

fn tfidf_conformance() -> Outcome {
    let vocab = NGramVocabulary::from_grams(vec![("aba".into(), 1)], 2, VocabularyOptions::default())
        .map_err(|e| e.to_string())?;
    let v = vectorize_tfidf("ababa", &vocab);
    let expected = (2.0 / 5.0) * 2f64.ln();
    ensure((v.weight(0) - expected).abs() <= 1e-12, || format!("ababa weight {} != {expected}", v.weight(0)))?;

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let docs: Vec<String> = (0..40)
        .map(|d| {
            let body: String = (0..rng.random_range(20..200))
                .map(|_| ALPHABET[rng.random_range(0..6) + if d % 2 == 0 { 0 } else { 20 }] as char)
                .collect();
            // A shared prefix gives grams that occur in every document.
            format!("common prefix {body}")
        })
        .collect();
    let vocab = fit_vocabulary(&docs, 10_000).map_err(|e| e.to_string())?;
    let n = vocab.corpus_size() as f64;
    let mut ubiquitous = 0;
    let mut worst = 0.0f64;
    for doc in &docs {
        let t = vectorize_tfidf(doc, &vocab);
        let len = doc.chars().count() as f64;
        for (i, gram) in vocab.grams().iter().enumerate() {
            let df = vocab.doc_freq()[i] as f64;
            let w = t.weight(i as u32);
            if df == n {
                ensure(w == 0.0, || format!("gram {gram:?} with df = N has weight {w}"))?;
                ubiquitous += 1;
            }
            let oracle = overlapping_count(doc, gram) as f64 / len * (n / df).ln();
            worst = worst.max((w - oracle).abs());
        }
    }
    ensure(worst <= 1e-12, || format!("max deviation from brute-force TF-IDF {worst:e}"))?;
    ensure(ubiquitous > 0, || "no df = N grams exercised".into())?;
    Ok(format!(
        "ababa -> {:.12} = (2/5) ln 2; {ubiquitous} df=N weights all 0; brute-force deviation {worst:.1e}",
        v.weight(0)
    ))
}

// ---------------------------------------------------------------------------
// Perplexity

fn perplexity_cases() -> Outcome {
    let mut lines = Vec::new();
    for v in [2.0f64, 10.0, 50_000.0] {
        for len in [1usize, 7, 1000] {
            let tlp = TokenLogProbs {
                id: format!("uniform-{v}-{len}"),
                scorer_tag: String::new(),
                logprobs: vec![(1.0 / v).ln(); len],
            };
            let p = perplexity(&tlp).map_err(|e| e.to_string())?;
            ensure((p - v).abs() <= 1e-10, || format!("V={v}, {len} tokens: perplexity {p}"))?;
        }
        lines.push(format!("V={v}"));
    }
    let tlp = TokenLogProbs {
        id: "mixed".into(),
        scorer_tag: String::new(),
        logprobs: vec![0.5f64.ln(), 0.125f64.ln()],
    };
    let p = perplexity(&tlp).map_err(|e| e.to_string())?;
    ensure((p - 4.0).abs() <= 1e-10, || format!("[ln .5, ln .125] gave {p}"))?;
    Ok(format!("uniform {} recovered within 1e-10; [ln .5, ln .125] -> {p}", lines.join(", ")))
}

// ---------------------------------------------------------------------------
// Store persistence

fn store_round_trip(s: &Synthetic) -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = dir.path().join("store.json");
    save_store(&s.store, &path).map_err(|e| e.to_string())?;
    let loaded = load_store(&path).map_err(|e| e.to_string())?;
    let bits = |v: &Verdict| {
        (
            v.predicted,
            v.s_prob.to_bits(),
            v.d_prob.to_bits(),
            v.confidence.to_bits(),
            v.distance.to_bits(),
        )
    };
    let mut queries = 0;
    for (p, original) in s.heldout_pairs.iter().zip(&s.verdicts) {
        let v = loaded
            .classify(&s.vectors[&p.a.id()], &s.vectors[&p.b.id()])
            .map_err(|e| e.to_string())?;
        ensure(bits(&v) == bits(original), || format!("verdict differs for {}/{}", p.a.id(), p.b.id()))?;
        queries += 1;
    }

    let bytes = std::fs::read(&path).map_err(|e| e.to_string())?;
    let text = String::from_utf8(bytes.clone()).map_err(|e| e.to_string())?;
    let start = text.find("\"same\":[").ok_or("no same array")?;
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let digits: Vec<usize> = text[start..]
        .char_indices()
        .filter(|(_, c)| c.is_ascii_digit())
        .map(|(i, _)| start + i)
        .collect();
    let mut corrupted = 0;
    for _ in 0..20 {
        let pos = digits[rng.random_range(0..digits.len())];
        let mut bad = bytes.clone();
        bad[pos] = if bad[pos] == b'9' { b'0' } else { bad[pos] + 1 };
        match DistanceDistribution::from_bytes(&bad) {
            Err(Error::CorruptStore(_)) => corrupted += 1,
            other => return Err(format!("corrupted byte at {pos} gave {other:?}")),
        }
    }
    ensure(queries >= 1000, || format!("only {queries} queries"))?;
    Ok(format!(
        "{queries} held-out queries bit-identical after save/load; {corrupted} single-byte corruptions all rejected as \
         corrupt_store"
    ))
}

// ---------------------------------------------------------------------------
// Imitation

fn imitation_offline(s: &Synthetic) -> Outcome {
    let tails: HashMap<&str, &Segment> = s
        .heldout_segments
        .iter()
        .filter(|seg| seg.position == Position::Tail)
        .map(|seg| (seg.doc_id.as_str(), seg))
        .collect();
    let sources: Vec<&RawDocument> = s.docs.iter().filter(|d| tails.contains_key(d.id.as_str())).collect();
    let prompts: Vec<_> = sources
        .iter()
        .map(|d| make_prompt(d, Strategy::Completion, None, &PromptOptions::default()))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;

    let score = |records: Vec<GenerationRecord>| -> Result<(f64, usize), String> {
        let offline = OfflineCompletions::from_records(records).map_err(|e| e.to_string())?;
        let batch = run_batch(&prompts, &offline, 8).map_err(|e| e.to_string())?;
        ensure(batch.failures.is_empty(), || format!("{} generation failures", batch.failures.len()))?;
        let table = score_imitation(&batch.records, &s.heldout_segments, &s.featurizer, &s.store, &ScoreOptions::default())
            .map_err(|e| e.to_string())?;
        let cell = table.cell("recorded", Strategy::Completion).ok_or("missing cell")?;
        Ok((cell.accuracy().unwrap_or(f64::NAN), cell.n))
    };
    let record = |source: &str, text: &str| GenerationRecord {
        source_doc_id: source.to_string(),
        strategy: Strategy::Completion,
        model_tag: "recorded".into(),
        text: text.to_string(),
    };

    let own: Vec<GenerationRecord> = sources.iter().map(|d| record(&d.id, &tails[d.id.as_str()].text)).collect();
    let (own_acc, n) = score(own)?;
    ensure(own_acc == 1.0, || format!("own-tail completions matched {:.2}%", 100.0 * own_acc))?;

    // Each source gets the tail of a document by the other author.
    let by_author = |a: &str| -> Vec<&RawDocument> {
        sources.iter().copied().filter(|d| d.author_id.as_deref() == Some(a)).collect()
    };
    let (a0, a1) = (by_author("author0"), by_author("author1"));
    let shuffled: Vec<GenerationRecord> = sources
        .iter()
        .map(|d| {
            let others = if d.author_id.as_deref() == Some("author0") { &a1 } else { &a0 };
            let pos = a0.iter().chain(&a1).position(|x| x.id == d.id).unwrap();
            record(&d.id, &tails[others[pos % others.len()].id.as_str()].text)
        })
        .collect();
    let (shuffled_acc, _) = score(shuffled)?;
    let fp_rate = s.report.confusion.false_positive_rate();
    ensure((shuffled_acc - fp_rate).abs() <= 0.03, || {
        format!("shuffled accuracy {shuffled_acc:.4} vs false-positive rate {fp_rate:.4}")
    })?;
    Ok(format!(
        "{n} own-tail completions: {:.1}% matched; shuffled-author: {:.2}% vs held-out FP rate {:.2}% (within 3 points)",
        100.0 * own_acc,
        100.0 * shuffled_acc,
        100.0 * fp_rate
    ))
}

// ---------------------------------------------------------------------------
// Construction speed

fn construction_speed() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let labelled: Vec<(f64, Label)> = (0..100_000)
        .map(|i| {
            if i % 2 == 0 {
                (rng.random_range(0.0..0.8), Label::SameAuthor)
            } else {
                (rng.random_range(0.2..1.0), Label::DifferentAuthor)
            }
        })
        .collect();
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = dir.path().join("store.json");
    let t = Instant::now();
    let store = DistanceDistribution::from_labelled(labelled, Metric::Cosine, StoreMeta::default())
        .map_err(|e| e.to_string())?;
    save_store(&store, &path).map_err(|e| e.to_string())?;
    let elapsed = t.elapsed();
    ensure(store.n_same() == 50_000 && store.n_diff() == 50_000, || "wrong class sizes".into())?;
    ensure(elapsed < Duration::from_secs(5), || format!("took {:.3}s", elapsed.as_secs_f64()))?;
    Ok(format!(
        "100,000 distances -> 50,000 + 50,000 store written in {:.3}s (< 5s)",
        elapsed.as_secs_f64()
    ))
}
