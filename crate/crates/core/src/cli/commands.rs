use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use super::{
    BuildArgs, CleanArgs, DetectArgs, EmbedManifestArgs, EvaluateArgs, FeatureArgs, ImitateArgs, Outcome, PairsArgs,
    ReportArgs, VerifyArgs,
};
use crate::config::RunConfig;
use crate::corpus::{
    build_pairs, build_pairs_with_rng, load_corpus, segment_document, split_documents, Cleaner, CleaningReport,
    DictionarySource, Label, Position, RawDocument, Segment, TextPair,
};
use crate::detection::{detectability_report, load_logprobs};
use crate::evaluation::{evaluate as eval_report, mcnemar};
use crate::features::{fit_vocabulary, load_embeddings, Featurizer, NGramVocabulary, StyleVector};
use crate::imitation::{
    generation_id, make_prompt, run_batch, score_imitation, BatchOutcome, FailureEntry, GenerationRecord, Generator,
    HttpEndpoint, OfflineCompletions, PromptOptions, Prompt, ScoreOptions, Strategy,
};
use crate::io::{read_jsonl, to_jsonl, write_once};
use crate::rng;
use crate::verifier::{load_store, DistanceDistribution, StoreMeta, StoreWarning, Verdict};
use crate::{Error, Result};

pub(super) struct Context {
    pub config: RunConfig,
    pub force: bool,
}

impl Context {
    fn write(&self, path: &Path, bytes: &[u8]) -> Result<()> {
        write_once(path, bytes, self.force)
    }
}

fn required(flag: Option<PathBuf>, fallback: &Option<PathBuf>, what: &str) -> Result<PathBuf> {
    flag.or_else(|| fallback.clone())
        .ok_or_else(|| Error::InvalidConfig(format!("missing --{what} (or paths.{what} in the config)")))
}

fn out_dir(flag: Option<PathBuf>, config: &RunConfig) -> Result<PathBuf> {
    required(flag, &config.paths.outputs, "out").map_err(|_| Error::InvalidConfig("missing --out (or paths.outputs in the config)".into()))
}

fn load_segments(path: &Path) -> Result<Vec<Segment>> {
    let segments: Vec<Segment> = read_jsonl(path)?;
    let mut seen = HashMap::with_capacity(segments.len());
    for s in &segments {
        if seen.insert(s.id(), ()).is_some() {
            return Err(Error::DuplicateId(s.id()));
        }
    }
    Ok(segments)
}

fn segment_index(segments: &[Segment]) -> HashMap<String, &Segment> {
    segments.iter().map(|s| (s.id(), s)).collect()
}

/// Distinct segments referenced by `pairs`, sorted by id.
fn referenced<'a>(pairs: &[TextPair], index: &HashMap<String, &'a Segment>) -> Result<Vec<&'a Segment>> {
    let mut ids: Vec<String> = pairs.iter().flat_map(|p| [p.a.id(), p.b.id()]).collect();
    ids.sort_unstable();
    ids.dedup();
    ids.iter()
        .map(|id| {
            index
                .get(id)
                .copied()
                .ok_or_else(|| Error::malformed("pairs", format!("unknown segment `{id}`")))
        })
        .collect()
}

fn featurizer(vocab: NGramVocabulary, alpha: f64, embeddings: Option<&Path>) -> Result<Featurizer> {
    if alpha == 0.0 {
        return Featurizer::new(vocab, alpha, HashMap::new());
    }
    let path = embeddings
        .ok_or_else(|| Error::InvalidConfig(format!("alpha = {alpha} needs --embeddings (or paths.embeddings)")))?;
    Featurizer::new(vocab, alpha, load_embeddings(path)?)
}

fn vectorize_segments(featurizer: &Featurizer, segments: &[&Segment]) -> Result<HashMap<String, StyleVector>> {
    segments
        .par_iter()
        .map(|s| {
            let id = s.id();
            let v = featurizer.vectorize(&id, &s.text)?;
            Ok((id, v))
        })
        .collect()
}

fn classify_pairs(
    store: &DistanceDistribution,
    vectors: &HashMap<String, StyleVector>,
    pairs: &[TextPair],
) -> Result<Vec<Verdict>> {
    pairs
        .par_iter()
        .map(|p| store.classify(&vectors[&p.a.id()], &vectors[&p.b.id()]))
        .collect()
}

/// Store, vocabulary and the featurizer matching the store's fusion weight.
struct Verifier {
    store: DistanceDistribution,
    featurizer: Featurizer,
}

fn open_verifier(config: &RunConfig, store: Option<PathBuf>, features: &FeatureArgs) -> Result<Verifier> {
    let store_path = required(store, &config.paths.store, "store")?;
    let vocab_path = required(features.vocab.clone(), &config.paths.vocab, "vocab")?;
    let embeddings = features.embeddings.clone().or_else(|| config.paths.embeddings.clone());
    let store = load_store(&store_path)?;
    let vocab = NGramVocabulary::load(&vocab_path)?;
    warn(&store.check_vocabulary(&vocab.hash()));
    let featurizer = featurizer(vocab, store.meta().alpha, embeddings.as_deref())?;
    Ok(Verifier { store, featurizer })
}

fn warn(warnings: &[StoreWarning]) {
    for w in warnings {
        match w {
            StoreWarning::VocabularyMismatch { store, active } => eprintln!(
                "{}",
                json!({"warning": {"kind": "vocabulary_mismatch", "store": store, "active": active}})
            ),
        }
    }
}

fn pretty<T: Serialize>(v: &T) -> Vec<u8> {
    serde_json::to_vec_pretty(v).expect("in-memory serialization")
}

fn value<T: Serialize>(v: T) -> Value {
    serde_json::to_value(v).expect("in-memory serialization")
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

type SegmentResult = Result<(Segment, Segment)>;

pub(super) fn clean(ctx: Context, args: CleanArgs) -> Result<Outcome> {
    let mut config = ctx.config.clone();
    if let Some(b) = args.block_words {
        config.block_words = b;
    }
    if let Some(m) = args.min_words {
        config.cleaning.min_words = m;
    }
    if let Some(path) = args.dictionary {
        config.cleaning.dictionary = DictionarySource::File(path);
    }
    if args.no_dictionary {
        config.cleaning.dictionary = DictionarySource::Disabled;
    }
    config.validate()?;
    let corpus = required(args.corpus, &config.paths.corpus, "corpus")?;
    let out = out_dir(args.out, &config)?;

    let docs = load_corpus(&corpus)?;
    let cleaner = Cleaner::new(config.cleaning.clone())?;
    let results: Vec<(CleaningReport, Option<SegmentResult>)> = docs
        .par_iter()
        .map(|doc| {
            let cleaned = cleaner.clean(doc)?;
            let segments = cleaned.report.accepted.then(|| {
                let stripped = RawDocument {
                    text: cleaned.text.clone(),
                    ..doc.clone()
                };
                segment_document(&stripped, config.block_words)
            });
            Ok((cleaned.report, segments))
        })
        .collect::<Result<_>>()?;

    let mut reports = Vec::with_capacity(results.len());
    let mut segments = Vec::new();
    let mut ineligible = Vec::new();
    for (report, segs) in results {
        match segs {
            Some(Ok((h, t))) => segments.extend([h, t]),
            Some(Err(Error::IneligibleDocument { doc_id, .. })) => ineligible.push(doc_id),
            Some(Err(e)) => return Err(e),
            None => {}
        }
        reports.push(report);
    }
    ctx.write(&out.join("cleaning_reports.jsonl"), &to_jsonl(&reports))?;
    ctx.write(&out.join("segments.jsonl"), &to_jsonl(&segments))?;

    let accepted = reports.iter().filter(|r| r.accepted).count();
    let mut rejections: BTreeMap<String, usize> = BTreeMap::new();
    for r in &reports {
        for reason in &r.reject_reasons {
            *rejections.entry(value(reason).as_str().unwrap_or_default().to_string()).or_default() += 1;
        }
    }
    let summary = json!({
        "documents": reports.len(),
        "accepted": accepted,
        "segmented": segments.len() / 2,
        "ineligible": ineligible,
        "rejections": rejections,
    });
    let human = format!(
        "{} documents, {} accepted, {} segmented, {} too short to segment\nrejections: {}\n",
        reports.len(),
        accepted,
        segments.len() / 2,
        ineligible.len(),
        serde_json::to_string(&rejections).expect("JSON map")
    );
    Ok(Outcome { summary, human })
}

pub(super) fn pairs(ctx: Context, args: PairsArgs) -> Result<Outcome> {
    let mut config = ctx.config.clone();
    let p = &mut config.pairs;
    if let Some(n) = args.n_positive {
        p.n_positive = n;
    }
    if let Some(n) = args.n_negative {
        p.n_negative = n;
    }
    if let Some(f) = args.holdout_fraction {
        p.holdout_fraction = f;
    }
    if let Some(n) = args.holdout_positive {
        p.holdout_positive = n;
    }
    if let Some(n) = args.holdout_negative {
        p.holdout_negative = n;
    }
    config.validate()?;
    let seed = config.require_seed("pairs")?;
    let out = out_dir(args.out, &config)?;
    let p = &config.pairs;
    if p.holdout_fraction > 0.0 && p.holdout_positive + p.holdout_negative == 0 {
        return Err(Error::InvalidConfig(
            "holdout_fraction > 0 needs holdout_positive and/or holdout_negative".into(),
        ));
    }

    let segments = load_segments(&args.segments)?;
    let (construction_segments, heldout_segments) = split_documents(&segments, p.holdout_fraction, seed)?;
    let construction = build_pairs(&construction_segments, p.n_positive, p.n_negative, seed)?;
    ctx.write(&out.join("pairs.jsonl"), &to_jsonl(&construction))?;
    let mut summary = json!({"construction": construction.len()});
    let mut human = format!("{} construction pairs\n", construction.len());
    if p.holdout_fraction > 0.0 {
        let mut rng = rng::stream(seed, rng::PAIRS_HOLDOUT);
        let heldout = build_pairs_with_rng(&heldout_segments, p.holdout_positive, p.holdout_negative, &mut rng)?;
        ctx.write(&out.join("heldout_pairs.jsonl"), &to_jsonl(&heldout))?;
        summary["heldout"] = json!(heldout.len());
        let _ = writeln!(human, "{} held-out pairs", heldout.len());
    }
    Ok(Outcome { summary, human })
}

#[derive(Serialize)]
struct ManifestRecord<'a> {
    id: String,
    text: &'a str,
}

pub(super) fn embed_manifest(ctx: Context, args: EmbedManifestArgs) -> Result<Outcome> {
    if args.segments.is_none() && args.generations.is_none() {
        return Err(Error::InvalidConfig("embed-manifest needs --segments and/or --generations".into()));
    }
    let segments = match &args.segments {
        Some(p) => load_segments(p)?,
        None => Vec::new(),
    };
    let generations: Vec<GenerationRecord> = match &args.generations {
        Some(p) => read_jsonl(p)?,
        None => Vec::new(),
    };
    let records: Vec<ManifestRecord<'_>> = segments
        .iter()
        .map(|s| ManifestRecord { id: s.id(), text: &s.text })
        .chain(generations.iter().map(|g| ManifestRecord {
            id: generation_id(g),
            text: &g.text,
        }))
        .collect();
    ctx.write(&args.out, &to_jsonl(&records))?;
    Ok(Outcome {
        summary: json!({"records": records.len()}),
        human: format!("{} texts to embed\n", records.len()),
    })
}

pub(super) fn build(ctx: Context, args: BuildArgs) -> Result<Outcome> {
    let mut config = ctx.config.clone();
    if let Some(a) = args.alpha {
        config.alpha = a;
    }
    if let Some(m) = args.metric {
        config.metric = m;
    }
    if let Some(g) = args.max_grams {
        config.max_grams = g;
    }
    config.validate()?;
    let store_path = required(args.store, &config.paths.store, "store")?;
    let vocab_path = required(args.features.vocab, &config.paths.vocab, "vocab")?;
    let embeddings = args.features.embeddings.or_else(|| config.paths.embeddings.clone());

    let segments = load_segments(&args.segments)?;
    let pairs: Vec<TextPair> = read_jsonl(&args.pairs)?;
    let index = segment_index(&segments);
    let used = referenced(&pairs, &index)?;
    let texts: Vec<&str> = used.iter().map(|s| s.text.as_str()).collect();
    let vocab = fit_vocabulary(&texts, config.max_grams)?;
    let vocab_hash = vocab.hash();
    let vocab_json = vocab.to_json();

    let featurizer = featurizer(vocab, config.alpha, embeddings.as_deref())?;
    let vectors = vectorize_segments(&featurizer, &used)?;
    let triples: Vec<(&StyleVector, &StyleVector, Label)> = pairs
        .iter()
        .map(|p| (&vectors[&p.a.id()], &vectors[&p.b.id()], p.label))
        .collect();
    let build_timestamp = args.timestamp.then(|| {
        std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map_or(0, |d| d.as_secs())
    });
    let store = DistanceDistribution::build(
        &triples,
        config.metric,
        StoreMeta {
            vocab_hash: vocab_hash.clone(),
            alpha: config.alpha,
            build_timestamp,
        },
    )?;
    let store_bytes = store.to_bytes();
    ctx.write(&vocab_path, vocab_json.as_bytes())?;
    ctx.write(&store_path, &store_bytes)?;

    let summary = json!({
        "n_same": store.n_same(),
        "n_diff": store.n_diff(),
        "metric": config.metric,
        "alpha": config.alpha,
        "vocab_size": featurizer.vocab().len(),
        "vocab_hash": vocab_hash,
        "store_sha256": sha256_hex(&store_bytes),
    });
    let human = format!(
        "store {}: {} same-author and {} different-author distances ({}, alpha {})\nvocabulary {}: {} grams\n",
        store_path.display(),
        store.n_same(),
        store.n_diff(),
        config.metric,
        config.alpha,
        vocab_path.display(),
        featurizer.vocab().len()
    );
    Ok(Outcome { summary, human })
}

fn describe(v: &Verdict) -> String {
    format!(
        "{} (confidence {:.3}, S {:.4}, D {:.4}, distance {:.6})",
        v.predicted.as_str(),
        v.confidence,
        v.s_prob,
        v.d_prob,
        v.distance
    )
}

#[derive(Serialize)]
struct PairVerdict<'a> {
    #[serde(flatten)]
    pair: &'a TextPair,
    verdict: &'a Verdict,
}

pub(super) fn verify(ctx: Context, args: VerifyArgs) -> Result<Outcome> {
    ctx.config.validate()?;
    let verifier = open_verifier(&ctx.config, args.store, &args.features)?;
    if let (Some(a), Some(b)) = (&args.a, &args.b) {
        let read = |p: &PathBuf| fs::read_to_string(p).map_err(|e| Error::io(p, e));
        let stem = |p: &PathBuf| p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        let a_id = args.a_id.clone().unwrap_or_else(|| stem(a));
        let b_id = args.b_id.clone().unwrap_or_else(|| stem(b));
        let va = verifier.featurizer.vectorize(&a_id, &read(a)?)?;
        let vb = verifier.featurizer.vectorize(&b_id, &read(b)?)?;
        let verdict = verifier.store.classify(&va, &vb)?;
        return Ok(Outcome {
            summary: value(verdict),
            human: format!("{}\n", describe(&verdict)),
        });
    }
    let (Some(pairs_path), Some(segments_path)) = (&args.pairs, &args.segments) else {
        return Err(Error::InvalidConfig("verify needs --a/--b or --pairs/--segments".into()));
    };
    let segments = load_segments(segments_path)?;
    let pairs: Vec<TextPair> = read_jsonl(pairs_path)?;
    let index = segment_index(&segments);
    let vectors = vectorize_segments(&verifier.featurizer, &referenced(&pairs, &index)?)?;
    let verdicts = classify_pairs(&verifier.store, &vectors, &pairs)?;
    let records: Vec<PairVerdict<'_>> = pairs
        .iter()
        .zip(&verdicts)
        .map(|(pair, verdict)| PairVerdict { pair, verdict })
        .collect();
    let same = verdicts.iter().filter(|v| v.predicted == Label::SameAuthor).count();
    match &args.out {
        Some(out) => {
            ctx.write(out, &to_jsonl(&records))?;
            Ok(Outcome {
                summary: json!({"pairs": records.len(), "same_author": same}),
                human: format!("{} verdicts ({} same-author) written to {}\n", records.len(), same, out.display()),
            })
        }
        None => Ok(Outcome {
            summary: json!({"verdicts": records}),
            human: String::from_utf8(to_jsonl(&records)).expect("JSON is UTF-8"),
        }),
    }
}

pub(super) fn evaluate(ctx: Context, args: EvaluateArgs) -> Result<Outcome> {
    ctx.config.validate()?;
    let verifier = open_verifier(&ctx.config, args.store, &args.features)?;
    let segments = load_segments(&args.segments)?;
    let pairs: Vec<TextPair> = read_jsonl(&args.pairs)?;
    let index = segment_index(&segments);
    let used = referenced(&pairs, &index)?;
    let vectors = vectorize_segments(&verifier.featurizer, &used)?;
    let verdicts = classify_pairs(&verifier.store, &vectors, &pairs)?;
    let labelled: Vec<(Verdict, Label)> = verdicts.iter().copied().zip(pairs.iter().map(|p| p.label)).collect();
    let mut report = eval_report(&labelled)?;

    if let Some(baseline_path) = &args.baseline_store {
        let baseline = load_store(baseline_path)?;
        warn(&baseline.check_vocabulary(&verifier.featurizer.vocab().hash()));
        let embeddings = args.features.embeddings.clone().or_else(|| ctx.config.paths.embeddings.clone());
        let base_featurizer = featurizer(
            verifier.featurizer.vocab().clone(),
            baseline.meta().alpha,
            embeddings.as_deref(),
        )?;
        let base_vectors = vectorize_segments(&base_featurizer, &used)?;
        let base_verdicts = classify_pairs(&baseline, &base_vectors, &pairs)?;
        let preds: Vec<Label> = verdicts.iter().map(|v| v.predicted).collect();
        let base_preds: Vec<Label> = base_verdicts.iter().map(|v| v.predicted).collect();
        let truth: Vec<Label> = pairs.iter().map(|p| p.label).collect();
        report.mcnemar = Some(mcnemar(&base_preds, &preds, &truth)?);
    }
    if let Some(out) = &args.out {
        ctx.write(out, &pretty(&report))?;
    }
    Ok(Outcome {
        summary: value(&report),
        human: report.to_table(),
    })
}

pub(super) fn imitate(ctx: Context, args: ImitateArgs) -> Result<Outcome> {
    let mut config = ctx.config.clone();
    if let Some(n) = args.sample {
        config.imitation.sample = n;
    }
    if args.reclean {
        config.imitation.reclean = true;
    }
    config.validate()?;
    let out = out_dir(args.out, &config)?;
    let corpus = required(args.corpus, &config.paths.corpus, "corpus")?;
    let strategies = if args.strategies.is_empty() {
        Strategy::ALL.to_vec()
    } else {
        args.strategies.clone()
    };
    let generator: Box<dyn Generator> = match &args.offline {
        Some(path) => Box::new(OfflineCompletions::load(path)?),
        None => {
            let endpoint = config
                .endpoint
                .clone()
                .ok_or_else(|| Error::InvalidConfig("imitate needs --offline or an [endpoint] section".into()))?;
            Box::new(HttpEndpoint::new(endpoint)?)
        }
    };
    let max_in_flight = match (&args.offline, &config.endpoint) {
        (None, Some(e)) => e.max_in_flight,
        _ => rayon::current_num_threads(),
    };

    let segments = load_segments(&args.segments)?;
    let with_reference: std::collections::HashSet<&str> = segments
        .iter()
        .filter(|s| s.position == Position::Tail)
        .map(|s| s.doc_id.as_str())
        .collect();
    let mut docs: Vec<RawDocument> = load_corpus(&corpus)?
        .into_iter()
        .filter(|d| with_reference.contains(d.id.as_str()))
        .collect();
    if config.imitation.sample > 0 && config.imitation.sample < docs.len() {
        let seed = config.require_seed("imitate --sample")?;
        let mut rng = rng::stream(seed, rng::IMITATION_SAMPLE);
        let mut picked = rand::seq::index::sample(&mut rng, docs.len(), config.imitation.sample).into_vec();
        picked.sort_unstable();
        docs = picked.into_iter().map(|i| docs[i].clone()).collect();
    }

    let options = PromptOptions {
        min_half_words: config.imitation.min_half_words,
    };
    let mut prompts: Vec<Prompt> = Vec::new();
    let mut failures: Vec<FailureEntry> = Vec::new();
    for doc in &docs {
        for &strategy in &strategies {
            match make_prompt(doc, strategy, None, &options) {
                Ok(prompt) => prompts.push(prompt),
                Err(e) => failures.push(FailureEntry {
                    source_doc_id: doc.id.clone(),
                    strategy,
                    kind: e.kind().to_string(),
                    message: e.to_string(),
                }),
            }
        }
    }
    let BatchOutcome {
        records,
        failures: generation_failures,
    } = run_batch(&prompts, generator.as_ref(), max_in_flight)?;
    failures.extend(generation_failures);
    ctx.write(&out.join("prompts.jsonl"), &to_jsonl(&prompts))?;
    ctx.write(&out.join("generations.jsonl"), &to_jsonl(&records))?;
    ctx.write(&out.join("failures.jsonl"), &to_jsonl(&failures))?;

    let verifier = open_verifier(&config, args.store, &args.features)?;
    let score_options = ScoreOptions {
        reclean: if config.imitation.reclean {
            Some(Cleaner::new(config.cleaning.clone())?)
        } else {
            None
        },
        ..ScoreOptions::default()
    };
    let table = score_imitation(&records, &segments, &verifier.featurizer, &verifier.store, &score_options)?;
    let csv = table.to_csv();
    ctx.write(&out.join("imitation.csv"), csv.as_bytes())?;
    ctx.write(&out.join("imitation.json"), &pretty(&table))?;

    let endpoint_failures = failures.iter().filter(|f| f.kind == "endpoint_failure").count();
    if endpoint_failures > 0 {
        return Err(Error::EndpointFailure(format!(
            "{endpoint_failures} of {} requests failed; see {}",
            prompts.len(),
            out.join("failures.jsonl").display()
        )));
    }

    let summary = json!({
        "documents": docs.len(),
        "prompts": prompts.len(),
        "generations": records.len(),
        "failures": failures.len(),
        "cells": table.cells,
    });
    let human = format!(
        "{} documents, {} prompts, {} generations, {} failures\n{}",
        docs.len(),
        prompts.len(),
        records.len(),
        failures.len(),
        csv
    );
    Ok(Outcome { summary, human })
}

pub(super) fn detect(ctx: Context, args: DetectArgs) -> Result<Outcome> {
    let out = out_dir(args.out, &ctx.config)?;
    let mut groups = BTreeMap::new();
    for (name, path) in &args.groups {
        if groups.insert(name.clone(), load_logprobs(path)?).is_some() {
            return Err(Error::InvalidConfig(format!("group `{name}` given twice")));
        }
    }
    let report = detectability_report(&groups, &args.thresholds)?;
    let histogram = report.histogram_csv(args.bin_width)?;
    ctx.write(&out.join("perplexity.json"), &pretty(&report))?;
    ctx.write(&out.join("perplexity_histogram.csv"), histogram.as_bytes())?;
    ctx.write(&out.join("perplexity_cdf.csv"), report.cdf_csv().as_bytes())?;

    let mut human = String::new();
    for (group, mean) in &report.group_means {
        let _ = writeln!(human, "{group}: {} documents, mean perplexity {mean:.3}", report.per_doc[group].len());
    }
    for row in &report.cdf_at {
        let cells: Vec<String> = row.fractions.iter().map(|(g, f)| format!("{g} {:.1}%", 100.0 * f)).collect();
        let _ = writeln!(human, "ppl <= {}: {}", row.threshold, cells.join(", "));
    }
    Ok(Outcome {
        summary: json!({"group_means": report.group_means, "cdf_at": report.cdf_at}),
        human,
    })
}

fn distance_cdf_csv(store: &DistanceDistribution) -> String {
    let mut out = String::from("label,distance,cdf\n");
    for (label, values) in [("same_author", store.same_sorted()), ("different_author", store.diff_sorted())] {
        let n = values.len() as f64;
        let mut i = 0;
        while i < values.len() {
            let j = i + values[i..].iter().take_while(|&&x| x == values[i]).count();
            let _ = writeln!(out, "{label},{},{}", values[i], j as f64 / n);
            i = j;
        }
    }
    out
}

fn distance_histogram_csv(store: &DistanceDistribution, bin_width: f64) -> Result<String> {
    if !(bin_width.is_finite() && bin_width > 0.0) {
        return Err(Error::InvalidConfig(format!("bin width {bin_width} must be positive")));
    }
    let max = store
        .same_sorted()
        .last()
        .copied()
        .unwrap_or(0.0)
        .max(store.diff_sorted().last().copied().unwrap_or(0.0));
    let bins = (max / bin_width).floor() as usize + 1;
    let mut out = String::from("label,bin_lo,bin_hi,count\n");
    for (label, values) in [("same_author", store.same_sorted()), ("different_author", store.diff_sorted())] {
        let mut counts = vec![0u64; bins];
        for v in values {
            counts[((v / bin_width).floor() as usize).min(bins - 1)] += 1;
        }
        for (k, c) in counts.iter().enumerate() {
            let _ = writeln!(out, "{label},{},{},{c}", k as f64 * bin_width, (k + 1) as f64 * bin_width);
        }
    }
    Ok(out)
}

fn quantiles(sorted: &[f64]) -> Value {
    let q = |p: f64| sorted[((sorted.len() - 1) as f64 * p).round() as usize];
    json!({"n": sorted.len(), "min": q(0.0), "q25": q(0.25), "median": q(0.5), "q75": q(0.75), "max": q(1.0)})
}

pub(super) fn report(ctx: Context, args: ReportArgs) -> Result<Outcome> {
    let out = out_dir(args.out, &ctx.config)?;
    let store_path = required(args.store, &ctx.config.paths.store, "store")?;
    let store = load_store(&store_path)?;
    let summary = json!({
        "metric": store.metric(),
        "alpha": store.meta().alpha,
        "vocab_hash": store.meta().vocab_hash,
        "same_author": quantiles(store.same_sorted()),
        "different_author": quantiles(store.diff_sorted()),
    });
    ctx.write(&out.join("store_summary.json"), &pretty(&summary))?;
    ctx.write(&out.join("distances_cdf.csv"), distance_cdf_csv(&store).as_bytes())?;
    ctx.write(
        &out.join("distances_histogram.csv"),
        distance_histogram_csv(&store, args.bin_width)?.as_bytes(),
    )?;

    let mut files: Vec<PathBuf> = fs::read_dir(&out)
        .map_err(|e| Error::io(&out, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.file_name().is_some_and(|n| n != "manifest.json"))
        .collect();
    files.sort();
    let mut entries = Vec::with_capacity(files.len());
    for path in &files {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        entries.push(json!({
            "file": path.file_name().map(|n| n.to_string_lossy().into_owned()),
            "bytes": bytes.len(),
            "sha256": sha256_hex(&bytes),
        }));
    }
    let manifest = json!({"store": summary, "files": entries});
    ctx.write(&out.join("manifest.json"), &pretty(&manifest))?;
    let human = format!("{} files listed in {}\n", files.len(), out.join("manifest.json").display());
    Ok(Outcome { summary: manifest, human })
}
