//! The divide, train, merge, eval, stats and missing-words commands.

use std::collections::{BTreeSet, HashSet};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use anyhow::{bail, Context};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use subembed::corpus::{build_vocabulary, kl_divergence, Distribution};
use subembed::eval::{self, Benchmark, EvalResult};
use subembed::merge::merge_models;
use subembed::sampler::{
    divide, missing_word_threshold, subcorpus_vocabulary, vocabulary_coverage, SamplingPlan,
    Selection,
};
use subembed::sgns::{train_submodel_logged, TrainLog};
use subembed::{
    write_atomic, EmbeddingModel, EncodedCorpus, MergeConfig, MergeMethod, MergeReport,
    SentenceStream, Strategy, SubCorpusSpec, TrainConfig, Vocabulary,
};

use crate::config::PipelineConfig;

fn create_dir(path: &Path) -> anyhow::Result<()> {
    fs::create_dir_all(path).with_context(|| format!("cannot create {}", path.display()))
}

fn write_text(path: &Path, text: &str) -> anyhow::Result<()> {
    write_atomic(path, |w| w.write_all(text.as_bytes()))?;
    Ok(())
}

fn plan(cfg: &PipelineConfig, rate: f64) -> anyhow::Result<SamplingPlan> {
    Ok(SamplingPlan::new(rate, cfg.seed, cfg.train.epochs)?)
}

/// Full-corpus vocabulary and id-encoded corpus.
pub fn load_corpus(cfg: &PipelineConfig) -> anyhow::Result<(SentenceStream, EncodedCorpus)> {
    let path = cfg.corpus_path()?;
    let stream = SentenceStream::open(path)?;
    let vocab = build_vocabulary(&stream, cfg.min_count, cfg.max_vocab)
        .with_context(|| format!("building vocabulary of {}", path.display()))?;
    let corpus = EncodedCorpus::encode(&stream, vocab)?;
    Ok((stream, corpus))
}

pub fn spec_path(dir: &Path, id: usize) -> PathBuf {
    dir.join(format!("spec_{id}.tsv"))
}

pub fn submodel_path(dir: &Path, id: usize) -> PathBuf {
    dir.join(format!("sub_{id}.vec"))
}

/// Writes one spec file per sub-model and returns their paths.
pub fn cmd_divide(cfg: &PipelineConfig) -> anyhow::Result<Vec<PathBuf>> {
    let stream = SentenceStream::open(cfg.corpus_path()?)?;
    let specs = divide(cfg.strategy, stream.len(), &plan(cfg, cfg.rate)?)?;
    let dir = cfg.specs_dir();
    create_dir(&dir)?;
    for old in list_indexed(&dir, "spec_", ".tsv")? {
        fs::remove_file(&old.1).with_context(|| format!("removing {}", old.1.display()))?;
    }
    let mut paths = Vec::with_capacity(specs.len());
    for spec in &specs {
        let path = spec_path(&dir, spec.sub_model_id);
        spec.write(&path)?;
        paths.push(path);
    }
    Ok(paths)
}

/// Files `<prefix><n><suffix>` in `dir`, sorted by `n`.
pub fn list_indexed(dir: &Path, prefix: &str, suffix: &str) -> anyhow::Result<Vec<(usize, PathBuf)>> {
    if !dir.exists() {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).with_context(|| format!("reading {}", dir.display()))? {
        let path = entry?.path();
        let Some(name) = path.file_name().and_then(|n| n.to_str()) else {
            continue;
        };
        if let Some(n) = name
            .strip_prefix(prefix)
            .and_then(|r| r.strip_suffix(suffix))
            .and_then(|n| n.parse::<usize>().ok())
        {
            out.push((n, path));
        }
    }
    out.sort();
    Ok(out)
}

pub fn read_specs(dir: &Path) -> anyhow::Result<Vec<SubCorpusSpec>> {
    let paths = list_indexed(dir, "spec_", ".tsv")?;
    if paths.is_empty() {
        bail!("no spec files in {}; run divide first", dir.display());
    }
    paths
        .iter()
        .map(|(_, p)| SubCorpusSpec::read(p).map_err(Into::into))
        .collect()
}

/// Vocabulary a sub-model is trained over: the full vocabulary for Shuffle,
/// otherwise the words frequent enough inside the sub-corpus.
pub fn submodel_vocabulary(
    cfg: &PipelineConfig,
    spec: &SubCorpusSpec,
    corpus: &EncodedCorpus,
) -> subembed::Result<Vocabulary> {
    match spec.selection {
        Selection::Shuffle { .. } => Ok(corpus.vocab().clone()),
        Selection::Sentences(_) => {
            subcorpus_vocabulary(spec, corpus, 0, cfg.effective_sub_min_count(), cfg.max_vocab)
        }
    }
}

/// Seed for sub-model `id`.
pub fn submodel_seed(seed: u64, id: usize) -> u64 {
    seed.wrapping_add((id as u64 + 1).wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

#[derive(Debug)]
pub struct TrainedModel {
    pub id: usize,
    pub path: PathBuf,
    pub elapsed: Duration,
    pub log: TrainLog,
}

#[derive(Debug, Default)]
pub struct TrainSummary {
    pub trained: Vec<TrainedModel>,
    pub failures: Vec<(usize, String)>,
}

fn log_csv(log: &TrainLog) -> String {
    let mut s = String::from("epoch,sentences,tokens,sentence_digest\n");
    for e in &log.epochs {
        s.push_str(&format!(
            "{},{},{},{:016x}\n",
            e.epoch, e.sentences, e.tokens, e.sentence_digest
        ));
    }
    s
}

/// Trains and saves one sub-model.
pub fn train_one(
    cfg: &PipelineConfig,
    spec: &SubCorpusSpec,
    corpus: &EncodedCorpus,
    dir: &Path,
) -> anyhow::Result<TrainedModel> {
    let start = Instant::now();
    let vocab = submodel_vocabulary(cfg, spec, corpus)?;
    let config = TrainConfig {
        seed: submodel_seed(cfg.seed, spec.sub_model_id),
        ..cfg.train.clone()
    };
    let (model, log) = train_submodel_logged(spec, corpus, &vocab, &config)?;
    let elapsed = start.elapsed();
    let path = submodel_path(dir, spec.sub_model_id);
    model.write_word2vec(&path, false)?;
    write_text(&dir.join(format!("sub_{}.log.csv", spec.sub_model_id)), &log_csv(&log))?;
    Ok(TrainedModel {
        id: spec.sub_model_id,
        path,
        elapsed,
        log,
    })
}

/// Trains every spec on a pool of `cfg.jobs` threads. A failing sub-model
/// is reported in the summary and does not stop the others.
pub fn train_all(
    cfg: &PipelineConfig,
    specs: &[SubCorpusSpec],
    corpus: &EncodedCorpus,
) -> anyhow::Result<TrainSummary> {
    let dir = cfg.models_dir();
    create_dir(&dir)?;
    let next = AtomicUsize::new(0);
    let results = Mutex::new(Vec::new());
    std::thread::scope(|scope| {
        for _ in 0..cfg.jobs.min(specs.len()).max(1) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(spec) = specs.get(i) else { break };
                let r = train_one(cfg, spec, corpus, &dir);
                results.lock().expect("poisoned").push((spec.sub_model_id, r));
            });
        }
    });
    let mut summary = TrainSummary::default();
    let mut results = results.into_inner().expect("poisoned");
    results.sort_by_key(|(id, _)| *id);
    for (id, r) in results {
        match r {
            Ok(m) => summary.trained.push(m),
            Err(e) => summary.failures.push((id, format!("{e:#}"))),
        }
    }
    Ok(summary)
}

pub fn cmd_train(cfg: &PipelineConfig) -> anyhow::Result<TrainSummary> {
    let specs = read_specs(&cfg.specs_dir())?;
    let (_, corpus) = load_corpus(cfg)?;
    let summary = train_all(cfg, &specs, &corpus)?;
    if !summary.failures.is_empty() {
        let list: Vec<String> = summary
            .failures
            .iter()
            .map(|(id, e)| format!("sub-model {id}: {e}"))
            .collect();
        bail!(
            "{} of {} sub-models failed:\n{}",
            summary.failures.len(),
            specs.len(),
            list.join("\n")
        );
    }
    Ok(summary)
}

/// Trains one model on every sentence of the corpus.
pub fn train_baseline(
    cfg: &PipelineConfig,
    corpus: &EncodedCorpus,
) -> anyhow::Result<(EmbeddingModel, Duration)> {
    let spec = SubCorpusSpec {
        sub_model_id: 0,
        epoch: 0,
        strategy: Strategy::EqualPartition,
        selection: Selection::Sentences((0..corpus.len()).collect()),
    };
    let start = Instant::now();
    let (model, _) = train_submodel_logged(&spec, corpus, corpus.vocab(), &cfg.train)?;
    Ok((model, start.elapsed()))
}

pub fn cmd_baseline(cfg: &PipelineConfig) -> anyhow::Result<Duration> {
    let (_, corpus) = load_corpus(cfg)?;
    let (model, elapsed) = train_baseline(cfg, &corpus)?;
    create_dir(&cfg.out)?;
    model.write_word2vec(&cfg.baseline_path(), false)?;
    Ok(elapsed)
}

pub fn load_submodels(dir: &Path) -> anyhow::Result<Vec<EmbeddingModel>> {
    let paths = list_indexed(dir, "sub_", ".vec")?;
    if paths.is_empty() {
        bail!("no sub-model files in {}; run train first", dir.display());
    }
    paths
        .iter()
        .map(|(_, p)| {
            EmbeddingModel::read_word2vec(p).with_context(|| format!("loading {}", p.display()))
        })
        .collect()
}

/// Merges the trained sub-models and writes `merged.vec` and
/// `merge_report.csv`.
pub fn cmd_merge(cfg: &PipelineConfig) -> anyhow::Result<MergeReport> {
    let models = load_submodels(&cfg.models_dir())?;
    let (merged, report) = merge_models(&models, &cfg.merge)?;
    create_dir(&cfg.out)?;
    merged.write_word2vec(&cfg.merged_path(), false)?;
    report.write_csv(&cfg.out.join("merge_report.csv"))?;
    Ok(report)
}

/// Benchmark files in `dir`, sorted by name, with their detected kinds.
pub fn load_benchmarks(dir: &Path) -> anyhow::Result<Vec<Benchmark>> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("reading {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file())
        .collect();
    paths.sort();
    if paths.is_empty() {
        bail!("no benchmark files in {}", dir.display());
    }
    paths
        .iter()
        .map(|p| {
            let kind = eval::detect_kind(p)?;
            Ok(eval::load_benchmark(p, kind)?)
        })
        .collect()
}

/// Per-benchmark outcome; benchmarks the model cannot score keep their
/// error.
pub type EvalRow = (String, subembed::Result<EvalResult>);

pub fn evaluate_all(model: &EmbeddingModel, benches: &[Benchmark], seed: u64) -> Vec<EvalRow> {
    benches
        .iter()
        .map(|b| (b.name().to_string(), eval::evaluate(model, b, seed)))
        .collect()
}

fn row_fields(r: &subembed::Result<EvalResult>) -> (String, usize, usize) {
    match r {
        Ok(r) => (r.score.to_string(), r.oov_count, r.n_used),
        Err(subembed::Error::InsufficientCoverage {
            usable, oov_count, ..
        }) => ("NaN".into(), *oov_count, *usable),
        Err(_) => ("NaN".into(), 0, 0),
    }
}

/// `benchmark,score,oov,n_used`; unscorable benchmarks get a `NaN` score.
pub fn eval_csv(rows: &[EvalRow]) -> String {
    let mut s = String::from("benchmark,score,oov,n_used\n");
    for (name, r) in rows {
        let (score, oov, used) = row_fields(r);
        s.push_str(&format!("{name},{score},{oov},{used}\n"));
    }
    s
}

pub fn cmd_eval(model: &Path, bench_dir: &Path, out: &Path, seed: u64) -> anyhow::Result<Vec<EvalRow>> {
    let model = EmbeddingModel::read_word2vec(model)
        .with_context(|| format!("loading {}", model.display()))?;
    let benches = load_benchmarks(bench_dir)?;
    let rows = evaluate_all(&model, &benches, seed);
    write_text(out, &eval_csv(&rows))?;
    Ok(rows)
}

#[derive(Clone, Debug, PartialEq)]
pub struct KlRow {
    pub strategy: Strategy,
    pub rate: f64,
    pub sub_model: usize,
    pub unigram_kl: f64,
    pub bigram_kl: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoverageRow {
    pub strategy: Strategy,
    pub rate: f64,
    pub n_subcorpora: usize,
    pub vocab: usize,
    pub intersection: usize,
    pub union: usize,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct StatsReport {
    pub kl: Vec<KlRow>,
    pub coverage: Vec<CoverageRow>,
    pub mean_sentence_len: f64,
    pub thresholds: Vec<(f64, f64)>,
}

impl StatsReport {
    /// Mean unigram and bigram KL over the sub-corpora of one setting.
    pub fn mean_kl(&self, strategy: Strategy, rate: f64) -> Option<(f64, f64)> {
        let rows: Vec<&KlRow> = self
            .kl
            .iter()
            .filter(|r| r.strategy == strategy && r.rate == rate)
            .collect();
        if rows.is_empty() {
            return None;
        }
        let n = rows.len() as f64;
        Some((
            rows.iter().map(|r| r.unigram_kl).sum::<f64>() / n,
            rows.iter().map(|r| r.bigram_kl).sum::<f64>() / n,
        ))
    }
}

/// KL divergence of each sub-corpus against the full corpus, vocabulary
/// coverage, and the missing-word threshold for each rate.
pub fn corpus_stats(
    corpus: &EncodedCorpus,
    strategies: &[Strategy],
    rates: &[f64],
    seed: u64,
) -> anyhow::Result<StatsReport> {
    let full_uni = Distribution::unigram(corpus.sentences(), corpus.vocab().len())?;
    let full_bi = Distribution::bigram(corpus.sentences())?;
    let ell = corpus.mean_sentence_len();
    let mut report = StatsReport {
        mean_sentence_len: ell,
        ..StatsReport::default()
    };
    for &rate in rates {
        let plan = SamplingPlan::new(rate, seed, 1)?;
        let u = rate / 100.0;
        if u < 1.0 && ell >= 1.0 {
            report.thresholds.push((u, missing_word_threshold(u, ell)?));
        }
        for &strategy in strategies {
            let specs = divide(strategy, corpus.len(), &plan)?;
            for spec in &specs {
                let ids = spec.sentence_ids(0, corpus.len());
                let sents = || ids.iter().map(|&i| corpus.sentence(i));
                let uni = Distribution::unigram(sents(), corpus.vocab().len())?;
                let bi = Distribution::bigram(sents())?;
                report.kl.push(KlRow {
                    strategy,
                    rate,
                    sub_model: spec.sub_model_id,
                    unigram_kl: kl_divergence(&uni, &full_uni)?,
                    bigram_kl: kl_divergence(&bi, &full_bi)?,
                });
            }
            let cov = vocabulary_coverage(&specs, corpus, 0)?;
            report.coverage.push(CoverageRow {
                strategy,
                rate,
                n_subcorpora: cov.n_subcorpora,
                vocab: corpus.vocab().len(),
                intersection: cov.intersection,
                union: cov.union,
            });
        }
    }
    Ok(report)
}

pub fn write_stats(report: &StatsReport, dir: &Path) -> anyhow::Result<()> {
    create_dir(dir)?;
    let mut kl = String::from("strategy,rate,sub_model,unigram_kl,bigram_kl\n");
    for r in &report.kl {
        kl.push_str(&format!(
            "{},{},{},{},{}\n",
            r.strategy, r.rate, r.sub_model, r.unigram_kl, r.bigram_kl
        ));
    }
    write_text(&dir.join("kl.csv"), &kl)?;

    let mut summary = String::from("strategy,rate,mean_unigram_kl,mean_bigram_kl\n");
    let settings: BTreeSet<(String, String)> = report
        .kl
        .iter()
        .map(|r| (r.strategy.to_string(), r.rate.to_string()))
        .collect();
    for (s, rate) in settings {
        let strategy: Strategy = s.parse()?;
        let (u, b) = report
            .mean_kl(strategy, rate.parse()?)
            .expect("setting has rows");
        summary.push_str(&format!("{s},{rate},{u},{b}\n"));
    }
    write_text(&dir.join("kl_summary.csv"), &summary)?;

    let mut cov = String::from("strategy,rate,n_subcorpora,vocab,intersection,union\n");
    for r in &report.coverage {
        cov.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.strategy, r.rate, r.n_subcorpora, r.vocab, r.intersection, r.union
        ));
    }
    write_text(&dir.join("coverage.csv"), &cov)?;

    let mut th = String::from("u,mean_sentence_len,threshold\n");
    for (u, t) in &report.thresholds {
        th.push_str(&format!("{u},{},{t}\n", report.mean_sentence_len));
    }
    write_text(&dir.join("threshold.csv"), &th)?;
    Ok(())
}

pub fn cmd_stats(cfg: &PipelineConfig) -> anyhow::Result<StatsReport> {
    let (_, corpus) = load_corpus(cfg)?;
    let rates = if cfg.stats_rates.is_empty() {
        vec![cfg.rate]
    } else {
        cfg.stats_rates.clone()
    };
    let report = corpus_stats(
        &corpus,
        &[Strategy::EqualPartition, Strategy::RandomSampling, Strategy::Shuffle],
        &rates,
        cfg.seed,
    )?;
    write_stats(&report, &cfg.stats_dir())?;
    Ok(report)
}

/// Removes `fraction` of the distinct benchmark words from randomly chosen
/// sub-models. Only words held by at least two sub-models are candidates,
/// and each chosen word stays in at least one. Returns the reduced models
/// and the removed words.
pub fn remove_benchmark_words(
    models: &[EmbeddingModel],
    benches: &[Benchmark],
    fraction: f64,
    seed: u64,
) -> (Vec<EmbeddingModel>, Vec<String>) {
    let unique: BTreeSet<&str> = benches.iter().flat_map(|b| b.unique_words()).collect();
    let holders = |w: &str| -> Vec<usize> {
        (0..models.len())
            .filter(|&i| models[i].vocab().contains(w))
            .collect()
    };
    let candidates: Vec<&str> = unique
        .iter()
        .copied()
        .filter(|w| holders(w).len() >= 2)
        .collect();
    let target = ((fraction * unique.len() as f64).round() as usize).min(candidates.len());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let chosen: Vec<&str> = sample(&mut rng, candidates.len(), target)
        .into_iter()
        .map(|i| candidates[i])
        .collect();

    let mut removals: Vec<HashSet<String>> = vec![HashSet::new(); models.len()];
    for &w in &chosen {
        let h = holders(w);
        let n_remove = rng.random_range(1..h.len());
        for j in sample(&mut rng, h.len(), n_remove) {
            removals[h[j]].insert(w.to_string());
        }
    }
    let reduced = models
        .iter()
        .zip(&removals)
        .map(|(m, r)| if r.is_empty() { m.clone() } else { m.without_words(r) })
        .collect();
    let mut removed: Vec<String> = chosen.into_iter().map(String::from).collect();
    removed.sort();
    (reduced, removed)
}

#[derive(Debug)]
pub struct MissingWordsRow {
    pub method: MergeMethod,
    pub benchmark: String,
    pub result: subembed::Result<EvalResult>,
}

/// Merges the reduced sub-models with every method and scores each merge.
pub fn missing_words_experiment(
    models: &[EmbeddingModel],
    benches: &[Benchmark],
    fraction: f64,
    merge: &MergeConfig,
    seed: u64,
) -> anyhow::Result<Vec<MissingWordsRow>> {
    let (reduced, _) = remove_benchmark_words(models, benches, fraction, seed);
    let mut rows = Vec::new();
    for method in [MergeMethod::Concat, MergeMethod::Pca, MergeMethod::Alir] {
        let config = MergeConfig {
            method,
            ..merge.clone()
        };
        let (merged, _) = merge_models(&reduced, &config)
            .with_context(|| format!("{method} merge"))?;
        for (benchmark, result) in evaluate_all(&merged, benches, seed) {
            rows.push(MissingWordsRow {
                method,
                benchmark,
                result,
            });
        }
    }
    Ok(rows)
}

pub fn missing_words_csv(rows: &[MissingWordsRow]) -> String {
    let mut s = String::from("method,benchmark,score,oov,n_used\n");
    for r in rows {
        let (score, oov, used) = row_fields(&r.result);
        s.push_str(&format!("{},{},{score},{oov},{used}\n", r.method, r.benchmark));
    }
    s
}

pub fn cmd_missing_words(cfg: &PipelineConfig) -> anyhow::Result<Vec<MissingWordsRow>> {
    let models = load_submodels(&cfg.models_dir())?;
    let benches = load_benchmarks(cfg.benchmarks_path()?)?;
    let rows = missing_words_experiment(
        &models,
        &benches,
        cfg.removal_fraction,
        &cfg.merge,
        cfg.seed,
    )?;
    create_dir(&cfg.out)?;
    write_text(&cfg.out.join("missing_words.csv"), &missing_words_csv(&rows))?;
    Ok(rows)
}

#[derive(Debug, Default)]
pub struct PipelineSummary {
    pub n_specs: usize,
    pub train: TrainSummary,
    pub baseline_elapsed: Option<Duration>,
    pub merge: Option<MergeReport>,
    pub eval: Vec<EvalRow>,
    pub baseline_eval: Vec<EvalRow>,
}

/// divide, train, merge, then evaluate when benchmarks are configured.
pub fn cmd_pipeline(cfg: &PipelineConfig) -> anyhow::Result<PipelineSummary> {
    let mut summary = PipelineSummary {
        n_specs: cmd_divide(cfg)?.len(),
        ..PipelineSummary::default()
    };
    let specs = read_specs(&cfg.specs_dir())?;
    let (_, corpus) = load_corpus(cfg)?;
    summary.train = train_all(cfg, &specs, &corpus)?;
    if !summary.train.failures.is_empty() {
        bail!("sub-model training failed: {:?}", summary.train.failures);
    }
    let baseline = if cfg.baseline {
        let (model, elapsed) = train_baseline(cfg, &corpus)?;
        model.write_word2vec(&cfg.baseline_path(), false)?;
        summary.baseline_elapsed = Some(elapsed);
        Some(model)
    } else {
        None
    };
    summary.merge = Some(cmd_merge(cfg)?);
    if let Some(dir) = &cfg.benchmarks {
        let benches = load_benchmarks(dir)?;
        let merged = EmbeddingModel::read_word2vec(&cfg.merged_path())?;
        summary.eval = evaluate_all(&merged, &benches, cfg.seed);
        write_text(&cfg.out.join("eval.csv"), &eval_csv(&summary.eval))?;
        if let Some(model) = &baseline {
            summary.baseline_eval = evaluate_all(model, &benches, cfg.seed);
            write_text(&cfg.out.join("eval_full.csv"), &eval_csv(&summary.baseline_eval))?;
        }
    }
    Ok(summary)
}
