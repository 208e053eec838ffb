//! Synthetic topic corpora and matching similarity benchmarks.
//!
//! Words are grouped into clusters inside topics. A sentence picks one
//! topic and cluster and draws most of its words from that cluster, some
//! from the rest of the topic and a few from shared filler words, so
//! co-occurrence statistics reflect the cluster and topic structure.

use std::fs;
use std::io::Write;
use std::path::Path;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use subembed::eval::SimilarityBenchmark;

#[derive(Clone, Debug, PartialEq)]
pub struct TopicCorpusConfig {
    pub n_topics: usize,
    pub clusters_per_topic: usize,
    pub words_per_cluster: usize,
    pub filler_words: usize,
    pub n_sentences: usize,
    pub sentence_len: usize,
    /// Probability that a token comes from the sentence's cluster.
    pub p_cluster: f64,
    /// Probability that a token comes from another cluster of the topic.
    pub p_topic: f64,
    /// Sentences grouped by topic in corpus order instead of interleaved.
    pub contiguous: bool,
    pub seed: u64,
}

impl Default for TopicCorpusConfig {
    fn default() -> Self {
        TopicCorpusConfig {
            n_topics: 4,
            clusters_per_topic: 4,
            words_per_cluster: 8,
            filler_words: 10,
            n_sentences: 10_000,
            sentence_len: 12,
            p_cluster: 0.6,
            p_topic: 0.25,
            contiguous: false,
            seed: 1,
        }
    }
}

pub fn word_name(topic: usize, cluster: usize, j: usize) -> String {
    format!("t{topic}c{cluster}w{j}")
}

pub fn filler_name(j: usize) -> String {
    format!("f{j}")
}

/// Generates the corpus as tokenized sentences.
pub fn topic_corpus(cfg: &TopicCorpusConfig) -> Vec<Vec<String>> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    // Zipf-like weights inside each cluster and among fillers
    let in_cluster =
        WeightedIndex::new((0..cfg.words_per_cluster).map(|j| 1.0 / (j as f64 + 1.0))).unwrap();
    let filler = (cfg.filler_words > 0)
        .then(|| WeightedIndex::new((0..cfg.filler_words).map(|j| 1.0 / (j as f64 + 1.0))).unwrap());
    let per_topic = cfg.n_sentences.div_ceil(cfg.n_topics);
    (0..cfg.n_sentences)
        .map(|s| {
            let topic = if cfg.contiguous {
                (s / per_topic).min(cfg.n_topics - 1)
            } else {
                rng.random_range(0..cfg.n_topics)
            };
            let cluster = rng.random_range(0..cfg.clusters_per_topic);
            (0..cfg.sentence_len)
                .map(|_| {
                    let u: f64 = rng.random();
                    match &filler {
                        Some(f) if u >= cfg.p_cluster + cfg.p_topic => filler_name(f.sample(&mut rng)),
                        _ if u < cfg.p_cluster => {
                            word_name(topic, cluster, in_cluster.sample(&mut rng))
                        }
                        _ => word_name(
                            topic,
                            rng.random_range(0..cfg.clusters_per_topic),
                            in_cluster.sample(&mut rng),
                        ),
                    }
                })
                .collect()
        })
        .collect()
}

/// One sentence per line.
pub fn write_corpus(path: &Path, sentences: &[Vec<String>]) -> std::io::Result<()> {
    let mut f = std::io::BufWriter::new(fs::File::create(path)?);
    for s in sentences {
        writeln!(f, "{}", s.join(" "))?;
    }
    f.flush()
}

/// Random distinct topic-word pairs scored 2 within a cluster, 1 within a
/// topic and 0 across topics.
pub fn similarity_benchmark(cfg: &TopicCorpusConfig, n_pairs: usize, seed: u64) -> SimilarityBenchmark {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs = Vec::with_capacity(n_pairs);
    let mut seen = std::collections::HashSet::new();
    let max_pairs = {
        let n = cfg.n_topics * cfg.clusters_per_topic * cfg.words_per_cluster;
        n * (n - 1) / 2
    };
    while pairs.len() < n_pairs.min(max_pairs) {
        let a = (
            rng.random_range(0..cfg.n_topics),
            rng.random_range(0..cfg.clusters_per_topic),
            rng.random_range(0..cfg.words_per_cluster),
        );
        // bias toward related pairs so every score level is populated
        let b = match rng.random_range(0..3) {
            0 => (a.0, a.1, rng.random_range(0..cfg.words_per_cluster)),
            1 => (
                a.0,
                rng.random_range(0..cfg.clusters_per_topic),
                rng.random_range(0..cfg.words_per_cluster),
            ),
            _ => (
                rng.random_range(0..cfg.n_topics),
                rng.random_range(0..cfg.clusters_per_topic),
                rng.random_range(0..cfg.words_per_cluster),
            ),
        };
        if a == b || !seen.insert((a.min(b), a.max(b))) {
            continue;
        }
        let score = if a.0 != b.0 {
            0.0
        } else if a.1 != b.1 {
            1.0
        } else {
            2.0
        };
        pairs.push((word_name(a.0, a.1, a.2), word_name(b.0, b.1, b.2), score));
    }
    SimilarityBenchmark {
        name: "synthetic".into(),
        pairs,
    }
}

pub fn write_similarity(path: &Path, bench: &SimilarityBenchmark) -> std::io::Result<()> {
    let mut text = String::new();
    for (a, b, s) in &bench.pairs {
        text.push_str(&format!("{a} {b} {s}\n"));
    }
    fs::write(path, text)
}
