//! Dividing a corpus into sub-corpora.
//!
//! Three strategies are supported: contiguous equal partitioning, random
//! sampling of sentences with replacement, and Shuffle, where every
//! sentence joins each sub-corpus independently with probability `r/100`
//! and the draw is repeated every epoch. Shuffle assignment is a keyed hash
//! of `(seed, epoch, sentence, sub-model)`, so it needs no shared state and
//! can be evaluated by any number of workers.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{EncodedCorpus, Vocabulary};
use crate::error::{Error, Result};
use crate::util::{keyed_uniform, mix64, write_atomic};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Strategy {
    EqualPartition,
    RandomSampling,
    Shuffle,
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::EqualPartition => "equal",
            Strategy::RandomSampling => "random",
            Strategy::Shuffle => "shuffle",
        })
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "equal" => Ok(Strategy::EqualPartition),
            "random" => Ok(Strategy::RandomSampling),
            "shuffle" => Ok(Strategy::Shuffle),
            other => Err(Error::invalid(format!("unknown strategy '{other}'"))),
        }
    }
}

/// Sampling rate, derived sub-model count, seed and epoch count.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SamplingPlan {
    rate_percent: f64,
    n_submodels: usize,
    seed: u64,
    epochs: usize,
}

impl SamplingPlan {
    /// `n_submodels = round(100 / rate_percent)`.
    pub fn new(rate_percent: f64, seed: u64, epochs: usize) -> Result<Self> {
        if !(rate_percent > 0.0 && rate_percent <= 100.0) {
            return Err(Error::invalid(format!(
                "sampling rate must be in (0, 100], got {rate_percent}"
            )));
        }
        if epochs < 1 {
            return Err(Error::invalid("epochs must be >= 1"));
        }
        let n_submodels = ((100.0 / rate_percent).round() as usize).max(1);
        Ok(SamplingPlan {
            rate_percent,
            n_submodels,
            seed,
            epochs,
        })
    }

    pub fn rate_percent(&self) -> f64 {
        self.rate_percent
    }

    pub fn n_submodels(&self) -> usize {
        self.n_submodels
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn epochs(&self) -> usize {
        self.epochs
    }

    /// Sentences per random sample: `round(r * N / 100)`, at least 1.
    pub fn sample_size(&self, n_sentences: usize) -> usize {
        ((self.rate_percent * n_sentences as f64 / 100.0).round() as usize).max(1)
    }
}

/// Which sentences a sub-model trains on.
#[derive(Clone, Debug, PartialEq)]
pub enum Selection {
    /// Materialized sentence ids, identical in every epoch.
    Sentences(Vec<usize>),
    /// Regenerated every epoch from the keyed assignment.
    Shuffle { seed: u64, rate_percent: f64 },
}

/// Description of one sub-corpus.
#[derive(Clone, Debug, PartialEq)]
pub struct SubCorpusSpec {
    pub sub_model_id: usize,
    pub epoch: usize,
    pub strategy: Strategy,
    pub selection: Selection,
}

impl SubCorpusSpec {
    /// Sentence ids for `epoch` in a corpus of `n_sentences` sentences.
    pub fn sentence_ids(&self, epoch: usize, n_sentences: usize) -> Vec<usize> {
        match &self.selection {
            Selection::Sentences(ids) => ids.clone(),
            Selection::Shuffle { seed, rate_percent } => (0..n_sentences)
                .filter(|&s| {
                    shuffle_includes(*seed, *rate_percent, epoch, s, self.sub_model_id)
                })
                .collect(),
        }
    }

    /// Tab-separated line: `id, epoch, strategy, ids-or-seed`.
    ///
    /// Sentence lists are comma separated; Shuffle specs store
    /// `seed=<u64>;rate=<percent>`.
    pub fn to_line(&self) -> String {
        let payload = match &self.selection {
            Selection::Sentences(ids) => ids
                .iter()
                .map(usize::to_string)
                .collect::<Vec<_>>()
                .join(","),
            Selection::Shuffle { seed, rate_percent } => format!("seed={seed};rate={rate_percent}"),
        };
        format!(
            "{}\t{}\t{}\t{}",
            self.sub_model_id, self.epoch, self.strategy, payload
        )
    }

    pub fn parse_line(line: &str) -> std::result::Result<Self, String> {
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 4 {
            return Err(format!("expected 4 tab-separated fields, got {}", fields.len()));
        }
        let sub_model_id = fields[0]
            .parse()
            .map_err(|_| "invalid sub_model_id".to_owned())?;
        let epoch = fields[1].parse().map_err(|_| "invalid epoch".to_owned())?;
        let strategy: Strategy = fields[2].parse().map_err(|e: Error| e.to_string())?;
        let selection = if strategy == Strategy::Shuffle {
            let mut seed = None;
            let mut rate = None;
            for kv in fields[3].split(';') {
                match kv.split_once('=') {
                    Some(("seed", v)) => seed = v.parse().ok(),
                    Some(("rate", v)) => rate = v.parse().ok(),
                    _ => return Err(format!("invalid shuffle field '{kv}'")),
                }
            }
            Selection::Shuffle {
                seed: seed.ok_or("missing seed")?,
                rate_percent: rate.ok_or("missing rate")?,
            }
        } else if fields[3].is_empty() {
            Selection::Sentences(Vec::new())
        } else {
            Selection::Sentences(
                fields[3]
                    .split(',')
                    .map(|x| x.parse().map_err(|_| format!("invalid sentence id '{x}'")))
                    .collect::<std::result::Result<_, _>>()?,
            )
        };
        Ok(SubCorpusSpec {
            sub_model_id,
            epoch,
            strategy,
            selection,
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_atomic(path, |w| writeln!(w, "{}", self.to_line()))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let line = text.lines().next().unwrap_or("");
        Self::parse_line(line).map_err(|message| Error::Parse {
            path: path.to_path_buf(),
            line: 1,
            message,
        })
    }
}

/// Contiguous, disjoint blocks covering `0..n_sentences`; sizes differ by
/// at most one, larger blocks first.
pub fn equal_partition(n_sentences: usize, plan: &SamplingPlan) -> Result<Vec<SubCorpusSpec>> {
    let n = plan.n_submodels;
    if n_sentences < n {
        return Err(Error::invalid(format!(
            "{n_sentences} sentences cannot fill {n} partitions"
        )));
    }
    let base = n_sentences / n;
    let extra = n_sentences % n;
    let mut start = 0;
    Ok((0..n)
        .map(|i| {
            let size = base + usize::from(i < extra);
            let ids = (start..start + size).collect();
            start += size;
            SubCorpusSpec {
                sub_model_id: i,
                epoch: 0,
                strategy: Strategy::EqualPartition,
                selection: Selection::Sentences(ids),
            }
        })
        .collect())
}

/// `n_submodels` samples of `round(r N / 100)` sentences drawn uniformly
/// with replacement.
pub fn random_sample(n_sentences: usize, plan: &SamplingPlan) -> Result<Vec<SubCorpusSpec>> {
    if n_sentences < 1 {
        return Err(Error::EmptyCorpus);
    }
    let size = plan.sample_size(n_sentences);
    Ok((0..plan.n_submodels)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(mix64(plan.seed ^ mix64(i as u64)));
            let ids = (0..size).map(|_| rng.random_range(0..n_sentences)).collect();
            SubCorpusSpec {
                sub_model_id: i,
                epoch: 0,
                strategy: Strategy::RandomSampling,
                selection: Selection::Sentences(ids),
            }
        })
        .collect())
}

/// One Shuffle spec per sub-model; sentence ids are generated per epoch.
pub fn shuffle_specs(plan: &SamplingPlan) -> Vec<SubCorpusSpec> {
    (0..plan.n_submodels)
        .map(|i| SubCorpusSpec {
            sub_model_id: i,
            epoch: 0,
            strategy: Strategy::Shuffle,
            selection: Selection::Shuffle {
                seed: plan.seed,
                rate_percent: plan.rate_percent,
            },
        })
        .collect()
}

/// Specs for any strategy.
pub fn divide(
    strategy: Strategy,
    n_sentences: usize,
    plan: &SamplingPlan,
) -> Result<Vec<SubCorpusSpec>> {
    match strategy {
        Strategy::EqualPartition => equal_partition(n_sentences, plan),
        Strategy::RandomSampling => random_sample(n_sentences, plan),
        Strategy::Shuffle => Ok(shuffle_specs(plan)),
    }
}

#[inline]
fn shuffle_includes(
    seed: u64,
    rate_percent: f64,
    epoch: usize,
    sentence_id: usize,
    sub_model_id: usize,
) -> bool {
    keyed_uniform(&[seed, epoch as u64, sentence_id as u64, sub_model_id as u64])
        < rate_percent / 100.0
}

/// Sub-models that receive `sentence_id` in `epoch`. Each sub-model is an
/// independent Bernoulli(r/100) draw; the result may be empty.
pub fn shuffle_assign(sentence_id: usize, epoch: usize, plan: &SamplingPlan) -> Vec<usize> {
    (0..plan.n_submodels)
        .filter(|&i| shuffle_includes(plan.seed, plan.rate_percent, epoch, sentence_id, i))
        .collect()
}

/// Occurrence probability above which a word is unlikely to be missed by
/// any random sample: `1 - (1-u)^((1-u)/(ell u))`.
pub fn missing_word_threshold(u: f64, ell: f64) -> Result<f64> {
    if !(u > 0.0 && u < 1.0) {
        return Err(Error::invalid(format!("u must be in (0, 1), got {u}")));
    }
    if ell.is_nan() || ell < 1.0 {
        return Err(Error::invalid(format!("sentence length must be >= 1, got {ell}")));
    }
    Ok(1.0 - (1.0 - u).powf((1.0 - u) / (ell * u)))
}

/// Word presence across sub-corpora.
#[derive(Clone, Debug, PartialEq)]
pub struct Coverage {
    /// Number of sub-corpora containing each vocabulary word.
    pub presence: Vec<usize>,
    pub n_subcorpora: usize,
    /// Words present in every sub-corpus.
    pub intersection: usize,
    /// Words present in at least one sub-corpus.
    pub union: usize,
}

pub fn vocabulary_coverage(
    specs: &[SubCorpusSpec],
    corpus: &EncodedCorpus,
    epoch: usize,
) -> Result<Coverage> {
    if specs.is_empty() {
        return Err(Error::invalid("no sub-corpus specs"));
    }
    let v = corpus.vocab().len();
    let mut presence = vec![0usize; v];
    let mut seen = vec![false; v];
    for spec in specs {
        seen.iter_mut().for_each(|s| *s = false);
        for sid in spec.sentence_ids(epoch, corpus.len()) {
            for &w in corpus.sentence(sid) {
                seen[w as usize] = true;
            }
        }
        for (p, &s) in presence.iter_mut().zip(&seen) {
            *p += usize::from(s);
        }
    }
    let n = specs.len();
    Ok(Coverage {
        intersection: presence.iter().filter(|&&p| p == n).count(),
        union: presence.iter().filter(|&&p| p > 0).count(),
        presence,
        n_subcorpora: n,
    })
}

/// Vocabulary of one sub-corpus: words of `corpus` occurring at least
/// `min_count` times in the spec's sentences for `epoch`.
pub fn subcorpus_vocabulary(
    spec: &SubCorpusSpec,
    corpus: &EncodedCorpus,
    epoch: usize,
    min_count: u64,
    max_size: usize,
) -> Result<Vocabulary> {
    let counts = corpus.counts_over(spec.sentence_ids(epoch, corpus.len()));
    let total = counts.iter().sum();
    if total == 0 {
        return Err(Error::EmptyCorpus);
    }
    let vocab = corpus.vocab();
    Ok(Vocabulary::from_counts(
        counts
            .into_iter()
            .enumerate()
            .map(|(i, c)| (vocab.word(i).to_owned(), c)),
        min_count.max(1),
        max_size,
        total,
    ))
}
