use std::marker::PhantomData;
use std::sync::atomic::{AtomicUsize, Ordering};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{subsample_keep_probability, EmbeddingModel, Matrix, NoiseTable, TrainConfig};
use crate::corpus::{EncodedCorpus, Vocabulary};
use crate::error::{Error, Result};
use crate::sampler::SubCorpusSpec;
use crate::util::mix64;

const UNMAPPED: u32 = u32::MAX;
const NEGATIVE_ATTEMPTS: usize = 8;

/// Rows of a matrix shared between Hogwild workers.
///
/// Workers write rows without synchronization. Concurrent updates of the
/// same row may interleave; SGNS updates are sparse, so such collisions are
/// rare and tolerated.
struct HogwildRows<'a> {
    ptr: *mut f32,
    rows: usize,
    cols: usize,
    _marker: PhantomData<&'a mut [f32]>,
}

unsafe impl Send for HogwildRows<'_> {}
unsafe impl Sync for HogwildRows<'_> {}

impl<'a> HogwildRows<'a> {
    fn new(m: &'a mut Matrix) -> Self {
        HogwildRows {
            rows: m.rows(),
            cols: m.cols(),
            ptr: m.as_mut_slice().as_mut_ptr(),
            _marker: PhantomData,
        }
    }

    /// # Safety
    /// Callers must not hold two references to the same row within one
    /// thread. Cross-thread overlap is the accepted Hogwild race.
    #[allow(clippy::mut_from_ref)]
    #[inline]
    unsafe fn row(&self, i: usize) -> &mut [f32] {
        debug_assert!(i < self.rows);
        std::slice::from_raw_parts_mut(self.ptr.add(i * self.cols), self.cols)
    }
}

/// Per-epoch record of what a sub-model was trained on.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EpochLog {
    pub epoch: usize,
    pub sentences: usize,
    /// In-vocabulary tokens before subsampling.
    pub tokens: usize,
    /// Order-sensitive hash of the sentence ids.
    pub sentence_digest: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TrainLog {
    pub epochs: Vec<EpochLog>,
}

struct Shared<'a> {
    corpus: &'a EncodedCorpus,
    map: &'a [u32],
    keep: &'a [f32],
    noise: &'a NoiseTable,
    config: &'a TrainConfig,
    words: HogwildRows<'a>,
    contexts: HogwildRows<'a>,
    progress: AtomicUsize,
    total: usize,
}

impl Shared<'_> {
    fn learning_rate(&self, done: usize) -> f32 {
        let c = self.config;
        let frac = (done as f64 / self.total as f64).min(1.0) as f32;
        (c.initial_lr - (c.initial_lr - c.min_lr) * frac).max(c.min_lr)
    }

    fn run_shard(&self, sentence_ids: &[usize], rng: &mut ChaCha8Rng) {
        let dim = self.config.dim;
        let mut buf = Vec::new();
        let mut grad = vec![0f32; dim];
        for &sid in sentence_ids {
            buf.clear();
            let mut seen = 0;
            for &w in self.corpus.sentence(sid) {
                let m = self.map[w as usize];
                if m == UNMAPPED {
                    continue;
                }
                seen += 1;
                let keep = self.keep[m as usize];
                if keep < 1.0 && rng.random::<f32>() >= keep {
                    continue;
                }
                buf.push(m as usize);
            }
            let done = self.progress.fetch_add(seen, Ordering::Relaxed);
            let lr = self.learning_rate(done);

            for (pos, &center) in buf.iter().enumerate() {
                let reach = rng.random_range(1..=self.config.window);
                let lo = pos.saturating_sub(reach);
                let hi = (pos + reach + 1).min(buf.len());
                for (cpos, &context) in buf.iter().enumerate().take(hi).skip(lo) {
                    if cpos != pos {
                        self.train_pair(center, context, lr, &mut grad, rng);
                    }
                }
            }
        }
    }

    fn train_pair(
        &self,
        center: usize,
        context: usize,
        lr: f32,
        grad: &mut [f32],
        rng: &mut ChaCha8Rng,
    ) {
        grad.iter_mut().for_each(|g| *g = 0.0);
        // SAFETY: one row of each matrix is borrowed at a time per thread.
        let w = unsafe { self.words.row(center) };
        update_pair(w, unsafe { self.contexts.row(context) }, true, lr, grad);
        for _ in 0..self.config.negatives {
            let Some(neg) = (0..NEGATIVE_ATTEMPTS)
                .map(|_| self.noise.sample(rng))
                .find(|&n| n != context)
            else {
                continue;
            };
            update_pair(w, unsafe { self.contexts.row(neg) }, false, lr, grad);
        }
        for (wi, gi) in w.iter_mut().zip(grad.iter()) {
            *wi += gi;
        }
    }
}

/// Accumulates the word gradient into `grad` and updates `c` in place.
#[inline]
pub(crate) fn update_pair(w: &[f32], c: &mut [f32], label: bool, lr: f32, grad: &mut [f32]) {
    let dot: f32 = w.iter().zip(c.iter()).map(|(a, b)| a * b).sum();
    let g = lr * (f32::from(u8::from(label)) - super::sigmoid(dot as f64) as f32);
    for ((gi, ci), wi) in grad.iter_mut().zip(c.iter_mut()).zip(w) {
        *gi += g * *ci;
        *ci += g * wi;
    }
}

/// Trains one SGNS model on the sentences selected by `spec`.
///
/// `corpus` may be encoded against a larger vocabulary than `vocab`; tokens
/// outside `vocab` are ignored. Words of `vocab` that never occur keep
/// their initial vectors.
pub fn train_submodel(
    spec: &SubCorpusSpec,
    corpus: &EncodedCorpus,
    vocab: &Vocabulary,
    config: &TrainConfig,
) -> Result<EmbeddingModel> {
    train_submodel_logged(spec, corpus, vocab, config).map(|(m, _)| m)
}

pub fn train_submodel_logged(
    spec: &SubCorpusSpec,
    corpus: &EncodedCorpus,
    vocab: &Vocabulary,
    config: &TrainConfig,
) -> Result<(EmbeddingModel, TrainLog)> {
    config.validate()?;
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let noise = NoiseTable::new(vocab)?;
    let map: Vec<u32> = corpus
        .vocab()
        .words()
        .iter()
        .map(|w| vocab.index(w).map_or(UNMAPPED, |i| i as u32))
        .collect();

    let total_count: u64 = vocab.counts().iter().sum();
    let keep: Vec<f32> = match config.subsample {
        Some(t) if total_count > 0 => vocab
            .counts()
            .iter()
            .map(|&c| {
                if c == 0 {
                    1.0
                } else {
                    subsample_keep_probability(c as f64 / total_count as f64, t)
                        .map_or(1.0, |p| p as f32)
                }
            })
            .collect(),
        _ => vec![1.0; vocab.len()],
    };

    let dim = config.dim;
    let mut words = Matrix::zeros(vocab.len(), dim);
    let mut init_rng = ChaCha8Rng::seed_from_u64(config.seed);
    let bound = 0.5 / dim as f32;
    for x in words.as_mut_slice() {
        *x = init_rng.random_range(-bound..bound);
    }
    let mut contexts = Matrix::zeros(vocab.len(), dim);

    let epoch_ids: Vec<Vec<usize>> = (0..config.epochs)
        .map(|e| spec.sentence_ids(e, corpus.len()))
        .collect();
    let mut log = TrainLog::default();
    let mut total = 0usize;
    for (epoch, ids) in epoch_ids.iter().enumerate() {
        let tokens = ids
            .iter()
            .map(|&s| {
                corpus
                    .sentence(s)
                    .iter()
                    .filter(|&&w| map[w as usize] != UNMAPPED)
                    .count()
            })
            .sum();
        total += tokens;
        log.epochs.push(EpochLog {
            epoch,
            sentences: ids.len(),
            tokens,
            sentence_digest: ids.iter().fold(mix64(epoch as u64), |h, &s| {
                mix64(h ^ s as u64)
            }),
        });
    }
    if config.epochs > 0 && total == 0 {
        return Err(Error::EmptyCorpus);
    }

    {
        let shared = Shared {
            corpus,
            map: &map,
            keep: &keep,
            noise: &noise,
            config,
            words: HogwildRows::new(&mut words),
            contexts: HogwildRows::new(&mut contexts),
            progress: AtomicUsize::new(0),
            total: total.max(1),
        };
        for (epoch, ids) in epoch_ids.iter().enumerate() {
            let worker_seed = |w: usize| {
                mix64(config.seed ^ mix64((epoch as u64) << 32 | w as u64 | 1 << 63))
            };
            if config.workers == 1 {
                let mut rng = ChaCha8Rng::seed_from_u64(worker_seed(0));
                shared.run_shard(ids, &mut rng);
            } else {
                let chunk = ids.len().div_ceil(config.workers).max(1);
                std::thread::scope(|scope| {
                    for (w, shard) in ids.chunks(chunk).enumerate() {
                        let shared = &shared;
                        scope.spawn(move || {
                            let mut rng = ChaCha8Rng::seed_from_u64(worker_seed(w));
                            shared.run_shard(shard, &mut rng);
                        });
                    }
                });
            }
        }
    }

    let model = EmbeddingModel::new(vocab.clone(), words, Some(contexts))?;
    Ok((model, log))
}
