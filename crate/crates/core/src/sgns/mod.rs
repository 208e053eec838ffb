//! Skip-gram with negative sampling.
//!
//! Each sub-model is trained by its own [`train_submodel`] call with no
//! state shared between calls. Inside one call, `workers` threads update
//! the shared word and context matrices without locks (Hogwild); only the
//! progress counter that drives learning-rate decay is atomic.

mod matrix;
mod model;
mod noise;
mod train;

pub use matrix::Matrix;
pub use model::EmbeddingModel;
pub use noise::{NoiseTable, NOISE_EXPONENT};
pub use train::{train_submodel, train_submodel_logged, EpochLog, TrainLog};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Hyper-parameters for one SGNS run.
///
/// Initialization (`W ~ U(-0.5/d, 0.5/d)`, `C = 0`), linear learning-rate
/// decay, dynamic windows and the subsampling rule follow the reference
/// word2vec conventions.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub dim: usize,
    /// Maximum context distance on each side of the center word.
    pub window: usize,
    pub negatives: usize,
    pub epochs: usize,
    pub initial_lr: f32,
    pub min_lr: f32,
    /// Subsampling threshold `t`; `None` disables subsampling.
    pub subsample: Option<f64>,
    pub workers: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            dim: 100,
            window: 10,
            negatives: 5,
            epochs: 5,
            initial_lr: 0.025,
            min_lr: 1e-4,
            subsample: Some(1e-4),
            workers: 1,
            seed: 1,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dim < 1 {
            return Err(Error::invalid("dim must be >= 1"));
        }
        if self.window < 1 {
            return Err(Error::invalid("window must be >= 1"));
        }
        if self.negatives < 1 {
            return Err(Error::invalid("negatives must be >= 1"));
        }
        if !(self.initial_lr > self.min_lr && self.min_lr >= 0.0) {
            return Err(Error::invalid("need initial_lr > min_lr >= 0"));
        }
        if let Some(t) = self.subsample {
            if t.is_nan() || t <= 0.0 {
                return Err(Error::invalid("subsample threshold must be > 0"));
            }
        }
        if self.workers < 1 {
            return Err(Error::invalid("workers must be >= 1"));
        }
        Ok(())
    }
}

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Numerically stable `ln σ(x)`.
#[inline]
pub fn log_sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        -(-x).exp().ln_1p()
    } else {
        x - x.exp().ln_1p()
    }
}

/// One gradient-ascent step on `label·ln σ(w·c) + (1-label)·ln σ(-w·c)`.
///
/// With `g = label - σ(w·c)`: `w += lr·g·c` and `c += lr·g·w`, using the
/// pre-update `w`.
pub fn sgd_step(w: &[f64], c: &[f64], label: bool, lr: f64) -> (Vec<f64>, Vec<f64>) {
    let dot: f64 = w.iter().zip(c).map(|(a, b)| a * b).sum();
    let g = lr * (f64::from(u8::from(label)) - sigmoid(dot));
    let w_new = w.iter().zip(c).map(|(wi, ci)| wi + g * ci).collect();
    let c_new = c.iter().zip(w).map(|(ci, wi)| ci + g * wi).collect();
    (w_new, c_new)
}

/// Probability of keeping a token of relative frequency `f` under
/// threshold `t`: `min(1, sqrt(t/f) + t/f)`.
pub fn subsample_keep_probability(f: f64, t: f64) -> Result<f64> {
    if !(f > 0.0 && f <= 1.0) {
        return Err(Error::invalid(format!("word frequency must be in (0, 1], got {f}")));
    }
    if t.is_nan() || t <= 0.0 {
        return Err(Error::invalid(format!("threshold must be > 0, got {t}")));
    }
    let r = t / f;
    Ok((r.sqrt() + r).min(1.0))
}

/// A positive (word, context) pair with its sampled negative contexts.
#[derive(Clone, Debug, PartialEq)]
pub struct PairSample {
    pub word: usize,
    pub context: usize,
    pub negatives: Vec<usize>,
}

/// Draws `k` negatives per pair from `noise` with a fixed seed. Negatives
/// equal to the positive context are redrawn (at most 8 attempts).
pub fn draw_pair_samples(
    pairs: &[(usize, usize)],
    k: usize,
    noise: &NoiseTable,
    seed: u64,
) -> Vec<PairSample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    pairs
        .iter()
        .map(|&(word, context)| {
            let negatives = (0..k)
                .filter_map(|_| {
                    (0..8)
                        .map(|_| noise.sample(&mut rng))
                        .find(|&n| n != context)
                })
                .collect();
            PairSample {
                word,
                context,
                negatives,
            }
        })
        .collect()
}

/// `ln σ(w·c) + Σ_neg ln σ(-w·c')` for one sample.
pub fn pair_objective(w: &[f32], c: &[f32], negatives: &[&[f32]]) -> f64 {
    let dot = |a: &[f32], b: &[f32]| -> f64 {
        a.iter().zip(b).map(|(&x, &y)| x as f64 * y as f64).sum()
    };
    log_sigmoid(dot(w, c)) + negatives.iter().map(|n| log_sigmoid(-dot(w, n))).sum::<f64>()
}

/// Mean SGNS objective over the samples, using word vectors for words and
/// context vectors for contexts and negatives.
pub fn objective_value(model: &EmbeddingModel, samples: &[PairSample]) -> Result<f64> {
    let ctx = model
        .context_vectors()
        .ok_or_else(|| Error::invalid("model has no context vectors"))?;
    if samples.is_empty() {
        return Err(Error::invalid("no pairs"));
    }
    let n = model.len();
    let mut total = 0.0;
    for s in samples {
        if s.word >= n || s.context >= n || s.negatives.iter().any(|&x| x >= n) {
            return Err(Error::invalid("pair outside vocabulary"));
        }
        let negs: Vec<&[f32]> = s.negatives.iter().map(|&x| ctx.row(x)).collect();
        total += pair_objective(model.word_vector(s.word), ctx.row(s.context), &negs);
    }
    Ok(total / samples.len() as f64)
}
