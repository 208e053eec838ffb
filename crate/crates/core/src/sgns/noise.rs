use rand::Rng;

use crate::corpus::Vocabulary;
use crate::error::{Error, Result};

pub const NOISE_EXPONENT: f64 = 0.75;

/// Alias table for the noise distribution `P(w) ∝ count(w)^0.75`.
#[derive(Clone, Debug)]
pub struct NoiseTable {
    prob: Vec<f64>,
    alias: Vec<u32>,
    mass: Vec<f64>,
}

impl NoiseTable {
    pub fn new(vocab: &Vocabulary) -> Result<Self> {
        Self::from_counts(vocab.counts())
    }

    pub fn from_counts(counts: &[u64]) -> Result<Self> {
        if counts.len() < 2 {
            return Err(Error::invalid("noise table needs at least two words"));
        }
        let weights: Vec<f64> = counts
            .iter()
            .map(|&c| (c as f64).powf(NOISE_EXPONENT))
            .collect();
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::invalid("noise table needs positive counts"));
        }
        let n = weights.len();
        let mass: Vec<f64> = weights.iter().map(|w| w / total).collect();

        // Vose's alias method.
        let mut scaled: Vec<f64> = mass.iter().map(|p| p * n as f64).collect();
        let mut prob = vec![0.0; n];
        let mut alias = vec![0u32; n];
        let (mut small, mut large): (Vec<usize>, Vec<usize>) =
            (0..n).partition(|&i| scaled[i] < 1.0);
        while let (Some(&s), Some(&l)) = (small.last(), large.last()) {
            small.pop();
            prob[s] = scaled[s];
            alias[s] = l as u32;
            scaled[l] = (scaled[l] + scaled[s]) - 1.0;
            if scaled[l] < 1.0 {
                large.pop();
                small.push(l);
            }
        }
        for i in large.into_iter().chain(small) {
            prob[i] = 1.0;
        }
        Ok(NoiseTable { prob, alias, mass })
    }

    pub fn len(&self) -> usize {
        self.prob.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prob.is_empty()
    }

    /// Exact sampling probability of `word`.
    pub fn probability(&self, word: usize) -> f64 {
        self.mass[word]
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let i = rng.random_range(0..self.prob.len());
        if rng.random::<f64>() < self.prob[i] {
            i
        } else {
            self.alias[i] as usize
        }
    }
}
