use std::collections::{HashMap, HashSet};

use super::{EncodedCorpus, SentenceStream, Vocabulary};
use crate::error::{Error, Result};
use crate::sgns::EmbeddingModel;
use crate::util::{dot, pearson};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DistributionKind {
    Unigram,
    Bigram,
}

/// Event of a distribution: a word id, or an ordered pair of consecutive
/// word ids.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Event {
    Word(u32),
    Pair(u32, u32),
}

/// Empirical probability distribution over word ids or word-id pairs.
#[derive(Clone, Debug)]
pub struct Distribution {
    kind: DistributionKind,
    probs: HashMap<Event, f64>,
}

impl Distribution {
    fn from_counts(kind: DistributionKind, counts: HashMap<Event, u64>) -> Option<Self> {
        let total: u64 = counts.values().sum();
        if total == 0 {
            return None;
        }
        let total = total as f64;
        let probs = counts
            .into_iter()
            .map(|(e, c)| (e, c as f64 / total))
            .collect();
        Some(Distribution { kind, probs })
    }

    /// Unigram distribution over id sentences; every id below `vocab_len`
    /// gets an entry, possibly zero.
    pub fn unigram<'a, I>(sentences: I, vocab_len: usize) -> Result<Self>
    where
        I: IntoIterator<Item = &'a [u32]>,
    {
        let mut counts: HashMap<Event, u64> =
            (0..vocab_len as u32).map(|w| (Event::Word(w), 0)).collect();
        for s in sentences {
            for &w in s {
                *counts.entry(Event::Word(w)).or_default() += 1;
            }
        }
        Self::from_counts(DistributionKind::Unigram, counts).ok_or(Error::NoInVocabularyTokens)
    }

    /// Distribution of ordered consecutive pairs; pairs never cross
    /// sentence boundaries.
    pub fn bigram<'a, I>(sentences: I) -> Result<Self>
    where
        I: IntoIterator<Item = &'a [u32]>,
    {
        let mut counts: HashMap<Event, u64> = HashMap::new();
        for s in sentences {
            for pair in s.windows(2) {
                *counts.entry(Event::Pair(pair[0], pair[1])).or_default() += 1;
            }
        }
        Self::from_counts(DistributionKind::Bigram, counts).ok_or(Error::NoBigrams)
    }

    /// Distribution from explicit probabilities (used by tests and tools).
    pub fn from_probs(kind: DistributionKind, probs: HashMap<Event, f64>) -> Result<Self> {
        if probs.values().any(|&p| !p.is_finite() || p < 0.0) {
            return Err(Error::invalid("probabilities must be finite and non-negative"));
        }
        let sum: f64 = probs.values().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::invalid(format!("probabilities sum to {sum}, not 1")));
        }
        Ok(Distribution { kind, probs })
    }

    pub fn kind(&self) -> DistributionKind {
        self.kind
    }

    pub fn prob(&self, event: &Event) -> f64 {
        self.probs.get(event).copied().unwrap_or(0.0)
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Event, f64)> + '_ {
        self.probs.iter().map(|(e, &p)| (e, p))
    }
}

fn encode_stream(stream: &SentenceStream, vocab: &Vocabulary) -> Result<Vec<Vec<u32>>> {
    let mut out = Vec::with_capacity(stream.len());
    stream.for_each(|s| {
        out.push(
            s.iter()
                .filter_map(|w| vocab.index(w).map(|i| i as u32))
                .collect(),
        )
    })?;
    Ok(out)
}

/// P(w) over in-vocabulary tokens of the stream.
pub fn unigram_distribution(stream: &SentenceStream, vocab: &Vocabulary) -> Result<Distribution> {
    if vocab.is_empty() {
        return Err(Error::invalid("vocabulary is empty"));
    }
    let enc = encode_stream(stream, vocab)?;
    Distribution::unigram(enc.iter().map(Vec::as_slice), vocab.len())
}

/// Distribution of consecutive in-vocabulary token pairs within sentences.
pub fn bigram_distribution(stream: &SentenceStream, vocab: &Vocabulary) -> Result<Distribution> {
    if vocab.is_empty() {
        return Err(Error::invalid("vocabulary is empty"));
    }
    let enc = encode_stream(stream, vocab)?;
    Distribution::bigram(enc.iter().map(Vec::as_slice))
}

/// KL(p_sample || p_full), summed over events with positive sample mass.
pub fn kl_divergence(p_sample: &Distribution, p_full: &Distribution) -> Result<f64> {
    if p_sample.kind != p_full.kind {
        return Err(Error::KindMismatch);
    }
    let mut kl = 0.0;
    for (event, p) in p_sample.iter() {
        if p <= 0.0 {
            continue;
        }
        let q = p_full.prob(event);
        if q <= 0.0 {
            return Err(Error::SupportViolation);
        }
        kl += p * (p / q).ln();
    }
    Ok(kl)
}

/// Pearson correlation between model dot products `w·c` and the shifted PMI
/// `log(P(w,c) / (P(w) P(c))) - log k` over the requested pairs.
///
/// Co-occurrences are counted with a fixed symmetric window of `window`
/// tokens; pairs that never co-occur or are missing from `vocab` or the model
/// are skipped.
pub fn shifted_pmi_diagnostic(
    model: &EmbeddingModel,
    stream: &SentenceStream,
    vocab: &Vocabulary,
    k: usize,
    window: usize,
    pairs: &[(String, String)],
) -> Result<f64> {
    let contexts = model
        .context_vectors()
        .ok_or_else(|| Error::invalid("model has no context vectors"))?;
    let corpus = EncodedCorpus::encode(stream, vocab.clone())?;
    let ids: Vec<(u32, u32)> = pairs
        .iter()
        .filter_map(|(w, c)| Some((vocab.index(w)? as u32, vocab.index(c)? as u32)))
        .collect();
    let wanted: HashSet<(u32, u32)> = ids.iter().copied().collect();

    let mut joint: HashMap<(u32, u32), u64> = HashMap::new();
    let mut as_word = vec![0u64; vocab.len()];
    let mut as_ctx = vec![0u64; vocab.len()];
    let mut total = 0u64;
    for s in corpus.sentences() {
        for (i, &w) in s.iter().enumerate() {
            let lo = i.saturating_sub(window);
            let hi = (i + window + 1).min(s.len());
            for (j, &c) in s.iter().enumerate().take(hi).skip(lo) {
                if j == i {
                    continue;
                }
                total += 1;
                as_word[w as usize] += 1;
                as_ctx[c as usize] += 1;
                if wanted.contains(&(w, c)) {
                    *joint.entry((w, c)).or_default() += 1;
                }
            }
        }
    }

    let shift = (k as f64).ln();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for &(w, c) in &ids {
        let Some(&n_wc) = joint.get(&(w, c)) else {
            continue;
        };
        let (Some(mw), Some(mc)) = (
            model.vocab().index(vocab.word(w as usize)),
            model.vocab().index(vocab.word(c as usize)),
        ) else {
            continue;
        };
        let t = total as f64;
        let pmi = ((n_wc as f64 / t)
            / ((as_word[w as usize] as f64 / t) * (as_ctx[c as usize] as f64 / t)))
            .ln();
        xs.push(dot(model.word_vector(mw), contexts.row(mc)) as f64);
        ys.push(pmi - shift);
    }
    if xs.len() < 10 {
        return Err(Error::Degenerate(format!(
            "{} valid pairs, need at least 10",
            xs.len()
        )));
    }
    pearson(&xs, &ys).ok_or_else(|| Error::Degenerate("zero variance".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::build_vocabulary;
    use crate::sgns::Matrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn stream(s: &[&[&str]]) -> SentenceStream {
        SentenceStream::from_sentences(s.iter().map(|x| x.to_vec()).collect())
    }

    fn ab_vocab() -> Vocabulary {
        Vocabulary::from_ordered(vec![("a".to_owned(), 1), ("b".to_owned(), 1)])
    }

    #[test]
    fn unigram_examples() {
        let d = unigram_distribution(&stream(&[&["a", "a", "b"]]), &ab_vocab()).unwrap();
        assert!((d.prob(&Event::Word(0)) - 2.0 / 3.0).abs() < 1e-15);
        assert!((d.prob(&Event::Word(1)) - 1.0 / 3.0).abs() < 1e-15);

        let d = unigram_distribution(&stream(&[&["a"]]), &ab_vocab()).unwrap();
        assert_eq!(d.prob(&Event::Word(0)), 1.0);
        assert_eq!(d.prob(&Event::Word(1)), 0.0);
        assert_eq!(d.len(), 2);
    }

    #[test]
    fn unigram_without_in_vocab_tokens_errors() {
        assert!(matches!(
            unigram_distribution(&stream(&[&["z"]]), &ab_vocab()),
            Err(Error::NoInVocabularyTokens)
        ));
    }

    #[test]
    fn bigram_examples() {
        let d = bigram_distribution(&stream(&[&["a", "b", "a"]]), &ab_vocab()).unwrap();
        assert_eq!(d.prob(&Event::Pair(0, 1)), 0.5);
        assert_eq!(d.prob(&Event::Pair(1, 0)), 0.5);

        assert!(matches!(
            bigram_distribution(&stream(&[&["a"]]), &ab_vocab()),
            Err(Error::NoBigrams)
        ));

        let d = bigram_distribution(&stream(&[&["a", "b"], &["b", "a"]]), &ab_vocab()).unwrap();
        assert_eq!(d.prob(&Event::Pair(0, 1)), 0.5);
        assert_eq!(d.prob(&Event::Pair(1, 0)), 0.5);
        assert_eq!(d.len(), 2);
    }

    #[test]
    fn kl_closed_forms() {
        let full = Distribution::from_probs(
            DistributionKind::Unigram,
            [(Event::Word(0), 0.5), (Event::Word(1), 0.5)].into(),
        )
        .unwrap();
        let sample =
            Distribution::from_probs(DistributionKind::Unigram, [(Event::Word(0), 1.0)].into())
                .unwrap();
        assert!((kl_divergence(&sample, &full).unwrap() - 2f64.ln()).abs() < 1e-15);
        assert_eq!(kl_divergence(&full, &full).unwrap(), 0.0);
        assert!(matches!(
            kl_divergence(&full, &sample),
            Err(Error::SupportViolation)
        ));
        let bi = Distribution::from_probs(DistributionKind::Bigram, [(Event::Pair(0, 0), 1.0)].into())
            .unwrap();
        assert!(matches!(kl_divergence(&bi, &full), Err(Error::KindMismatch)));
    }

    fn random_probs(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
        let raw: Vec<f64> = (0..n).map(|_| rng.random::<f64>() + 1e-3).collect();
        let s: f64 = raw.iter().sum();
        raw.into_iter().map(|x| x / s).collect()
    }

    #[test]
    fn kl_matches_direct_sum_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let p = random_probs(&mut rng, 50);
            let q = random_probs(&mut rng, 50);
            let oracle: f64 = p.iter().zip(&q).map(|(a, b)| a * (a / b).ln()).sum();
            let to_dist = |v: &[f64]| {
                Distribution::from_probs(
                    DistributionKind::Unigram,
                    v.iter().enumerate().map(|(i, &x)| (Event::Word(i as u32), x)).collect(),
                )
                .unwrap()
            };
            let got = kl_divergence(&to_dist(&p), &to_dist(&q)).unwrap();
            assert!((got - oracle).abs() < 1e-12, "{got} vs {oracle}");
            assert!(got >= -1e-12);
        }
    }

    fn pmi_fixture() -> (SentenceStream, Vocabulary) {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let words = ["a", "b", "c", "d", "e", "f", "g", "h"];
        let sentences: Vec<Vec<&str>> = (0..400)
            .map(|_| (0..8).map(|_| words[rng.random_range(0..words.len())]).collect())
            .collect();
        let s = SentenceStream::from_sentences(sentences);
        let v = build_vocabulary(&s, 1, 100).unwrap();
        (s, v)
    }

    fn all_pairs(v: &Vocabulary) -> Vec<(String, String)> {
        let mut out = Vec::new();
        for a in v.words() {
            for b in v.words() {
                out.push((a.clone(), b.clone()));
            }
        }
        out
    }

    /// Shifted PMI by brute force over every pair.
    fn pmi_table(s: &SentenceStream, v: &Vocabulary, k: usize, window: usize) -> Vec<Vec<f64>> {
        let n = v.len();
        let mut joint = vec![vec![0f64; n]; n];
        s.for_each(|sent| {
            let ids: Vec<usize> = sent.iter().map(|w| v.index(w).unwrap()).collect();
            for i in 0..ids.len() {
                for j in 0..ids.len() {
                    if i != j && i.abs_diff(j) <= window {
                        joint[ids[i]][ids[j]] += 1.0;
                    }
                }
            }
        })
        .unwrap();
        let total: f64 = joint.iter().flatten().sum();
        let rows: Vec<f64> = joint.iter().map(|r| r.iter().sum()).collect();
        let cols: Vec<f64> = (0..n).map(|c| joint.iter().map(|r| r[c]).sum()).collect();
        (0..n)
            .map(|w| {
                (0..n)
                    .map(|c| {
                        ((joint[w][c] / total) / ((rows[w] / total) * (cols[c] / total))).ln()
                            - (k as f64).ln()
                    })
                    .collect()
            })
            .collect()
    }

    #[test]
    fn pmi_diagnostic_exact_and_negated() {
        let (s, v) = pmi_fixture();
        let table = pmi_table(&s, &v, 5, 2);
        let n = v.len();
        // W = identity, C[c][w] = shifted PMI(w, c): every w·c is exact.
        let mut words = Matrix::zeros(n, n);
        let mut ctx = Matrix::zeros(n, n);
        for (w, pmi) in table.iter().enumerate() {
            words.row_mut(w)[w] = 1.0;
            for (c, value) in pmi.iter().enumerate() {
                ctx.row_mut(c)[w] = *value as f32;
            }
        }
        let model = EmbeddingModel::new(v.clone(), words.clone(), Some(ctx.clone())).unwrap();
        let r = shifted_pmi_diagnostic(&model, &s, &v, 5, 2, &all_pairs(&v)).unwrap();
        assert!((r - 1.0).abs() < 1e-6, "{r}");

        for x in words.as_mut_slice() {
            *x = -*x;
        }
        let neg = EmbeddingModel::new(v.clone(), words, Some(ctx)).unwrap();
        let r = shifted_pmi_diagnostic(&neg, &s, &v, 5, 2, &all_pairs(&v)).unwrap();
        assert!((r + 1.0).abs() < 1e-6, "{r}");
    }

    #[test]
    fn pmi_diagnostic_needs_ten_pairs() {
        let (s, v) = pmi_fixture();
        let n = v.len();
        let model =
            EmbeddingModel::new(v.clone(), Matrix::zeros(n, 2), Some(Matrix::zeros(n, 2))).unwrap();
        let few: Vec<_> = all_pairs(&v).into_iter().take(9).collect();
        assert!(matches!(
            shifted_pmi_diagnostic(&model, &s, &v, 5, 2, &few),
            Err(Error::Degenerate(_))
        ));
    }
}
