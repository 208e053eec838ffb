use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use super::SentenceStream;
use crate::error::{Error, Result};
use crate::util::write_atomic;

/// Word/index bijection with occurrence counts.
///
/// Index order is the matrix row order of every model built over this
/// vocabulary.
#[derive(Clone, Debug, PartialEq)]
pub struct Vocabulary {
    words: Vec<String>,
    counts: Vec<u64>,
    index: HashMap<String, usize>,
    total_tokens: u64,
}

impl Vocabulary {
    /// Keeps the `max_size` most frequent words with `count >= min_count`,
    /// ordered by descending count and then lexicographically.
    pub fn from_counts<I>(counts: I, min_count: u64, max_size: usize, total_tokens: u64) -> Self
    where
        I: IntoIterator<Item = (String, u64)>,
    {
        let mut entries: Vec<(String, u64)> =
            counts.into_iter().filter(|&(_, c)| c >= min_count).collect();
        entries.sort_unstable_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        entries.truncate(max_size);
        let mut vocab = Self::from_ordered(entries);
        vocab.total_tokens = vocab.total_tokens.max(total_tokens);
        vocab
    }

    /// Keeps the given order. Duplicate words keep their first occurrence.
    pub fn from_ordered<I>(entries: I) -> Self
    where
        I: IntoIterator<Item = (String, u64)>,
    {
        let mut words = Vec::new();
        let mut counts = Vec::new();
        let mut index = HashMap::new();
        for (w, c) in entries {
            if index.contains_key(&w) {
                continue;
            }
            index.insert(w.clone(), words.len());
            words.push(w);
            counts.push(c);
        }
        let total_tokens = counts.iter().sum();
        Vocabulary {
            words,
            counts,
            index,
            total_tokens,
        }
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn index(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn contains(&self, word: &str) -> bool {
        self.index.contains_key(word)
    }

    pub fn word(&self, idx: usize) -> &str {
        &self.words[idx]
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn count(&self, idx: usize) -> u64 {
        self.counts[idx]
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// Token count of the source corpus before pruning.
    pub fn total_tokens(&self) -> u64 {
        self.total_tokens
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, u64)> + '_ {
        self.words
            .iter()
            .map(String::as_str)
            .zip(self.counts.iter().copied())
    }

    /// Writes `word<TAB>count` lines in index order.
    pub fn write_tsv(&self, path: &Path) -> Result<()> {
        write_atomic(path, |w| {
            for (word, count) in self.iter() {
                writeln!(w, "{word}\t{count}")?;
            }
            Ok(())
        })
    }

    pub fn read_tsv(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut entries = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            if line.is_empty() {
                continue;
            }
            let parse_err = |message: &str| Error::Parse {
                path: path.to_path_buf(),
                line: lineno + 1,
                message: message.to_owned(),
            };
            let (word, count) = line
                .split_once('\t')
                .ok_or_else(|| parse_err("expected word<TAB>count"))?;
            let count = count
                .trim()
                .parse::<u64>()
                .map_err(|_| parse_err("invalid count"))?;
            entries.push((word.to_owned(), count));
        }
        Ok(Self::from_ordered(entries))
    }
}

/// Counts every token of the stream and keeps the `max_size` most frequent
/// words with `count >= min_count`.
pub fn build_vocabulary(
    stream: &SentenceStream,
    min_count: u64,
    max_size: usize,
) -> Result<Vocabulary> {
    if min_count < 1 {
        return Err(Error::invalid("min_count must be >= 1"));
    }
    if max_size < 1 {
        return Err(Error::invalid("max_size must be >= 1"));
    }
    let mut counts: HashMap<String, u64> = HashMap::new();
    let mut total = 0u64;
    stream.for_each(|sentence| {
        for tok in sentence {
            total += 1;
            match counts.get_mut(tok.as_str()) {
                Some(c) => *c += 1,
                None => {
                    counts.insert(tok.clone(), 1);
                }
            }
        }
    })?;
    if total == 0 {
        return Err(Error::EmptyCorpus);
    }
    Ok(Vocabulary::from_counts(counts, min_count, max_size, total))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn stream(s: &[&[&str]]) -> SentenceStream {
        SentenceStream::from_sentences(s.iter().map(|x| x.to_vec()).collect())
    }

    #[test]
    fn direct_counting() {
        let v = build_vocabulary(&stream(&[&["a", "b", "a"]]), 1, 10).unwrap();
        assert_eq!(v.words(), &["a", "b"]);
        assert_eq!(v.counts(), &[2, 1]);
        assert_eq!(v.total_tokens(), 3);
    }

    #[test]
    fn threshold_filter() {
        let v = build_vocabulary(&stream(&[&["a", "b", "a"]]), 2, 10).unwrap();
        assert_eq!(v.words(), &["a"]);
        assert_eq!(v.total_tokens(), 3);
    }

    #[test]
    fn ties_are_lexicographic_and_size_capped() {
        let v = build_vocabulary(&stream(&[&["d", "c", "b", "a", "a"]]), 1, 3).unwrap();
        assert_eq!(v.words(), &["a", "b", "c"]);
    }

    #[test]
    fn empty_stream_is_an_error() {
        let s = SentenceStream::from_sentences(Vec::<Vec<String>>::new());
        assert!(matches!(build_vocabulary(&s, 1, 10), Err(Error::EmptyCorpus)));
    }

    fn zipf_corpus(seed: u64, n_sentences: usize) -> Vec<Vec<String>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let weights: Vec<f64> = (1..=200).map(|r| 1.0 / r as f64).collect();
        let total: f64 = weights.iter().sum();
        (0..n_sentences)
            .map(|_| {
                let len = rng.random_range(3..15);
                (0..len)
                    .map(|_| {
                        let mut u = rng.random::<f64>() * total;
                        let mut k = 0;
                        while u > weights[k] && k + 1 < weights.len() {
                            u -= weights[k];
                            k += 1;
                        }
                        format!("w{k}")
                    })
                    .collect()
            })
            .collect()
    }

    #[test]
    fn zipf_corpus_matches_hash_count_oracle() {
        let sentences = zipf_corpus(7, 1000);
        let mut oracle: BTreeMap<String, u64> = BTreeMap::new();
        for s in &sentences {
            for t in s {
                *oracle.entry(t.clone()).or_default() += 1;
            }
        }
        let mut expected: Vec<(String, u64)> =
            oracle.into_iter().filter(|&(_, c)| c >= 5).collect();
        expected.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));

        let v = build_vocabulary(&SentenceStream::from_sentences(sentences), 5, usize::MAX).unwrap();
        let got: Vec<(String, u64)> = v.iter().map(|(w, c)| (w.to_owned(), c)).collect();
        assert_eq!(got, expected);
        for i in 0..v.len() {
            assert_eq!(v.index(v.word(i)), Some(i));
        }
    }

    #[test]
    fn tsv_round_trip() {
        let v = build_vocabulary(&stream(&[&["x", "y", "x"]]), 1, 10).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("vocab.tsv");
        v.write_tsv(&p).unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "x\t2\ny\t1\n");
        let back = Vocabulary::read_tsv(&p).unwrap();
        assert_eq!(back.words(), v.words());
        assert_eq!(back.counts(), v.counts());
    }

    #[test]
    fn tsv_reports_bad_line() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("vocab.tsv");
        std::fs::write(&p, "a\t1\nb 2\n").unwrap();
        match Vocabulary::read_tsv(&p) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    proptest! {
        #[test]
        fn order_independent_and_idempotent(seed in 0u64..1000, perm_seed in 0u64..1000) {
            use rand::seq::SliceRandom;
            let sentences = zipf_corpus(seed, 40);
            let mut shuffled = sentences.clone();
            shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(perm_seed));
            let a = build_vocabulary(&SentenceStream::from_sentences(sentences.clone()), 2, 50).unwrap();
            let b = build_vocabulary(&SentenceStream::from_sentences(shuffled), 2, 50).unwrap();
            let c = build_vocabulary(&SentenceStream::from_sentences(sentences), 2, 50).unwrap();
            prop_assert_eq!(&a, &b);
            prop_assert_eq!(&a, &c);
            prop_assert!(a.counts().iter().all(|&c| c >= 2));
        }
    }
}
