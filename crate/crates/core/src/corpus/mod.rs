//! Corpus ingestion, vocabulary construction and distributional statistics.

mod stats;
mod vocab;

use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use crate::error::{Error, Result};

pub use stats::{
    bigram_distribution, kl_divergence, shifted_pmi_diagnostic, unigram_distribution,
    Distribution, DistributionKind, Event,
};
pub use vocab::{build_vocabulary, Vocabulary};

/// Default cap on sentence length; longer lines are split into chunks.
pub const DEFAULT_MAX_SENTENCE_LEN: usize = 1000;

/// Lowercases, splits on whitespace and strips punctuation from token
/// edges. Tokens made only of punctuation are dropped.
pub fn tokenize_line(text: &str) -> Vec<String> {
    text.split_whitespace()
        .filter_map(|raw| {
            let tok = raw.trim_matches(|c: char| !c.is_alphanumeric());
            if tok.is_empty() {
                None
            } else {
                Some(tok.to_lowercase())
            }
        })
        .collect()
}

#[derive(Clone, Debug)]
enum Source {
    File { path: PathBuf, max_len: usize },
    Memory(Arc<Vec<Vec<String>>>),
}

/// Restartable stream of tokenized, non-empty sentences.
///
/// File sources hold one sentence per line. Lines longer than the maximum
/// sentence length are split into consecutive chunks, each counted as a
/// sentence, so single-line corpora such as text8 still have a usable
/// sentence structure.
#[derive(Clone, Debug)]
pub struct SentenceStream {
    source: Source,
    len: usize,
}

impl SentenceStream {
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        Self::open_with_max_len(path, DEFAULT_MAX_SENTENCE_LEN)
    }

    pub fn open_with_max_len(path: impl AsRef<Path>, max_len: usize) -> Result<Self> {
        if max_len == 0 {
            return Err(Error::invalid("max sentence length must be >= 1"));
        }
        let mut stream = SentenceStream {
            source: Source::File {
                path: path.as_ref().to_path_buf(),
                max_len,
            },
            len: 0,
        };
        let mut n = 0;
        stream.for_each(|_| n += 1)?;
        stream.len = n;
        Ok(stream)
    }

    /// In-memory stream; empty sentences are discarded.
    pub fn from_sentences<S: AsRef<str>>(sentences: Vec<Vec<S>>) -> Self {
        let sentences: Vec<Vec<String>> = sentences
            .into_iter()
            .filter(|s| !s.is_empty())
            .map(|s| s.iter().map(|t| t.as_ref().to_owned()).collect())
            .collect();
        SentenceStream {
            len: sentences.len(),
            source: Source::Memory(Arc::new(sentences)),
        }
    }

    /// In-memory stream from raw text, one sentence per line.
    pub fn from_text(text: &str) -> Self {
        Self::from_sentences(text.lines().map(tokenize_line).collect())
    }

    /// Number of sentences yielded per full pass.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Runs one full pass, calling `f` on every sentence in order.
    pub fn for_each<F: FnMut(&[String])>(&self, mut f: F) -> Result<()> {
        match &self.source {
            Source::Memory(sentences) => {
                sentences.iter().for_each(|s| f(s));
                Ok(())
            }
            Source::File { path, max_len } => {
                let file = File::open(path).map_err(|e| Error::io(path, e))?;
                for line in BufReader::new(file).lines() {
                    let line = line.map_err(|e| Error::io(path, e))?;
                    let tokens = tokenize_line(&line);
                    for chunk in tokens.chunks(*max_len) {
                        f(chunk);
                    }
                }
                Ok(())
            }
        }
    }
}

/// Corpus re-encoded as vocabulary ids with random access by sentence id.
///
/// Out-of-vocabulary tokens are removed; sentence ids stay aligned with the
/// source stream, so a sentence may become empty.
#[derive(Clone, Debug)]
pub struct EncodedCorpus {
    vocab: Vocabulary,
    ids: Vec<u32>,
    offsets: Vec<usize>,
}

impl EncodedCorpus {
    pub fn encode(stream: &SentenceStream, vocab: Vocabulary) -> Result<Self> {
        let mut ids = Vec::new();
        let mut offsets = Vec::with_capacity(stream.len() + 1);
        offsets.push(0);
        stream.for_each(|sentence| {
            ids.extend(
                sentence
                    .iter()
                    .filter_map(|w| vocab.index(w).map(|i| i as u32)),
            );
            offsets.push(ids.len());
        })?;
        if offsets.len() == 1 {
            return Err(Error::EmptyCorpus);
        }
        Ok(EncodedCorpus {
            vocab,
            ids,
            offsets,
        })
    }

    /// Builds directly from id sentences over `vocab`.
    pub fn from_ids(vocab: Vocabulary, sentences: &[Vec<u32>]) -> Result<Self> {
        if sentences.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        let mut ids = Vec::new();
        let mut offsets = vec![0];
        for s in sentences {
            if let Some(&bad) = s.iter().find(|&&i| i as usize >= vocab.len()) {
                return Err(Error::invalid(format!("word id {bad} out of range")));
            }
            ids.extend_from_slice(s);
            offsets.push(ids.len());
        }
        Ok(EncodedCorpus {
            vocab,
            ids,
            offsets,
        })
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    /// Number of sentences.
    pub fn len(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn sentence(&self, id: usize) -> &[u32] {
        &self.ids[self.offsets[id]..self.offsets[id + 1]]
    }

    pub fn sentences(&self) -> impl Iterator<Item = &[u32]> + '_ {
        (0..self.len()).map(move |i| self.sentence(i))
    }

    /// In-vocabulary token count.
    pub fn token_count(&self) -> usize {
        self.ids.len()
    }

    /// Mean in-vocabulary sentence length.
    pub fn mean_sentence_len(&self) -> f64 {
        self.ids.len() as f64 / self.len() as f64
    }

    /// Per-word counts over the given sentences, indexed by vocabulary id.
    pub fn counts_over<I: IntoIterator<Item = usize>>(&self, sentence_ids: I) -> Vec<u64> {
        let mut counts = vec![0u64; self.vocab.len()];
        for sid in sentence_ids {
            for &w in self.sentence(sid) {
                counts[w as usize] += 1;
            }
        }
        counts
    }
}
