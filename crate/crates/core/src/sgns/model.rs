use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use super::Matrix;
use crate::corpus::Vocabulary;
use crate::error::{Error, Result};
use crate::util::write_atomic;

/// Word vectors (and optionally context vectors) over a vocabulary.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingModel {
    vocab: Vocabulary,
    words: Matrix,
    contexts: Option<Matrix>,
}

impl EmbeddingModel {
    pub fn new(vocab: Vocabulary, words: Matrix, contexts: Option<Matrix>) -> Result<Self> {
        if words.rows() != vocab.len() {
            return Err(Error::DimensionMismatch {
                expected: vocab.len(),
                actual: words.rows(),
            });
        }
        if let Some(c) = &contexts {
            if c.rows() != words.rows() || c.cols() != words.cols() {
                return Err(Error::invalid("context matrix shape differs from word matrix"));
            }
        }
        if !words.is_finite() || !contexts.as_ref().is_none_or(Matrix::is_finite) {
            return Err(Error::invalid("embedding contains non-finite values"));
        }
        Ok(EmbeddingModel {
            vocab,
            words,
            contexts,
        })
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn dim(&self) -> usize {
        self.words.cols()
    }

    pub fn len(&self) -> usize {
        self.vocab.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vocab.is_empty()
    }

    pub fn word_vectors(&self) -> &Matrix {
        &self.words
    }

    pub fn context_vectors(&self) -> Option<&Matrix> {
        self.contexts.as_ref()
    }

    pub fn word_vector(&self, idx: usize) -> &[f32] {
        self.words.row(idx)
    }

    pub fn vector(&self, word: &str) -> Option<&[f32]> {
        self.vocab.index(word).map(|i| self.words.row(i))
    }

    /// Drops the context matrix.
    pub fn without_contexts(mut self) -> Self {
        self.contexts = None;
        self
    }

    /// Copy without the listed words; remaining rows keep their order.
    pub fn without_words(&self, remove: &std::collections::HashSet<String>) -> Self {
        let keep: Vec<usize> = (0..self.len())
            .filter(|&i| !remove.contains(self.vocab.word(i)))
            .collect();
        self.select_rows(&keep)
    }

    pub(crate) fn select_rows(&self, keep: &[usize]) -> Self {
        let vocab = Vocabulary::from_ordered(
            keep.iter()
                .map(|&i| (self.vocab.word(i).to_owned(), self.vocab.count(i))),
        );
        let pick = |m: &Matrix| {
            let rows: Vec<&[f32]> = keep.iter().map(|&i| m.row(i)).collect();
            let mut out = Matrix::from_rows(&rows);
            if rows.is_empty() {
                out = Matrix::zeros(0, m.cols());
            }
            out
        };
        EmbeddingModel {
            vocab,
            words: pick(&self.words),
            contexts: self.contexts.as_ref().map(pick),
        }
    }

    /// Path of the context-vector companion file.
    pub fn context_path(path: &Path) -> PathBuf {
        let mut p = path.as_os_str().to_owned();
        p.push(".ctx");
        PathBuf::from(p)
    }

    /// Writes word2vec text format, plus `<path>.ctx` when context vectors
    /// are present and `with_contexts` is set.
    pub fn write_word2vec(&self, path: &Path, with_contexts: bool) -> Result<()> {
        write_matrix(path, &self.vocab, &self.words)?;
        if with_contexts {
            if let Some(c) = &self.contexts {
                write_matrix(&Self::context_path(path), &self.vocab, c)?;
            }
        }
        Ok(())
    }

    /// Reads word2vec text format. Counts are not stored in the format and
    /// are set to zero. A `.ctx` companion is loaded when it exists.
    pub fn read_word2vec(path: &Path) -> Result<Self> {
        let (words, matrix) = read_matrix(path)?;
        let ctx_path = Self::context_path(path);
        let contexts = if ctx_path.exists() {
            let (ctx_words, ctx) = read_matrix(&ctx_path)?;
            if ctx_words != words {
                return Err(Error::invalid(format!(
                    "{}: vocabulary differs from {}",
                    ctx_path.display(),
                    path.display()
                )));
            }
            Some(ctx)
        } else {
            None
        };
        let vocab = Vocabulary::from_ordered(words.into_iter().map(|w| (w, 0)));
        if vocab.len() != matrix.rows() {
            return Err(Error::invalid(format!("{}: duplicate words", path.display())));
        }
        EmbeddingModel::new(vocab, matrix, contexts)
    }
}

fn write_matrix(path: &Path, vocab: &Vocabulary, m: &Matrix) -> Result<()> {
    write_atomic(path, |w| {
        writeln!(w, "{} {}", m.rows(), m.cols())?;
        for i in 0..m.rows() {
            w.write_all(vocab.word(i).as_bytes())?;
            for x in m.row(i) {
                write!(w, " {x}")?;
            }
            w.write_all(b"\n")?;
        }
        Ok(())
    })
}

fn read_matrix(path: &Path) -> Result<(Vec<String>, Matrix)> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut lines = BufReader::new(file).lines();
    let parse_err = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let header = lines
        .next()
        .ok_or_else(|| parse_err(1, "missing header".into()))?
        .map_err(|e| Error::io(path, e))?;
    let mut parts = header.split_whitespace().map(str::parse::<usize>);
    let (rows, cols) = match (parts.next(), parts.next(), parts.next()) {
        (Some(Ok(r)), Some(Ok(c)), None) => (r, c),
        _ => return Err(parse_err(1, "header must be '<rows> <dims>'".into())),
    };
    let mut words = Vec::with_capacity(rows);
    let mut data = Vec::with_capacity(rows * cols);
    for (i, line) in lines.enumerate() {
        let lineno = i + 2;
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.is_empty() {
            continue;
        }
        if words.len() == rows {
            return Err(parse_err(lineno, format!("more than {rows} rows")));
        }
        let mut fields = line.split(' ').filter(|f| !f.is_empty());
        let word = fields
            .next()
            .ok_or_else(|| parse_err(lineno, "empty line".into()))?;
        let before = data.len();
        for f in fields {
            data.push(
                f.parse::<f32>()
                    .map_err(|_| parse_err(lineno, format!("invalid number '{f}'")))?,
            );
        }
        if data.len() - before != cols {
            return Err(parse_err(
                lineno,
                format!("expected {cols} values, got {}", data.len() - before),
            ));
        }
        words.push(word.to_owned());
    }
    if words.len() != rows {
        return Err(parse_err(
            rows + 1,
            format!("expected {rows} rows, got {}", words.len()),
        ));
    }
    Ok((words, Matrix::from_vec(rows, cols, data)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> EmbeddingModel {
        let vocab = Vocabulary::from_ordered([("the".into(), 5), ("cat".into(), 2)]);
        let w = Matrix::from_rows(&[[0.1f32, -2.5e-7, 3.0], [1.0 / 3.0, 0.0, -1.0]]);
        let c = Matrix::from_rows(&[[1.0f32, 2.0, 3.0], [4.0, 5.0, 6.0]]);
        EmbeddingModel::new(vocab, w, Some(c)).unwrap()
    }

    #[test]
    fn word2vec_text_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.vec");
        let m = toy();
        m.write_word2vec(&p, true).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        assert!(text.starts_with("2 3\nthe 0.1 -0.00000025 3\n"), "{text}");
        let back = EmbeddingModel::read_word2vec(&p).unwrap();
        assert_eq!(back.word_vectors(), m.word_vectors());
        assert_eq!(back.context_vectors(), m.context_vectors());
        assert_eq!(back.vocab().words(), m.vocab().words());
    }

    #[test]
    fn malformed_rows_report_line() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bad.vec");
        std::fs::write(&p, "2 2\na 1 2\nb 1\n").unwrap();
        match EmbeddingModel::read_word2vec(&p) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        std::fs::write(&p, "3 2\na 1 2\n").unwrap();
        assert!(EmbeddingModel::read_word2vec(&p).is_err());
    }

    #[test]
    fn rejects_shape_mismatch_and_nan() {
        let vocab = Vocabulary::from_ordered([("a".into(), 1)]);
        assert!(EmbeddingModel::new(vocab.clone(), Matrix::zeros(2, 2), None).is_err());
        let nan = Matrix::from_rows(&[[f32::NAN]]);
        assert!(EmbeddingModel::new(vocab, nan, None).is_err());
    }

    #[test]
    fn without_words_keeps_order() {
        let m = toy();
        let pruned = m.without_words(&["the".to_owned()].into());
        assert_eq!(pruned.vocab().words(), &["cat"]);
        assert_eq!(pruned.word_vector(0), m.word_vector(1));
        assert_eq!(pruned.context_vectors().unwrap().row(0), &[4.0, 5.0, 6.0]);
    }
}
