use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct SimilarityBenchmark {
    pub name: String,
    pub pairs: Vec<(String, String, f64)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CategorizationBenchmark {
    pub name: String,
    /// `(word, category index)`; indices run over `0..n_categories`.
    pub items: Vec<(String, usize)>,
    pub categories: Vec<String>,
}

impl CategorizationBenchmark {
    pub fn n_categories(&self) -> usize {
        self.categories.len()
    }
}

/// Analogy quads `(A, B, C, D)`: D relates to C as B relates to A.
///
/// SemEval-style relational data is accepted after it has been reduced to
/// this quad form.
#[derive(Clone, Debug, PartialEq)]
pub struct AnalogyBenchmark {
    pub name: String,
    pub quads: Vec<[String; 4]>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BenchmarkKind {
    Similarity,
    Categorization,
    Analogy,
}

impl fmt::Display for BenchmarkKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BenchmarkKind::Similarity => "similarity",
            BenchmarkKind::Categorization => "categorization",
            BenchmarkKind::Analogy => "analogy",
        })
    }
}

impl FromStr for BenchmarkKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "similarity" => Ok(BenchmarkKind::Similarity),
            "categorization" => Ok(BenchmarkKind::Categorization),
            "analogy" => Ok(BenchmarkKind::Analogy),
            other => Err(Error::invalid(format!("unknown benchmark kind '{other}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Benchmark {
    Similarity(SimilarityBenchmark),
    Categorization(CategorizationBenchmark),
    Analogy(AnalogyBenchmark),
}

impl Benchmark {
    pub fn name(&self) -> &str {
        match self {
            Benchmark::Similarity(b) => &b.name,
            Benchmark::Categorization(b) => &b.name,
            Benchmark::Analogy(b) => &b.name,
        }
    }

    pub fn kind(&self) -> BenchmarkKind {
        match self {
            Benchmark::Similarity(_) => BenchmarkKind::Similarity,
            Benchmark::Categorization(_) => BenchmarkKind::Categorization,
            Benchmark::Analogy(_) => BenchmarkKind::Analogy,
        }
    }

    /// Number of pairs, items or quads.
    pub fn len(&self) -> usize {
        match self {
            Benchmark::Similarity(b) => b.pairs.len(),
            Benchmark::Categorization(b) => b.items.len(),
            Benchmark::Analogy(b) => b.quads.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Distinct words, sorted.
    pub fn unique_words(&self) -> BTreeSet<&str> {
        match self {
            Benchmark::Similarity(b) => b
                .pairs
                .iter()
                .flat_map(|(a, c, _)| [a.as_str(), c.as_str()])
                .collect(),
            Benchmark::Categorization(b) => b.items.iter().map(|(w, _)| w.as_str()).collect(),
            Benchmark::Analogy(b) => b.quads.iter().flatten().map(String::as_str).collect(),
        }
    }
}

fn parse_error(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

fn fields(line: &str) -> Vec<&str> {
    if line.contains('\t') {
        line.split('\t').map(str::trim).filter(|f| !f.is_empty()).collect()
    } else if line.contains(',') {
        line.split(',').map(str::trim).filter(|f| !f.is_empty()).collect()
    } else {
        line.split_whitespace().collect()
    }
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

/// Guesses the benchmark kind from the first content line.
pub fn detect_kind(path: &Path) -> Result<BenchmarkKind> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let (line_no, first) = content_lines(&text)
        .next()
        .ok_or_else(|| parse_error(path, 1, "empty benchmark file"))?;
    if first.starts_with(':') {
        return Ok(BenchmarkKind::Analogy);
    }
    match fields(first).len() {
        2 => Ok(BenchmarkKind::Categorization),
        3 => Ok(BenchmarkKind::Similarity),
        4 => Ok(BenchmarkKind::Analogy),
        n => Err(parse_error(path, line_no, format!("cannot infer kind from {n} fields"))),
    }
}

fn file_stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

/// Loads a benchmark file.
///
/// Similarity: `word1 word2 score` (whitespace, tab or comma separated; a
/// first line with a non-numeric score is taken as a header).
/// Categorization: `word<TAB>category`. Analogy: four words per line with
/// optional `:`-prefixed section headers. Words are lowercased; `#` starts
/// a comment line.
pub fn load_benchmark(path: &Path, kind: BenchmarkKind) -> Result<Benchmark> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let name = file_stem(path);
    let bench = match kind {
        BenchmarkKind::Similarity => Benchmark::Similarity(parse_similarity(path, &name, &text)?),
        BenchmarkKind::Categorization => {
            Benchmark::Categorization(parse_categorization(path, &name, &text)?)
        }
        BenchmarkKind::Analogy => Benchmark::Analogy(parse_analogy(path, &name, &text)?),
    };
    if bench.is_empty() {
        return Err(parse_error(path, 0, "benchmark has no entries"));
    }
    Ok(bench)
}

fn parse_similarity(path: &Path, name: &str, text: &str) -> Result<SimilarityBenchmark> {
    let mut pairs = Vec::new();
    for (idx, (line_no, line)) in content_lines(text).enumerate() {
        let f = fields(line);
        if f.len() != 3 {
            return Err(parse_error(path, line_no, format!("expected 3 fields, found {}", f.len())));
        }
        let score = match f[2].parse::<f64>() {
            Ok(s) if s.is_finite() => s,
            Ok(_) => return Err(parse_error(path, line_no, "score is not finite")),
            Err(_) if idx == 0 => continue,
            Err(_) => return Err(parse_error(path, line_no, format!("bad score '{}'", f[2]))),
        };
        pairs.push((f[0].to_lowercase(), f[1].to_lowercase(), score));
    }
    Ok(SimilarityBenchmark {
        name: name.to_string(),
        pairs,
    })
}

fn parse_categorization(path: &Path, name: &str, text: &str) -> Result<CategorizationBenchmark> {
    let mut items = Vec::new();
    let mut categories: Vec<String> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    for (line_no, line) in content_lines(text) {
        let f = fields(line);
        if f.len() != 2 {
            return Err(parse_error(path, line_no, format!("expected 2 fields, found {}", f.len())));
        }
        let cat = *index.entry(f[1].to_string()).or_insert_with(|| {
            categories.push(f[1].to_string());
            categories.len() - 1
        });
        items.push((f[0].to_lowercase(), cat));
    }
    Ok(CategorizationBenchmark {
        name: name.to_string(),
        items,
        categories,
    })
}

fn parse_analogy(path: &Path, name: &str, text: &str) -> Result<AnalogyBenchmark> {
    let mut quads = Vec::new();
    for (line_no, line) in content_lines(text) {
        if line.starts_with(':') {
            continue;
        }
        let f: Vec<String> = line.split_whitespace().map(str::to_lowercase).collect();
        let Ok(quad) = <[String; 4]>::try_from(f) else {
            return Err(parse_error(path, line_no, "expected 4 words"));
        };
        let distinct: BTreeSet<&String> = quad.iter().collect();
        if distinct.len() != 4 {
            return Err(parse_error(path, line_no, "quad words are not distinct"));
        }
        quads.push(quad);
    }
    Ok(AnalogyBenchmark {
        name: name.to_string(),
        quads,
    })
}
