//! Combining independently trained sub-models into one embedding.
//!
//! [`concat_merge`] and [`pca_merge`] work on the vocabulary shared by all
//! sub-models. [`alir_merge`] aligns the sub-models to a consensus matrix
//! with orthogonal Procrustes fits and covers the union of their
//! vocabularies, reconstructing rows that a sub-model lacks.

mod alir;
mod pca;
mod procrustes;

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use nalgebra::DMatrix;

pub use alir::{alir, random_init, AlignmentState, AlirOptions};
pub use pca::principal_components;
pub use procrustes::{displacement, orthogonal_procrustes, reconstruct_missing};

use crate::corpus::Vocabulary;
use crate::error::{Error, Result};
use crate::sgns::{EmbeddingModel, Matrix};
use crate::util::write_atomic;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MergeMethod {
    Concat,
    Pca,
    Alir,
}

impl fmt::Display for MergeMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MergeMethod::Concat => "concat",
            MergeMethod::Pca => "pca",
            MergeMethod::Alir => "alir",
        })
    }
}

impl FromStr for MergeMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "concat" => Ok(MergeMethod::Concat),
            "pca" => Ok(MergeMethod::Pca),
            "alir" => Ok(MergeMethod::Alir),
            other => Err(Error::invalid(format!("unknown merge method '{other}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AlirInit {
    Random,
    Pca,
}

impl FromStr for AlirInit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(AlirInit::Random),
            "pca" => Ok(AlirInit::Pca),
            other => Err(Error::invalid(format!("unknown ALiR init '{other}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MergeConfig {
    pub method: MergeMethod,
    pub alir_init: AlirInit,
    /// Output dimension for PCA. ALiR keeps the sub-model dimension.
    pub target_dim: usize,
    pub max_epochs: usize,
    pub displacement_threshold: f64,
    pub mean_over_present_only: bool,
    pub seed: u64,
}

impl Default for MergeConfig {
    fn default() -> Self {
        MergeConfig {
            method: MergeMethod::Alir,
            alir_init: AlirInit::Pca,
            target_dim: 100,
            max_epochs: 3,
            displacement_threshold: 1e-4,
            mean_over_present_only: false,
            seed: 1,
        }
    }
}

impl MergeConfig {
    fn alir_options(&self) -> AlirOptions {
        AlirOptions {
            max_epochs: self.max_epochs,
            displacement_threshold: self.displacement_threshold,
            mean_over_present_only: self.mean_over_present_only,
        }
    }
}

/// Outcome of a merge.
#[derive(Clone, Debug, PartialEq)]
pub struct MergeReport {
    pub method: MergeMethod,
    /// Displacement after each ALiR iteration; empty for other methods.
    pub displacements: Vec<f64>,
    pub vocab_size: usize,
    /// Output-vocabulary words absent from each sub-model.
    pub missing_per_model: Vec<usize>,
    /// Words of the union vocabulary dropped from the output.
    pub dropped: usize,
}

impl MergeReport {
    /// `iteration,displacement` rows, iterations counted from 1.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("iteration,displacement\n");
        for (i, d) in self.displacements.iter().enumerate() {
            s.push_str(&format!("{},{}\n", i + 1, d));
        }
        s
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let csv = self.to_csv();
        write_atomic(path, |w| w.write_all(csv.as_bytes()))
    }
}

/// Words in every model, in the first model's order.
pub fn intersection_vocabulary(models: &[EmbeddingModel]) -> Vocabulary {
    let Some(first) = models.first() else {
        return Vocabulary::from_ordered(Vec::new());
    };
    Vocabulary::from_ordered(
        first
            .vocab()
            .words()
            .iter()
            .filter(|w| models.iter().all(|m| m.vocab().contains(w)))
            .map(|w| (w.clone(), summed_count(models, w))),
    )
}

/// Words in any model: the first model's order, then each later model's
/// new words in its order.
pub fn union_vocabulary(models: &[EmbeddingModel]) -> Vocabulary {
    let mut seen = HashSet::new();
    let mut entries = Vec::new();
    for m in models {
        for w in m.vocab().words() {
            if seen.insert(w.as_str()) {
                entries.push((w.clone(), summed_count(models, w)));
            }
        }
    }
    Vocabulary::from_ordered(entries)
}

fn summed_count(models: &[EmbeddingModel], word: &str) -> u64 {
    models
        .iter()
        .filter_map(|m| m.vocab().index(word).map(|i| m.vocab().count(i)))
        .sum()
}

fn to_f32_matrix(m: &DMatrix<f64>) -> Matrix {
    Matrix::from_vec(
        m.nrows(),
        m.ncols(),
        (0..m.nrows())
            .flat_map(|r| (0..m.ncols()).map(move |c| (r, c)))
            .map(|(r, c)| m[(r, c)] as f32)
            .collect(),
    )
}

fn concat_matrix(models: &[EmbeddingModel], vocab: &Vocabulary) -> DMatrix<f64> {
    let total_dim: usize = models.iter().map(EmbeddingModel::dim).sum();
    let mut out = DMatrix::zeros(vocab.len(), total_dim);
    for (r, word) in vocab.words().iter().enumerate() {
        let mut c = 0;
        for m in models {
            for &x in m.vector(word).expect("word in intersection") {
                out[(r, c)] = x as f64;
                c += 1;
            }
        }
    }
    out
}

fn missing_counts(models: &[EmbeddingModel], vocab: &Vocabulary) -> Vec<usize> {
    models
        .iter()
        .map(|m| vocab.words().iter().filter(|w| !m.vocab().contains(w)).count())
        .collect()
}

fn plain_report(method: MergeMethod, models: &[EmbeddingModel], vocab: &Vocabulary) -> MergeReport {
    MergeReport {
        method,
        displacements: Vec::new(),
        vocab_size: vocab.len(),
        missing_per_model: missing_counts(models, vocab),
        dropped: union_vocabulary(models).len() - vocab.len(),
    }
}

/// Concatenates each shared word's vectors in model order.
pub fn concat_merge(models: &[EmbeddingModel]) -> Result<EmbeddingModel> {
    if models.is_empty() {
        return Err(Error::invalid("no models to merge"));
    }
    let vocab = intersection_vocabulary(models);
    if vocab.is_empty() {
        return Err(Error::NoCommonVocabulary);
    }
    let m = concat_matrix(models, &vocab);
    EmbeddingModel::new(vocab, to_f32_matrix(&m), None)
}

/// First `d` principal components of the concatenated shared-vocabulary
/// matrix.
pub fn pca_merge(models: &[EmbeddingModel], d: usize) -> Result<EmbeddingModel> {
    if models.is_empty() {
        return Err(Error::invalid("no models to merge"));
    }
    let vocab = intersection_vocabulary(models);
    if vocab.is_empty() {
        return Err(Error::NoCommonVocabulary);
    }
    let scores = principal_components(&concat_matrix(models, &vocab), d)?;
    EmbeddingModel::new(vocab, to_f32_matrix(&scores), None)
}

/// ALiR over the union vocabulary.
pub fn alir_merge(
    models: &[EmbeddingModel],
    config: &MergeConfig,
) -> Result<(EmbeddingModel, MergeReport)> {
    let Some(first) = models.first() else {
        return Err(Error::invalid("no models to merge"));
    };
    let d = first.dim();
    if let Some(m) = models.iter().find(|m| m.dim() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            actual: m.dim(),
        });
    }
    let vocab = union_vocabulary(models);
    let n_rows = vocab.len();
    let mut matrices = Vec::with_capacity(models.len());
    let mut masks = Vec::with_capacity(models.len());
    for m in models {
        let mut mat = DMatrix::zeros(n_rows, d);
        let mut mask = vec![false; n_rows];
        for (r, w) in vocab.words().iter().enumerate() {
            if let Some(v) = m.vector(w) {
                mask[r] = true;
                for (c, &x) in v.iter().enumerate() {
                    mat[(r, c)] = x as f64;
                }
            }
        }
        matrices.push(mat);
        masks.push(mask);
    }

    let mut init = random_init(n_rows, d, config.seed);
    if config.alir_init == AlirInit::Pca {
        let shared = pca_merge(models, d)?;
        let pos: HashMap<&str, usize> = vocab
            .words()
            .iter()
            .enumerate()
            .map(|(i, w)| (w.as_str(), i))
            .collect();
        for (i, w) in shared.vocab().words().iter().enumerate() {
            let r = pos[w.as_str()];
            for (c, &x) in shared.word_vector(i).iter().enumerate() {
                init[(r, c)] = x as f64;
            }
        }
    }

    let state = alir(&matrices, &masks, init, &config.alir_options())?;
    let report = MergeReport {
        method: MergeMethod::Alir,
        displacements: state.displacements.clone(),
        vocab_size: n_rows,
        missing_per_model: missing_counts(models, &vocab),
        dropped: 0,
    };
    Ok((EmbeddingModel::new(vocab, to_f32_matrix(&state.y), None)?, report))
}

/// Merges with the configured method.
pub fn merge_models(
    models: &[EmbeddingModel],
    config: &MergeConfig,
) -> Result<(EmbeddingModel, MergeReport)> {
    match config.method {
        MergeMethod::Concat => {
            let out = concat_merge(models)?;
            let report = plain_report(MergeMethod::Concat, models, out.vocab());
            Ok((out, report))
        }
        MergeMethod::Pca => {
            let out = pca_merge(models, config.target_dim)?;
            let report = plain_report(MergeMethod::Pca, models, out.vocab());
            Ok((out, report))
        }
        MergeMethod::Alir => alir_merge(models, config),
    }
}

/// Result of the two-model averaging fixture.
#[derive(Clone, Debug, PartialEq)]
pub struct AveragingCheck {
    /// Nearest neighbour (Euclidean) of word 1 in each sub-model.
    pub submodel_neighbors: Vec<usize>,
    pub averaged_neighbor: usize,
    pub alir_neighbor: usize,
    /// Cosine similarities of word 1 to words 2 and 3 after averaging.
    pub averaged_cosines: [f64; 2],
    pub alir_cosines: [f64; 2],
}

impl AveragingCheck {
    /// Averaging breaks the sub-models' shared neighbour relation while the
    /// ALiR merge keeps it.
    pub fn holds(&self) -> bool {
        let reference = self.submodel_neighbors[0];
        self.submodel_neighbors.iter().all(|&n| n == reference)
            && self.averaged_neighbor != reference
            && self.alir_neighbor == reference
    }
}

/// Index (among `rows`, excluding `of`) nearest to row `of` in Euclidean
/// distance; ties go to the lower index.
pub fn nearest_neighbor(rows: &[Vec<f64>], of: usize) -> usize {
    let dist = |a: &[f64], b: &[f64]| -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum()
    };
    (0..rows.len())
        .filter(|&j| j != of)
        .min_by(|&a, &b| dist(&rows[of], &rows[a]).total_cmp(&dist(&rows[of], &rows[b])))
        .expect("at least two rows")
}

fn cosine64(a: &[f64], b: &[f64]) -> f64 {
    let ab: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        ab / (na * nb)
    }
}

/// Compares element-wise averaging with ALiR on a set of small models over
/// the same words (rows in matching order).
pub fn averaging_check(models: &[Vec<Vec<f64>>]) -> Result<AveragingCheck> {
    let Some(first) = models.first() else {
        return Err(Error::invalid("no models"));
    };
    let (rows, d) = (first.len(), first.first().map_or(0, Vec::len));
    if rows < 3 || d == 0 {
        return Err(Error::invalid("need at least three words"));
    }
    let submodel_neighbors = models.iter().map(|m| nearest_neighbor(m, 0)).collect();
    let averaged: Vec<Vec<f64>> = (0..rows)
        .map(|r| {
            (0..d)
                .map(|c| models.iter().map(|m| m[r][c]).sum::<f64>() / models.len() as f64)
                .collect()
        })
        .collect();

    let mats: Vec<DMatrix<f64>> = models
        .iter()
        .map(|m| DMatrix::from_fn(rows, d, |r, c| m[r][c]))
        .collect();
    let masks = vec![vec![true; rows]; models.len()];
    let opts = AlirOptions {
        max_epochs: 50,
        displacement_threshold: 1e-12,
        mean_over_present_only: false,
    };
    // Start from the first model, as in classical GPA.
    let state = alir(&mats, &masks, mats[0].clone(), &opts)?;
    let merged: Vec<Vec<f64>> = (0..rows)
        .map(|r| state.y.row(r).iter().copied().collect())
        .collect();

    Ok(AveragingCheck {
        submodel_neighbors,
        averaged_neighbor: nearest_neighbor(&averaged, 0),
        alir_neighbor: nearest_neighbor(&merged, 0),
        averaged_cosines: [cosine64(&averaged[0], &averaged[1]), cosine64(&averaged[0], &averaged[2])],
        alir_cosines: [cosine64(&merged[0], &merged[1]), cosine64(&merged[0], &merged[2])],
    })
}

/// The two-model, three-word fixture: the second model mirrors the first
/// across the vertical axis.
pub fn averaging_fixture() -> Vec<Vec<Vec<f64>>> {
    vec![
        vec![vec![1.0, 1.0], vec![99.0, 0.0], vec![1.0, -1.0]],
        vec![vec![-1.0, 1.0], vec![-99.0, 0.0], vec![-1.0, -1.0]],
    ]
}

/// Runs [`averaging_check`] on [`averaging_fixture`].
pub fn averaging_counterexample_check() -> bool {
    averaging_check(&averaging_fixture()).is_ok_and(|c| c.holds())
}
