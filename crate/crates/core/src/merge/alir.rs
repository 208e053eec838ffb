use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::procrustes::{displacement, orthogonal_procrustes, reconstruct_missing};
use crate::error::{Error, Result};

/// Iteration controls for ALiR.
#[derive(Clone, Debug, PartialEq)]
pub struct AlirOptions {
    pub max_epochs: usize,
    /// Stop once the displacement changes by less than this between
    /// iterations.
    pub displacement_threshold: f64,
    /// Average each row only over models that contain the word, instead of
    /// over all completed models.
    pub mean_over_present_only: bool,
}

impl Default for AlirOptions {
    fn default() -> Self {
        AlirOptions {
            max_epochs: 3,
            displacement_threshold: 1e-4,
            mean_over_present_only: false,
        }
    }
}

/// Consensus matrix, per-model transforms and convergence history.
#[derive(Clone, Debug)]
pub struct AlignmentState {
    pub y: DMatrix<f64>,
    pub transforms: Vec<DMatrix<f64>>,
    pub masks: Vec<Vec<bool>>,
    pub displacements: Vec<f64>,
}

/// `rows × d` matrix with entries drawn from N(0, 1/d).
pub fn random_init(rows: usize, d: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, (1.0 / d as f64).sqrt()).expect("valid normal");
    DMatrix::from_fn(rows, d, |_, _| normal.sample(&mut rng))
}

/// Alternating Procrustes alignment with missing-row reconstruction.
///
/// Every model is a `|V| × d` matrix over the union vocabulary; rows whose
/// mask entry is false are missing from that model and their contents are
/// ignored. Each iteration fits `W_i` on the present rows, fills the
/// missing rows with `Y* W_iᵀ`, and replaces `Y` by the mean of the aligned
/// completed models.
pub fn alir(
    models: &[DMatrix<f64>],
    masks: &[Vec<bool>],
    init: DMatrix<f64>,
    opts: &AlirOptions,
) -> Result<AlignmentState> {
    if models.is_empty() {
        return Err(Error::invalid("no models to merge"));
    }
    if models.len() != masks.len() {
        return Err(Error::invalid("need one mask per model"));
    }
    if opts.max_epochs < 1 {
        return Err(Error::invalid("max_epochs must be >= 1"));
    }
    if opts.displacement_threshold.is_nan() || opts.displacement_threshold <= 0.0 {
        return Err(Error::invalid("displacement_threshold must be > 0"));
    }
    let (rows, d) = init.shape();
    for (m, mask) in models.iter().zip(masks) {
        if m.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                actual: m.ncols(),
            });
        }
        if m.nrows() != rows || mask.len() != rows {
            return Err(Error::invalid("model rows differ from consensus rows"));
        }
        if !mask.iter().any(|&p| p) {
            return Err(Error::invalid("a model has no present rows"));
        }
    }
    let coverage: Vec<usize> = (0..rows)
        .map(|r| masks.iter().filter(|m| m[r]).count())
        .collect();
    if let Some(r) = coverage.iter().position(|&c| c == 0) {
        return Err(Error::invalid(format!("row {r} is present in no model")));
    }

    let present: Vec<Vec<usize>> = masks
        .iter()
        .map(|m| (0..rows).filter(|&r| m[r]).collect())
        .collect();
    let missing: Vec<Vec<usize>> = masks
        .iter()
        .map(|m| (0..rows).filter(|&r| !m[r]).collect())
        .collect();

    let mut y = init;
    let mut transforms = Vec::with_capacity(models.len());
    let mut displacements: Vec<f64> = Vec::new();
    for _ in 0..opts.max_epochs {
        transforms.clear();
        let mut completed = Vec::with_capacity(models.len());
        for (i, m) in models.iter().enumerate() {
            let w = orthogonal_procrustes(&m.select_rows(&present[i]), &y.select_rows(&present[i]))?;
            let mut full = m.clone();
            if !missing[i].is_empty() {
                let filled = reconstruct_missing(&y.select_rows(&missing[i]), &w);
                for (k, &r) in missing[i].iter().enumerate() {
                    full.set_row(r, &filled.row(k));
                }
            }
            completed.push(full);
            transforms.push(w);
        }

        let mut next = DMatrix::zeros(rows, d);
        for (i, (m, w)) in completed.iter().zip(&transforms).enumerate() {
            let aligned = m * w;
            if opts.mean_over_present_only {
                for &r in &present[i] {
                    let mut row = next.row_mut(r);
                    row += aligned.row(r);
                }
            } else {
                next += aligned;
            }
        }
        if opts.mean_over_present_only {
            for (r, &c) in coverage.iter().enumerate() {
                next.row_mut(r).scale_mut(1.0 / c as f64);
            }
        } else {
            next.scale_mut(1.0 / models.len() as f64);
        }
        y = next;

        let disp = displacement(&y, &completed, &transforms)?;
        let done = displacements
            .last()
            .is_some_and(|prev| (prev - disp).abs() < opts.displacement_threshold);
        displacements.push(disp);
        if done {
            break;
        }
    }

    Ok(AlignmentState {
        y,
        transforms,
        masks: masks.to_vec(),
        displacements,
    })
}
