use nalgebra::DMatrix;

use crate::error::{Error, Result};

const SVD_EPS: f64 = 1e-15;
const SVD_MAX_ITER: usize = 10_000;

/// Orthogonal `W` minimizing `‖M W − Y‖_F`: `W = U Vᵀ` where
/// `Mᵀ Y = U Σ Vᵀ`.
pub fn orthogonal_procrustes(m: &DMatrix<f64>, y: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if m.shape() != y.shape() {
        return Err(Error::invalid(format!(
            "shape mismatch: {:?} vs {:?}",
            m.shape(),
            y.shape()
        )));
    }
    if m.nrows() == 0 {
        return Err(Error::invalid("procrustes needs at least one row"));
    }
    if m.iter().chain(y.iter()).any(|x| !x.is_finite()) {
        return Err(Error::invalid("non-finite entries"));
    }
    let cross = m.transpose() * y;
    let svd = nalgebra::linalg::SVD::try_new(cross, true, true, SVD_EPS, SVD_MAX_ITER)
        .ok_or(Error::SvdNonConvergence)?;
    let u = svd.u.ok_or(Error::SvdNonConvergence)?;
    let v_t = svd.v_t.ok_or(Error::SvdNonConvergence)?;
    Ok(u * v_t)
}

/// Rows for words missing from a model: solves `Y* = M* W` as `M* = Y* Wᵀ`.
pub fn reconstruct_missing(y_star: &DMatrix<f64>, w: &DMatrix<f64>) -> DMatrix<f64> {
    y_star * w.transpose()
}

/// `(1/n) Σ ‖Y − M_i W_i‖_F / sqrt(|V| d)` over completed models.
pub fn displacement(
    y: &DMatrix<f64>,
    completed: &[DMatrix<f64>],
    transforms: &[DMatrix<f64>],
) -> Result<f64> {
    if completed.len() != transforms.len() || completed.is_empty() {
        return Err(Error::invalid("need one transform per model"));
    }
    let (rows, cols) = y.shape();
    let norm = ((rows * cols) as f64).sqrt();
    let mut total = 0.0;
    for (m, w) in completed.iter().zip(transforms) {
        if m.shape() != y.shape() {
            return Err(Error::invalid("completed model shape differs from Y"));
        }
        total += (y - m * w).norm() / norm;
    }
    Ok(total / completed.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::merge::testutil::{gaussian, random_orthogonal};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn orthogonality_error(w: &DMatrix<f64>) -> f64 {
        (w.transpose() * w - DMatrix::identity(w.ncols(), w.ncols())).norm()
    }

    #[test]
    fn identical_inputs_give_zero_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let m = gaussian(20, 4, &mut rng);
        let w = orthogonal_procrustes(&m, &m).unwrap();
        assert!((&m * &w - &m).norm() < 1e-10);
        assert!(orthogonality_error(&w) < 1e-8);
    }

    #[test]
    fn recovers_exact_rotation() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let m = gaussian(30, 5, &mut rng);
        let r = random_orthogonal(5, &mut rng);
        let y = &m * &r;
        let w = orthogonal_procrustes(&m, &y).unwrap();
        assert!((&m * &w - &y).norm() < 1e-8);
    }

    #[test]
    fn beats_random_orthogonal_candidates() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = gaussian(6, 3, &mut rng);
        let y = gaussian(6, 3, &mut rng);
        let w = orthogonal_procrustes(&m, &y).unwrap();
        let best = (&m * &w - &y).norm();
        for _ in 0..10_000 {
            let q = random_orthogonal(3, &mut rng);
            assert!(best <= (&m * &q - &y).norm() + 1e-9);
        }
    }

    #[test]
    fn output_is_always_orthogonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for d in 1..8 {
            for rows in [1, d, 3 * d] {
                let m = gaussian(rows, d, &mut rng);
                let y = gaussian(rows, d, &mut rng);
                let w = orthogonal_procrustes(&m, &y).unwrap();
                assert!(orthogonality_error(&w) < 1e-8);
            }
        }
    }

    #[test]
    fn rejects_bad_input() {
        let a = DMatrix::<f64>::zeros(3, 2);
        assert!(orthogonal_procrustes(&a, &DMatrix::zeros(2, 2)).is_err());
        assert!(orthogonal_procrustes(&DMatrix::zeros(0, 2), &DMatrix::zeros(0, 2)).is_err());
        let mut nan = a.clone();
        nan[(0, 0)] = f64::NAN;
        assert!(orthogonal_procrustes(&nan, &a).is_err());
    }

    #[test]
    fn reconstruction_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let y = gaussian(7, 4, &mut rng);
        assert_eq!(reconstruct_missing(&y, &DMatrix::identity(4, 4)), y);

        let m = gaussian(7, 4, &mut rng);
        let w = random_orthogonal(4, &mut rng);
        let back = reconstruct_missing(&(&m * &w), &w);
        assert!((back - &m).abs().max() < 1e-12);

        // generic least-squares oracle for X W = Y
        let x = reconstruct_missing(&y, &w);
        let lsq = w
            .transpose()
            .svd(true, true)
            .solve(&y.transpose(), 1e-14)
            .unwrap()
            .transpose();
        assert!((x - lsq).abs().max() < 1e-10);
    }

    #[test]
    fn displacement_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let m = gaussian(5, 3, &mut rng);
        let w = random_orthogonal(3, &mut rng);
        let y = &m * &w;
        assert!(displacement(&y, &[m.clone(), m.clone()], &[w.clone(), w.clone()]).unwrap() < 1e-12);

        let ones = DMatrix::from_element(5, 3, 1.0);
        let zero = DMatrix::zeros(5, 3);
        let d = displacement(&ones, &[zero], &[DMatrix::identity(3, 3)]).unwrap();
        assert!((d - 1.0).abs() < 1e-15);

        let models: Vec<_> = (0..3).map(|_| gaussian(5, 3, &mut rng)).collect();
        let ws: Vec<_> = (0..3).map(|_| random_orthogonal(3, &mut rng)).collect();
        let y = gaussian(5, 3, &mut rng);
        let mut oracle = 0.0;
        for (m, w) in models.iter().zip(&ws) {
            let mut ss = 0.0;
            for r in 0..5 {
                for c in 0..3 {
                    let mut mw = 0.0;
                    for k in 0..3 {
                        mw += m[(r, k)] * w[(k, c)];
                    }
                    ss += (y[(r, c)] - mw).powi(2);
                }
            }
            oracle += ss.sqrt() / 15f64.sqrt();
        }
        oracle /= 3.0;
        assert!((displacement(&y, &models, &ws).unwrap() - oracle).abs() < 1e-12);
    }
}
