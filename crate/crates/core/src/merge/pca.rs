use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

/// Scores of the top-`d` principal components of `x`.
///
/// Columns are mean-centered, then projected onto the leading right
/// singular vectors. The decomposition runs on the smaller of the two Gram
/// matrices. Each output column is signed so that its largest-magnitude
/// entry is non-negative.
pub fn principal_components(x: &DMatrix<f64>, d: usize) -> Result<DMatrix<f64>> {
    let (m, p) = x.shape();
    if d < 1 {
        return Err(Error::invalid("target dimension must be >= 1"));
    }
    if m <= d {
        return Err(Error::invalid(format!(
            "need more rows than components: {m} rows, {d} components"
        )));
    }
    if d > p {
        return Err(Error::invalid(format!(
            "cannot extract {d} components from {p} columns"
        )));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("non-finite entries"));
    }
    let mut centered = x.clone();
    for mut col in centered.column_iter_mut() {
        let mean = col.mean();
        col.add_scalar_mut(-mean);
    }

    let mut scores = if p <= m {
        let gram = centered.transpose() * &centered;
        let eig = SymmetricEigen::new(gram);
        let order = descending(&eig.eigenvalues);
        let basis = DMatrix::from_fn(p, d, |r, c| eig.eigenvectors[(r, order[c])]);
        &centered * basis
    } else {
        let gram = &centered * centered.transpose();
        let eig = SymmetricEigen::new(gram);
        let order = descending(&eig.eigenvalues);
        DMatrix::from_fn(m, d, |r, c| {
            let k = order[c];
            eig.eigenvectors[(r, k)] * eig.eigenvalues[k].max(0.0).sqrt()
        })
    };

    for mut col in scores.column_iter_mut() {
        let (idx, _) = col
            .iter()
            .enumerate()
            .fold((0, -1.0f64), |best, (i, v)| {
                if v.abs() > best.1 {
                    (i, v.abs())
                } else {
                    best
                }
            });
        if col[idx] < 0.0 {
            col.neg_mut();
        }
    }
    Ok(scores)
}

fn descending(values: &nalgebra::DVector<f64>) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    order
}
