use std::collections::HashMap;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub const KMEANS_RESTARTS: usize = 10;
pub const KMEANS_MAX_ITER: usize = 100;

/// Sum over clusters of the largest category count, over the item count.
///
/// `assignments[i]` and `truth[i]` are the cluster and category of item `i`.
pub fn purity(assignments: &[usize], truth: &[usize]) -> Result<f64> {
    if assignments.is_empty() {
        return Err(Error::invalid("empty clustering"));
    }
    if assignments.len() != truth.len() {
        return Err(Error::invalid("assignments and truth differ in length"));
    }
    let mut table: HashMap<usize, HashMap<usize, usize>> = HashMap::new();
    for (&a, &t) in assignments.iter().zip(truth) {
        *table.entry(a).or_default().entry(t).or_default() += 1;
    }
    let majority: usize = table
        .values()
        .map(|counts| counts.values().copied().max().unwrap_or(0))
        .sum();
    Ok(majority as f64 / assignments.len() as f64)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Clustering {
    pub assignments: Vec<usize>,
    /// Sum of cosine similarities of points to their centroids.
    pub objective: f64,
}

fn normalize(v: &mut [f64]) {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn nearest(point: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::NEG_INFINITY);
    for (c, centroid) in centroids.iter().enumerate() {
        let s = dot(point, centroid);
        if s > best.1 {
            best = (c, s);
        }
    }
    best
}

fn single_run(points: &[Vec<f64>], mut centroids: Vec<Vec<f64>>, max_iter: usize) -> Clustering {
    let dim = points[0].len();
    let mut assignments = vec![usize::MAX; points.len()];
    for _ in 0..max_iter {
        let mut changed = false;
        for (p, a) in points.iter().zip(assignments.iter_mut()) {
            let (c, _) = nearest(p, &centroids);
            if *a != c {
                *a = c;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        let mut sums = vec![vec![0.0; dim]; centroids.len()];
        let mut sizes = vec![0usize; centroids.len()];
        for (p, &a) in points.iter().zip(&assignments) {
            sizes[a] += 1;
            sums[a].iter_mut().zip(p).for_each(|(s, x)| *s += x);
        }
        for (c, mut sum) in sums.into_iter().enumerate() {
            if sizes[c] > 0 {
                normalize(&mut sum);
                centroids[c] = sum;
            }
        }
    }
    let objective = points
        .iter()
        .zip(&assignments)
        .map(|(p, &a)| dot(p, &centroids[a]))
        .sum();
    Clustering {
        assignments,
        objective,
    }
}

/// Spherical k-means on length-normalized copies of `points`.
///
/// Each restart seeds the centroids with `k` distinct points drawn from one
/// ChaCha8 stream keyed on `seed`; the restart with the highest objective
/// wins, earliest first on ties. Points join the most similar centroid,
/// lowest index on ties, and empty clusters keep their centroid.
pub fn spherical_kmeans(
    points: &[Vec<f64>],
    k: usize,
    seed: u64,
    restarts: usize,
    max_iter: usize,
) -> Result<Clustering> {
    if k < 1 || restarts < 1 {
        return Err(Error::invalid("k and restarts must be >= 1"));
    }
    if points.len() < k {
        return Err(Error::invalid(format!("{} points for {k} clusters", points.len())));
    }
    let unit: Vec<Vec<f64>> = points
        .iter()
        .map(|p| {
            let mut p = p.clone();
            normalize(&mut p);
            p
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<Clustering> = None;
    for _ in 0..restarts {
        let init = sample(&mut rng, unit.len(), k)
            .into_iter()
            .map(|i| unit[i].clone())
            .collect();
        let run = single_run(&unit, init, max_iter);
        if best.as_ref().is_none_or(|b| run.objective > b.objective) {
            best = Some(run);
        }
    }
    Ok(best.expect("restarts >= 1"))
}
