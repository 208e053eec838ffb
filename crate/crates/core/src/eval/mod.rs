//! Benchmark loaders and scoring: similarity, categorization, analogy.

mod bench;
mod cluster;

use std::collections::BTreeSet;
use std::io::Write;
use std::path::Path;

pub use bench::{
    detect_kind, load_benchmark, AnalogyBenchmark, Benchmark, BenchmarkKind,
    CategorizationBenchmark, SimilarityBenchmark,
};
pub use cluster::{purity, spherical_kmeans, Clustering, KMEANS_MAX_ITER, KMEANS_RESTARTS};

use crate::error::{Error, Result};
use crate::sgns::EmbeddingModel;
use crate::util::{cosine, pearson, write_atomic};

#[derive(Clone, Debug, PartialEq)]
pub struct EvalResult {
    pub score: f64,
    /// Distinct benchmark words missing from the model.
    pub oov_count: usize,
    pub n_used: usize,
    pub skipped: usize,
}

/// Ranks starting at 1; tied values share their average rank.
pub fn average_ranks(x: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut ranks = vec![0.0; x.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && x[order[j + 1]] == x[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = rank;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman's rank correlation with average ranks for ties.
pub fn spearman_rho(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::invalid("spearman inputs differ in length"));
    }
    if x.len() < 2 {
        return Err(Error::Degenerate("fewer than 2 observations".into()));
    }
    if x.iter().chain(y).any(|v| v.is_nan()) {
        return Err(Error::invalid("NaN in spearman input"));
    }
    pearson(&average_ranks(x), &average_ranks(y))
        .ok_or_else(|| Error::Degenerate("zero rank variance".into()))
}

fn oov_count<'a>(model: &EmbeddingModel, words: impl IntoIterator<Item = &'a str>) -> usize {
    words
        .into_iter()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .filter(|w| !model.vocab().contains(w))
        .count()
}

/// Spearman ρ between human scores and cosine similarities.
pub fn evaluate_similarity(model: &EmbeddingModel, bench: &SimilarityBenchmark) -> Result<EvalResult> {
    let oov = oov_count(model, bench.pairs.iter().flat_map(|(a, b, _)| [a.as_str(), b.as_str()]));
    let (mut human, mut predicted) = (Vec::new(), Vec::new());
    for (a, b, score) in &bench.pairs {
        if let (Some(va), Some(vb)) = (model.vector(a), model.vector(b)) {
            human.push(*score);
            predicted.push(cosine(va, vb));
        }
    }
    if human.len() < 2 {
        return Err(Error::InsufficientCoverage {
            usable: human.len(),
            required: 2,
            oov_count: oov,
        });
    }
    Ok(EvalResult {
        score: spearman_rho(&human, &predicted)?,
        oov_count: oov,
        n_used: human.len(),
        skipped: bench.pairs.len() - human.len(),
    })
}

/// Purity of a spherical k-means clustering of the in-vocabulary words
/// with one cluster per category.
pub fn evaluate_categorization(
    model: &EmbeddingModel,
    bench: &CategorizationBenchmark,
    seed: u64,
) -> Result<EvalResult> {
    let oov = oov_count(model, bench.items.iter().map(|(w, _)| w.as_str()));
    let mut points = Vec::new();
    let mut truth = Vec::new();
    for (w, cat) in &bench.items {
        if let Some(v) = model.vector(w) {
            points.push(v.iter().map(|&x| x as f64).collect::<Vec<f64>>());
            truth.push(*cat);
        }
    }
    let k = bench.n_categories();
    if points.len() < k.max(1) {
        return Err(Error::InsufficientCoverage {
            usable: points.len(),
            required: k.max(1),
            oov_count: oov,
        });
    }
    let clustering = spherical_kmeans(&points, k, seed, KMEANS_RESTARTS, KMEANS_MAX_ITER)?;
    Ok(EvalResult {
        score: purity(&clustering.assignments, &truth)?,
        oov_count: oov,
        n_used: points.len(),
        skipped: bench.items.len() - points.len(),
    })
}

/// 3CosAdd accuracy: the prediction is the word, other than A, B and C,
/// with the highest cosine to B − A + C. Quads with any word out of
/// vocabulary are skipped.
pub fn evaluate_analogy(model: &EmbeddingModel, bench: &AnalogyBenchmark) -> Result<EvalResult> {
    let oov = oov_count(model, bench.quads.iter().flatten().map(String::as_str));
    let dim = model.dim();
    let unit: Vec<f64> = (0..model.len())
        .flat_map(|i| {
            let v = model.word_vector(i);
            let n = v.iter().map(|&x| (x as f64).powi(2)).sum::<f64>().sqrt();
            v.iter()
                .map(move |&x| if n > 0.0 { x as f64 / n } else { 0.0 })
        })
        .collect();

    let mut used = 0;
    let mut correct = 0;
    let mut target = vec![0.0f64; dim];
    for quad in &bench.quads {
        let ids: Vec<usize> = quad.iter().filter_map(|w| model.vocab().index(w)).collect();
        let [a, b, c, d] = ids[..] else { continue };
        used += 1;
        for (j, t) in target.iter_mut().enumerate() {
            *t = model.word_vector(b)[j] as f64 - model.word_vector(a)[j] as f64
                + model.word_vector(c)[j] as f64;
        }
        let mut best = (usize::MAX, f64::NEG_INFINITY);
        for (i, row) in unit.chunks_exact(dim.max(1)).enumerate() {
            if i == a || i == b || i == c {
                continue;
            }
            let s: f64 = row.iter().zip(&target).map(|(x, y)| x * y).sum();
            if s > best.1 {
                best = (i, s);
            }
        }
        if best.0 == d {
            correct += 1;
        }
    }
    if used == 0 {
        return Err(Error::InsufficientCoverage {
            usable: 0,
            required: 1,
            oov_count: oov,
        });
    }
    Ok(EvalResult {
        score: correct as f64 / used as f64,
        oov_count: oov,
        n_used: used,
        skipped: bench.quads.len() - used,
    })
}

/// Scores any benchmark; `seed` drives categorization clustering.
pub fn evaluate(model: &EmbeddingModel, bench: &Benchmark, seed: u64) -> Result<EvalResult> {
    match bench {
        Benchmark::Similarity(b) => evaluate_similarity(model, b),
        Benchmark::Categorization(b) => evaluate_categorization(model, b, seed),
        Benchmark::Analogy(b) => evaluate_analogy(model, b),
    }
}

/// `benchmark,score,oov,n_used` rows.
pub fn results_csv<'a>(rows: impl IntoIterator<Item = (&'a str, &'a EvalResult)>) -> String {
    let mut s = String::from("benchmark,score,oov,n_used\n");
    for (name, r) in rows {
        s.push_str(&format!("{},{},{},{}\n", name, r.score, r.oov_count, r.n_used));
    }
    s
}

pub fn write_results<'a>(
    path: &Path,
    rows: impl IntoIterator<Item = (&'a str, &'a EvalResult)>,
) -> Result<()> {
    let csv = results_csv(rows);
    write_atomic(path, |w| w.write_all(csv.as_bytes()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Vocabulary;
    use crate::sgns::Matrix;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn model(words: &[String], rows: &[Vec<f32>]) -> EmbeddingModel {
        let vocab = Vocabulary::from_ordered(words.iter().map(|w| (w.clone(), 1)));
        EmbeddingModel::new(vocab, Matrix::from_rows(rows), None).unwrap()
    }

    fn names(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("w{i}")).collect()
    }

    fn random_rows(n: usize, d: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f32>> {
        (0..n)
            .map(|_| (0..d).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect()
    }

    // O(n²) average ranks: count of smaller values plus half the ties.
    fn rank_oracle(x: &[f64]) -> Vec<f64> {
        x.iter()
            .map(|&v| {
                let less = x.iter().filter(|&&u| u < v).count() as f64;
                let equal = x.iter().filter(|&&u| u == v).count() as f64;
                less + (equal + 1.0) / 2.0
            })
            .collect()
    }

    fn pearson_oracle(x: &[f64], y: &[f64]) -> f64 {
        let n = x.len() as f64;
        let sx: f64 = x.iter().sum();
        let sy: f64 = y.iter().sum();
        let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
        let sxx: f64 = x.iter().map(|a| a * a).sum();
        let syy: f64 = y.iter().map(|b| b * b).sum();
        (n * sxy - sx * sy) / ((n * sxx - sx * sx).sqrt() * (n * syy - sy * sy).sqrt())
    }

    fn cos_oracle(a: &[f32], b: &[f32]) -> f64 {
        let a: Vec<f64> = a.iter().map(|&x| x as f64).collect();
        let b: Vec<f64> = b.iter().map(|&x| x as f64).collect();
        cos64_oracle(&a, &b)
    }

    fn cos64_oracle(a: &[f64], b: &[f64]) -> f64 {
        let ab: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
        let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
        let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
        if na == 0.0 || nb == 0.0 {
            0.0
        } else {
            ab / na / nb
        }
    }

    #[test]
    fn spearman_examples() {
        let up = spearman_rho(&[1.0, 2.0, 3.0], &[10.0, 20.0, 30.0]).unwrap();
        let down = spearman_rho(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap();
        assert!((up - 1.0).abs() < 1e-12);
        assert!((down + 1.0).abs() < 1e-12);
        let (x, y) = ([1.0, 2.0, 2.0, 4.0], [1.0, 3.0, 2.0, 4.0]);
        let expected = pearson_oracle(&rank_oracle(&x), &rank_oracle(&y));
        assert!((spearman_rho(&x, &y).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn spearman_errors() {
        assert!(matches!(spearman_rho(&[1.0], &[1.0]), Err(Error::Degenerate(_))));
        assert!(matches!(
            spearman_rho(&[1.0, 1.0], &[1.0, 2.0]),
            Err(Error::Degenerate(_))
        ));
        assert!(spearman_rho(&[1.0, 2.0], &[1.0]).is_err());
    }

    #[test]
    fn spearman_matches_oracle_on_random_fixtures() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let n = rng.random_range(3..40);
            // small integer ranges force ties
            let x: Vec<f64> = (0..n).map(|_| rng.random_range(0..6) as f64).collect();
            let y: Vec<f64> = (0..n).map(|_| rng.random_range(0..6) as f64).collect();
            let ours = spearman_rho(&x, &y);
            let (rx, ry) = (rank_oracle(&x), rank_oracle(&y));
            if rx.iter().all(|&r| r == rx[0]) || ry.iter().all(|&r| r == ry[0]) {
                assert!(ours.is_err());
                continue;
            }
            assert!((ours.unwrap() - pearson_oracle(&rx, &ry)).abs() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn spearman_invariant_under_monotone_transform(
            xy in prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 3..50)
        ) {
            let (x, y): (Vec<f64>, Vec<f64>) = xy.into_iter().unzip();
            let ex: Vec<f64> = x.iter().map(|v| v.exp()).collect();
            match (spearman_rho(&x, &y), spearman_rho(&ex, &y)) {
                (Ok(a), Ok(b)) => prop_assert!((a - b).abs() < 1e-12),
                (Err(_), Err(_)) => {}
                _ => prop_assert!(false, "error mismatch"),
            }
        }
    }

    #[test]
    fn similarity_perfect_and_oov() {
        let words = names(4);
        // cosines with w0: 1, 0.8, 0, -1
        let m = model(
            &words,
            &[vec![1.0, 0.0], vec![0.8, 0.6], vec![0.0, 1.0], vec![-1.0, 0.0]],
        );
        let bench = SimilarityBenchmark {
            name: "t".into(),
            pairs: vec![
                ("w0".into(), "w1".into(), 9.0),
                ("w0".into(), "w2".into(), 5.0),
                ("w0".into(), "w3".into(), 1.0),
                ("w0".into(), "nope".into(), 3.0),
            ],
        };
        let r = evaluate_similarity(&m, &bench).unwrap();
        assert!((r.score - 1.0).abs() < 1e-12);
        assert_eq!((r.oov_count, r.n_used, r.skipped), (1, 3, 1));

        let all_oov = SimilarityBenchmark {
            name: "o".into(),
            pairs: vec![("x".into(), "y".into(), 1.0), ("x".into(), "z".into(), 2.0)],
        };
        match evaluate_similarity(&m, &all_oov) {
            Err(Error::InsufficientCoverage { oov_count, usable, .. }) => {
                assert_eq!((oov_count, usable), (3, 0))
            }
            other => panic!("{other:?}"),
        }
    }

    fn unordered_pair(mut p: usize) -> (usize, usize) {
        let mut a = 0;
        while p >= 11 - a {
            p -= 11 - a;
            a += 1;
        }
        (a, a + 1 + p)
    }

    #[test]
    fn similarity_matches_composed_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let words = names(12);
            let rows = random_rows(12, 5, &mut rng);
            let m = model(&words, &rows);
            // distinct unordered pairs keep the cosines free of exact ties
            let pairs: Vec<(String, String, f64)> = rand::seq::index::sample(&mut rng, 66, 20)
                .into_iter()
                .map(|p| {
                    let (a, b) = unordered_pair(p);
                    (words[a].clone(), words[b].clone(), rng.random_range(0..10) as f64)
                })
                .collect();
            let bench = SimilarityBenchmark { name: "r".into(), pairs };
            let cos: Vec<f64> = bench
                .pairs
                .iter()
                .map(|(a, b, _)| {
                    cos_oracle(&rows[a[1..].parse::<usize>().unwrap()], &rows[b[1..].parse::<usize>().unwrap()])
                })
                .collect();
            let human: Vec<f64> = bench.pairs.iter().map(|p| p.2).collect();
            let expected = pearson_oracle(&rank_oracle(&human), &rank_oracle(&cos));
            let r = evaluate_similarity(&m, &bench).unwrap();
            assert!((r.score - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_vector_cosine_is_zero() {
        let words = names(3);
        let m = model(&words, &[vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]]);
        let bench = SimilarityBenchmark {
            name: "z".into(),
            pairs: vec![
                ("w0".into(), "w1".into(), 1.0),
                ("w1".into(), "w2".into(), 2.0),
                ("w1".into(), "w1".into(), 3.0),
            ],
        };
        // cosines 0, 0, 1 against 1, 2, 3
        let r = evaluate_similarity(&m, &bench).unwrap();
        let expected = pearson_oracle(&[1.0, 2.0, 3.0], &[1.5, 1.5, 3.0]);
        assert!((r.score - expected).abs() < 1e-12);
    }

    #[test]
    fn analogy_parallelogram() {
        let words: Vec<String> = ["a", "b", "c", "d", "e"].map(String::from).to_vec();
        let m = model(
            &words,
            &[
                vec![1.0, 0.0, 0.0],
                vec![1.0, 1.0, 0.0],
                vec![0.0, 0.0, 1.0],
                vec![0.0, 1.0, 1.0],
                vec![-1.0, 0.0, 0.0],
            ],
        );
        let q = |s: [&str; 4]| s.map(String::from);
        let bench = AnalogyBenchmark {
            name: "p".into(),
            quads: vec![q(["a", "b", "c", "d"]), q(["a", "b", "c", "zz"])],
        };
        let r = evaluate_analogy(&m, &bench).unwrap();
        assert_eq!(r.score, 1.0);
        assert_eq!((r.n_used, r.skipped, r.oov_count), (1, 1, 1));

        let none = AnalogyBenchmark {
            name: "n".into(),
            quads: vec![q(["x", "b", "c", "d"])],
        };
        assert!(evaluate_analogy(&m, &none).is_err());
    }

    fn scan_oracle(rows: &[Vec<f32>], quads: &[[usize; 4]]) -> f64 {
        let mut correct = 0;
        for &[a, b, c, d] in quads {
            let f = |i: usize, j: usize| rows[i][j] as f64;
            let t: Vec<f64> = (0..rows[0].len())
                .map(|j| f(b, j) - f(a, j) + f(c, j))
                .collect();
            let mut best = None::<(usize, f64)>;
            for (i, r) in rows.iter().enumerate() {
                if [a, b, c].contains(&i) {
                    continue;
                }
                let r: Vec<f64> = r.iter().map(|&x| x as f64).collect();
                let s = cos64_oracle(&t, &r);
                if best.is_none_or(|(_, bs)| s > bs) {
                    best = Some((i, s));
                }
            }
            correct += usize::from(best.unwrap().0 == d);
        }
        correct as f64 / quads.len() as f64
    }

    fn random_quads(n_words: usize, n: usize, rng: &mut ChaCha8Rng) -> Vec<[usize; 4]> {
        (0..n)
            .map(|_| {
                let v = rand::seq::index::sample(rng, n_words, 4).into_vec();
                [v[0], v[1], v[2], v[3]]
            })
            .collect()
    }

    fn to_bench(words: &[String], quads: &[[usize; 4]]) -> AnalogyBenchmark {
        AnalogyBenchmark {
            name: "q".into(),
            quads: quads.iter().map(|q| q.map(|i| words[i].clone())).collect(),
        }
    }

    #[test]
    fn analogy_matches_scan_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            let words = names(30);
            // low dimension makes some answers correct by chance
            let rows = random_rows(30, 2, &mut rng);
            let quads = random_quads(30, 50, &mut rng);
            let r = evaluate_analogy(&model(&words, &rows), &to_bench(&words, &quads)).unwrap();
            assert_eq!(r.score, scan_oracle(&rows, &quads));
            assert_eq!(r.n_used, 50);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn analogy_invariant_to_rotation_and_scaling(seed in any::<u64>(), scale in 0.1f32..10.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let words = names(20);
            let rows = random_rows(20, 3, &mut rng);
            let quads = random_quads(20, 30, &mut rng);
            let bench = to_bench(&words, &quads);
            // rotation by an angle about the z axis composed with a reflection
            let th: f32 = rng.random_range(0.0..std::f32::consts::TAU);
            let rotated: Vec<Vec<f32>> = rows
                .iter()
                .map(|r| vec![
                    scale * (th.cos() * r[0] - th.sin() * r[1]),
                    scale * (th.sin() * r[0] + th.cos() * r[1]),
                    -scale * r[2],
                ])
                .collect();
            let base = evaluate_analogy(&model(&words, &rows), &bench).unwrap().score;
            let moved = evaluate_analogy(&model(&words, &rotated), &bench).unwrap().score;
            // f32 rounding can flip near-ties; allow one quad
            prop_assert!((base - moved).abs() <= 1.0 / 30.0 + 1e-12);
        }

        #[test]
        fn oov_accounting_adds_up(
            pairs in prop::collection::vec((0usize..15, 0usize..15, 0.0f64..10.0), 1..40),
            present in 2usize..15,
        ) {
            let all = names(15);
            let mut rng = ChaCha8Rng::seed_from_u64(present as u64);
            let m = model(&all[..present], &random_rows(present, 3, &mut rng));
            let bench = SimilarityBenchmark {
                name: "s".into(),
                pairs: pairs.iter().map(|&(a, b, s)| (all[a].clone(), all[b].clone(), s)).collect(),
            };
            let unique: BTreeSet<usize> = pairs.iter().flat_map(|&(a, b, _)| [a, b]).collect();
            let expected_oov = unique.iter().filter(|&&w| w >= present).count();
            match evaluate_similarity(&m, &bench) {
                Ok(r) => {
                    prop_assert_eq!(r.n_used + r.skipped, pairs.len());
                    prop_assert_eq!(r.oov_count, expected_oov);
                }
                Err(Error::InsufficientCoverage { oov_count, .. }) => {
                    prop_assert_eq!(oov_count, expected_oov)
                }
                Err(Error::Degenerate(_)) => {}
                Err(e) => prop_assert!(false, "{e}"),
            }
        }
    }

    // Independent re-run of the restart loop: same seed stream, plain
    // nested loops, best objective kept.
    fn kmeans_oracle(points: &[Vec<f64>], k: usize, seed: u64) -> Vec<usize> {
        let unit: Vec<Vec<f64>> = points
            .iter()
            .map(|p| {
                let n = p.iter().map(|x| x * x).sum::<f64>().sqrt();
                p.iter().map(|x| x / n).collect()
            })
            .collect();
        let dotp = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut best: Option<(f64, Vec<usize>)> = None;
        for _ in 0..KMEANS_RESTARTS {
            let mut cents: Vec<Vec<f64>> = rand::seq::index::sample(&mut rng, unit.len(), k)
                .into_iter()
                .map(|i| unit[i].clone())
                .collect();
            let mut assign = vec![usize::MAX; unit.len()];
            for _ in 0..KMEANS_MAX_ITER {
                let new: Vec<usize> = unit
                    .iter()
                    .map(|p| {
                        let mut bi = 0;
                        for c in 1..k {
                            if dotp(p, &cents[c]) > dotp(p, &cents[bi]) {
                                bi = c;
                            }
                        }
                        bi
                    })
                    .collect();
                if new == assign {
                    break;
                }
                assign = new;
                for (c, cent) in cents.iter_mut().enumerate() {
                    let members: Vec<&Vec<f64>> =
                        unit.iter().zip(&assign).filter(|(_, &a)| a == c).map(|(p, _)| p).collect();
                    if members.is_empty() {
                        continue;
                    }
                    let mut s = vec![0.0; unit[0].len()];
                    for m in members {
                        s.iter_mut().zip(m).for_each(|(a, b)| *a += b);
                    }
                    let n = s.iter().map(|x| x * x).sum::<f64>().sqrt();
                    *cent = s.iter().map(|x| x / n).collect();
                }
            }
            let obj: f64 = unit.iter().zip(&assign).map(|(p, &a)| dotp(p, &cents[a])).sum();
            if best.as_ref().is_none_or(|(b, _)| obj > *b) {
                best = Some((obj, assign));
            }
        }
        best.unwrap().1
    }

    #[test]
    fn categorization_blobs_with_label_noise_match_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let centers = [[1.0f32, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        let mut rows = Vec::new();
        let mut items = Vec::new();
        for i in 0..60 {
            let c = i % 3;
            rows.push(centers[c].iter().map(|x| x + rng.random_range(-0.3..0.3)).collect::<Vec<f32>>());
            let label = if rng.random_bool(0.05) { (c + 1) % 3 } else { c };
            items.push((format!("w{i}"), label));
        }
        let words = names(60);
        let m = model(&words, &rows);
        let mut items_with_oov = items.clone();
        items_with_oov.push(("missing".into(), 0));
        let bench = CategorizationBenchmark {
            name: "c".into(),
            items: items_with_oov,
            categories: vec!["x".into(), "y".into(), "z".into()],
        };
        let r = evaluate_categorization(&m, &bench, 42).unwrap();
        let points: Vec<Vec<f64>> = rows.iter().map(|r| r.iter().map(|&x| x as f64).collect()).collect();
        let truth: Vec<usize> = items.iter().map(|i| i.1).collect();
        let expected = purity(&kmeans_oracle(&points, 3, 42), &truth).unwrap();
        assert_eq!(r.score, expected);
        assert_eq!((r.n_used, r.skipped, r.oov_count), (60, 1, 1));
        assert!(r.score > 0.85);
    }

    #[test]
    fn categorization_needs_k_words() {
        let words = names(2);
        let m = model(&words, &[vec![1.0], vec![2.0]]);
        let bench = CategorizationBenchmark {
            name: "c".into(),
            items: vec![("w0".into(), 0), ("w1".into(), 1), ("zz".into(), 2)],
            categories: vec!["a".into(), "b".into(), "c".into()],
        };
        assert!(matches!(
            evaluate_categorization(&m, &bench, 1),
            Err(Error::InsufficientCoverage { usable: 2, required: 3, oov_count: 1 })
        ));
    }

    #[test]
    fn csv_layout() {
        let r = EvalResult { score: 0.5, oov_count: 2, n_used: 10, skipped: 2 };
        assert_eq!(results_csv([("ws", &r)]), "benchmark,score,oov,n_used\nws,0.5,2,10\n");
    }
}
