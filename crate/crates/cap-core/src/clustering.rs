//! k-means clustering of corpus frames and per-cluster diagonal Gaussian
//! scoring.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::math::{argmax, log, squared_distance, LN_2PI};
use crate::matrix::Matrix;
use crate::types::{ClusterModel, Corpus, FeatureSequence, ScoreMatrix};
use crate::{Error, Result};

/// Lower bound applied to every per-component cluster variance.
pub const VARIANCE_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct KMeansConfig {
    pub k: usize,
    pub max_iters: usize,
    pub restarts: usize,
    pub seed: u64,
    /// Lloyd iterations stop once no centroid moves further than this.
    pub convergence_tol: f64,
}

impl Default for KMeansConfig {
    fn default() -> Self {
        Self {
            k: 1,
            max_iters: 300,
            restarts: 10,
            seed: 0,
            convergence_tol: 1e-6,
        }
    }
}

impl KMeansConfig {
    pub fn with_k(k: usize) -> Self {
        Self {
            k,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::Config("k must be at least 1"));
        }
        if self.restarts == 0 {
            return Err(Error::Config("restarts must be at least 1"));
        }
        if self.convergence_tol.is_nan() || self.convergence_tol < 0.0 {
            return Err(Error::Config("convergence_tol must be non-negative"));
        }
        Ok(())
    }
}

/// Outcome of one seeded Lloyd run.
#[derive(Debug, Clone)]
pub struct KMeansRun {
    /// K×d centroids.
    pub centroids: Matrix<f64>,
    pub assignments: Vec<usize>,
    pub inertia: f64,
    /// Inertia after every assignment step, including the final one.
    pub inertia_history: Vec<f64>,
}

/// Runs Lloyd's algorithm with k-means++ seeding on `data`, a row-major
/// `n × dim` buffer. Requires `n >= cfg.k`.
pub fn lloyd<R: Rng + ?Sized>(data: &[f64], dim: usize, cfg: &KMeansConfig, rng: &mut R) -> KMeansRun {
    let n = data.len() / dim;
    let k = cfg.k;
    debug_assert!(n >= k);

    let mut centroids = kmeans_plus_plus(data, dim, k, rng);
    let mut assignments = vec![0usize; n];
    let mut history = Vec::new();

    for _ in 0..cfg.max_iters.max(1) {
        assign(data, dim, &centroids, &mut assignments);
        repair_empty(data, dim, &mut centroids, &mut assignments);
        history.push(inertia(data, dim, &centroids, &assignments));

        let updated = cluster_means(data, dim, k, &assignments);
        let shift = (0..k)
            .map(|c| squared_distance(centroids.row(c), updated.row(c)))
            .fold(0.0f64, f64::max);
        centroids = updated;
        if shift <= cfg.convergence_tol * cfg.convergence_tol {
            break;
        }
    }

    assign(data, dim, &centroids, &mut assignments);
    repair_empty(data, dim, &mut centroids, &mut assignments);
    let final_inertia = inertia(data, dim, &centroids, &assignments);
    history.push(final_inertia);
    debug_assert!(assignments.iter().all(|&a| a < k));

    KMeansRun {
        centroids,
        assignments,
        inertia: final_inertia,
        inertia_history: history,
    }
}

fn kmeans_plus_plus<R: Rng + ?Sized>(data: &[f64], dim: usize, k: usize, rng: &mut R) -> Matrix<f64> {
    let n = data.len() / dim;
    let point = |i: usize| &data[i * dim..(i + 1) * dim];
    let mut centroids = Matrix::filled(k, dim, 0.0);
    let first = rng.random_range(0..n);
    centroids.row_mut(0).copy_from_slice(point(first));
    let mut nearest: Vec<f64> = (0..n).map(|i| squared_distance(point(i), point(first))).collect();

    for c in 1..k {
        let next = match WeightedIndex::new(&nearest) {
            Ok(dist) => dist.sample(rng),
            // every point already coincides with a centroid
            Err(_) => rng.random_range(0..n),
        };
        centroids.row_mut(c).copy_from_slice(point(next));
        for (i, d) in nearest.iter_mut().enumerate() {
            *d = d.min(squared_distance(point(i), point(next)));
        }
    }
    centroids
}

fn assign(data: &[f64], dim: usize, centroids: &Matrix<f64>, assignments: &mut [usize]) {
    for (i, x) in data.chunks_exact(dim).enumerate() {
        assignments[i] = nearest_centroid(x, centroids);
    }
}

fn nearest_centroid(x: &[f64], centroids: &Matrix<f64>) -> usize {
    argmax((0..centroids.rows()).map(|c| -squared_distance(x, centroids.row(c)))).unwrap_or(0)
}

/// Gives every empty cluster the point farthest from its own centroid,
/// taken from a cluster that keeps at least one member. The centroid moves
/// onto that point, so inertia never increases.
fn repair_empty(data: &[f64], dim: usize, centroids: &mut Matrix<f64>, assignments: &mut [usize]) {
    let k = centroids.rows();
    let mut sizes = vec![0usize; k];
    for &a in assignments.iter() {
        sizes[a] += 1;
    }
    for empty in 0..k {
        if sizes[empty] != 0 {
            continue;
        }
        let donor = argmax(data.chunks_exact(dim).enumerate().map(|(i, x)| {
            if sizes[assignments[i]] > 1 {
                squared_distance(x, centroids.row(assignments[i]))
            } else {
                f64::NEG_INFINITY
            }
        }));
        let Some(i) = donor else { return };
        if sizes[assignments[i]] <= 1 {
            return;
        }
        sizes[assignments[i]] -= 1;
        sizes[empty] = 1;
        assignments[i] = empty;
        centroids.row_mut(empty).copy_from_slice(&data[i * dim..(i + 1) * dim]);
    }
}

fn inertia(data: &[f64], dim: usize, centroids: &Matrix<f64>, assignments: &[usize]) -> f64 {
    data.chunks_exact(dim)
        .zip(assignments)
        .map(|(x, &a)| squared_distance(x, centroids.row(a)))
        .sum()
}

fn cluster_means(data: &[f64], dim: usize, k: usize, assignments: &[usize]) -> Matrix<f64> {
    let mut sums = Matrix::filled(k, dim, 0.0);
    let mut counts = vec![0usize; k];
    for (x, &a) in data.chunks_exact(dim).zip(assignments) {
        counts[a] += 1;
        for (s, v) in sums.row_mut(a).iter_mut().zip(x) {
            *s += v;
        }
    }
    for (c, &count) in counts.iter().enumerate() {
        if count > 0 {
            for s in sums.row_mut(c) {
                *s /= count as f64;
            }
        }
    }
    sums
}

fn cluster_variances(data: &[f64], dim: usize, means: &Matrix<f64>, assignments: &[usize]) -> Matrix<f64> {
    let k = means.rows();
    let mut sums = Matrix::filled(k, dim, 0.0);
    let mut counts = vec![0usize; k];
    for (x, &a) in data.chunks_exact(dim).zip(assignments) {
        counts[a] += 1;
        let mu = means.row(a);
        for ((s, v), m) in sums.row_mut(a).iter_mut().zip(x).zip(mu) {
            *s += (v - m) * (v - m);
        }
    }
    for (c, &count) in counts.iter().enumerate() {
        for s in sums.row_mut(c) {
            let var = if count > 0 { *s / count as f64 } else { 0.0 };
            *s = var.max(VARIANCE_FLOOR);
        }
    }
    sums
}

/// Fits `cfg.k` clusters over every frame of `corpus` and estimates a
/// diagonal Gaussian per cluster from its hard-assigned frames. The restart
/// with the lowest inertia wins; earlier restarts win ties.
pub fn fit_clusters(corpus: &Corpus, cfg: &KMeansConfig) -> Result<ClusterModel> {
    cfg.validate()?;
    let dim = corpus.dim();
    let frames = corpus.total_frames();
    if frames < cfg.k {
        return Err(Error::Underdetermined { frames, k: cfg.k });
    }
    let data: Vec<f64> = corpus
        .iter()
        .flat_map(|s| s.as_slice().iter().map(|&v| f64::from(v)))
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut best: Option<KMeansRun> = None;
    for _ in 0..cfg.restarts {
        let run = lloyd(&data, dim, cfg, &mut rng);
        if best.as_ref().is_none_or(|b| run.inertia < b.inertia) {
            best = Some(run);
        }
    }
    let best = best.expect("restarts >= 1");

    let means = cluster_means(&data, dim, cfg.k, &best.assignments);
    let variances = cluster_variances(&data, dim, &means, &best.assignments);

    let mut assignments = BTreeMap::new();
    let mut offset = 0;
    for seq in corpus {
        let n = seq.len();
        assignments.insert(seq.id().into(), best.assignments[offset..offset + n].to_vec());
        offset += n;
    }
    ClusterModel::new(best.centroids, means, variances, assignments)
}

/// Log-density of `x` under a Gaussian with diagonal covariance.
pub fn diagonal_log_density(x: &[f32], mean: &[f64], variance: &[f64]) -> f64 {
    let mut acc = 0.0;
    for ((&xi, &mu), &var) in x.iter().zip(mean).zip(variance) {
        let diff = f64::from(xi) - mu;
        acc += LN_2PI + log(var) + diff * diff / var;
    }
    -0.5 * acc
}

/// K×N matrix of per-frame Gaussian log-densities.
pub fn score_sequence(model: &ClusterModel, seq: &FeatureSequence) -> Result<ScoreMatrix> {
    if seq.dim() != model.dim() {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            found: seq.dim(),
        });
    }
    let n = seq.len();
    let mut values = Matrix::filled(model.k(), n, 0.0);
    for k in 0..model.k() {
        let (mean, var) = (model.mean(k), model.variance(k));
        let row = values.row_mut(k);
        for (slot, x) in row.iter_mut().zip(seq.frames()) {
            *slot = diagonal_log_density(x, mean, var);
        }
    }
    ScoreMatrix::new(seq.id(), values, false)
}
