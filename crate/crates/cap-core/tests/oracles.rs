//! Optimized routines checked against slow, obviously-correct references.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use cap_core::clustering::{diagonal_log_density, fit_clusters};
use cap_core::decode::viterbi_align;
use cap_core::eval::{matched_total, solve_assignment};
use cap_core::{
    argmax_decode, hungarian_match, viterbi_decode, Corpus, DecodeConfig, FeatureSequence, KMeansConfig, Matrix,
    ScoreMatrix, TemporalPath,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Steps drawn from `0..k` with no two equal neighbours.
fn random_path(rng: &mut ChaCha8Rng, t: usize, k: usize) -> Vec<usize> {
    let mut steps: Vec<usize> = Vec::with_capacity(t);
    while steps.len() < t {
        let c = rng.random_range(0..k);
        if steps.last() != Some(&c) {
            steps.push(c);
        }
    }
    steps
}

fn score_of(scores: &Matrix<f64>, steps: &[usize], positions: &[usize], stay: f64, advance: f64) -> f64 {
    let mut total = 0.0;
    for n in 0..positions.len() {
        total += scores[(steps[positions[n]], n)];
        if n > 0 {
            total += if positions[n] == positions[n - 1] { stay } else { advance };
        }
    }
    total
}

/// Every alignment that starts at position 0, ends at `t - 1` and never
/// moves back or skips a position.
fn all_alignments(n: usize, t: usize) -> Vec<Vec<usize>> {
    fn extend(prefix: &mut Vec<usize>, n: usize, t: usize, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == n {
            if *prefix.last().unwrap() == t - 1 {
                out.push(prefix.clone());
            }
            return;
        }
        let last = *prefix.last().unwrap();
        for next in [last, last + 1] {
            if next < t {
                prefix.push(next);
                extend(prefix, n, t, out);
                prefix.pop();
            }
        }
    }
    let mut out = Vec::new();
    extend(&mut vec![0], n, t, &mut out);
    out
}

#[test]
fn viterbi_matches_exhaustive_search() {
    let mut rng = rng(1);
    for _ in 0..1000 {
        let n = rng.random_range(1..=10);
        let t = rng.random_range(1..=n.min(4));
        let k = rng.random_range(2..=4);
        let steps = random_path(&mut rng, t, k);
        let values: Vec<f64> = (0..k * n).map(|_| rng.random_range(-12.0..0.0)).collect();
        let values = Matrix::from_vec(k, n, values).unwrap();
        let cfg = DecodeConfig {
            stay_log_prob: rng.random_range(-3.0..0.0),
            advance_log_prob: rng.random_range(-3.0..0.0),
        };
        let scores = ScoreMatrix::new("s", values.clone(), false).unwrap();
        let path = TemporalPath::new(steps.clone()).unwrap();

        let best = all_alignments(n, t)
            .iter()
            .map(|a| score_of(&values, &steps, a, cfg.stay_log_prob, cfg.advance_log_prob))
            .fold(f64::NEG_INFINITY, f64::max);
        let found = viterbi_align(&scores, &path, &cfg).unwrap();
        let rescored = score_of(&values, &steps, &found.positions, cfg.stay_log_prob, cfg.advance_log_prob);
        assert!((found.log_score - best).abs() <= 1e-9, "{} vs {best}", found.log_score);
        assert!((rescored - best).abs() <= 1e-9, "{rescored} vs {best}");

        let labels = viterbi_decode(&scores, &path, &cfg).unwrap();
        let expected: Vec<usize> = found.positions.iter().map(|&p| steps[p]).collect();
        assert_eq!(labels.labels(), expected.as_slice());
    }
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

/// Largest total over injective maps from the smaller side to the larger.
fn brute_force_matching(m: &Matrix<u64>) -> u64 {
    let (k, l) = (m.rows(), m.cols());
    fn go(m: &Matrix<u64>, row: usize, used: &mut Vec<bool>, transpose: bool) -> u64 {
        let (rows, cols) = if transpose { (m.cols(), m.rows()) } else { (m.rows(), m.cols()) };
        if row == rows {
            return 0;
        }
        let mut best = 0;
        for c in 0..cols {
            if !used[c] {
                used[c] = true;
                let v = if transpose { m[(c, row)] } else { m[(row, c)] };
                best = best.max(v + go(m, row + 1, used, transpose));
                used[c] = false;
            }
        }
        best
    }
    if k <= l {
        go(m, 0, &mut vec![false; l], false)
    } else {
        go(m, 0, &mut vec![false; k], true)
    }
}

#[test]
fn hungarian_matches_brute_force_on_rectangular_counts() {
    let mut rng = rng(2);
    for _ in 0..200 {
        let small = rng.random_range(1..=6);
        let large = rng.random_range(small..=7);
        let (k, l) = if rng.random_bool(0.5) { (small, large) } else { (large, small) };
        let data = (0..k * l).map(|_| rng.random_range(0..50u64)).collect();
        let m = Matrix::from_vec(k, l, data).unwrap();
        let mapping = hungarian_match(&m);
        assert_eq!(mapping.mapped_count(), k.min(l));
        assert_eq!(matched_total(&m, &mapping), brute_force_matching(&m));
    }
}

#[test]
fn assignment_matches_permutations_on_square_costs() {
    let mut rng = rng(3);
    let perms = permutations(5);
    for _ in 0..200 {
        let data = (0..25).map(|_| rng.random_range(-100..100i64)).collect();
        let costs = Matrix::from_vec(5, 5, data).unwrap();
        let best = perms
            .iter()
            .map(|p| (0..5).map(|i| costs[(i, p[i])]).sum::<i64>())
            .min()
            .unwrap();
        let assignment = solve_assignment(&costs);
        let mut cols = assignment.clone();
        cols.sort_unstable();
        assert_eq!(cols, vec![0, 1, 2, 3, 4]);
        assert_eq!((0..5).map(|i| costs[(i, assignment[i])]).sum::<i64>(), best);
    }
}

fn scalar_log_density(x: &[f32], mean: &[f64], var: &[f64]) -> f64 {
    let mut total = 0.0;
    for i in 0..x.len() {
        let z = f64::from(x[i]) - mean[i];
        total += -0.5 * (2.0 * PI * var[i]).ln() - z * z / (2.0 * var[i]);
    }
    total
}

#[test]
fn log_density_at_the_mean_of_a_unit_gaussian() {
    for d in [1usize, 2, 8] {
        let x = vec![0.5f32; d];
        let mean = vec![0.5f64; d];
        let expected = -(d as f64 / 2.0) * (2.0 * PI).ln();
        assert!((diagonal_log_density(&x, &mean, &vec![1.0; d]) - expected).abs() <= 1e-10);
    }
}

#[test]
fn log_density_matches_per_component_formula() {
    let mut rng = rng(4);
    for _ in 0..500 {
        let d = rng.random_range(1..=16);
        let x: Vec<f32> = (0..d).map(|_| rng.random_range(-5.0..5.0)).collect();
        let mean: Vec<f64> = (0..d).map(|_| rng.random_range(-5.0..5.0)).collect();
        let var: Vec<f64> = (0..d).map(|_| rng.random_range(0.05..4.0)).collect();
        let fast = diagonal_log_density(&x, &mean, &var);
        let slow = scalar_log_density(&x, &mean, &var);
        assert!((fast - slow).abs() <= 1e-10 * slow.abs().max(1.0), "{fast} vs {slow}");
    }
}

#[test]
fn two_blobs_recover_their_sample_means() {
    let mut rng = rng(5);
    let centers = [[-4.0f64, 0.0], [4.0, 1.0]];
    let mut rows = Vec::new();
    let mut sums = [[0.0f64; 2]; 2];
    for (b, c) in centers.iter().enumerate() {
        for _ in 0..200 {
            let p = [
                (c[0] + rng.sample::<f64, _>(StandardNormal)) as f32,
                (c[1] + rng.sample::<f64, _>(StandardNormal)) as f32,
            ];
            sums[b][0] += f64::from(p[0]);
            sums[b][1] += f64::from(p[1]);
            rows.push(p);
        }
    }
    let sample_means = sums.map(|s| [s[0] / 200.0, s[1] / 200.0]);
    let corpus = Corpus::new(vec![FeatureSequence::from_rows("blobs", &rows).unwrap()]).unwrap();
    let model = fit_clusters(&corpus, &KMeansConfig::with_k(2)).unwrap();

    for target in sample_means {
        let nearest = (0..2)
            .map(|k| {
                let c = model.centroid(k);
                ((c[0] - target[0]).powi(2) + (c[1] - target[1]).powi(2)).sqrt()
            })
            .fold(f64::INFINITY, f64::min);
        assert!(nearest < 0.5, "no centroid near {target:?}");
    }
}

#[test]
fn argmax_decode_matches_column_scan() {
    let mut rng = rng(6);
    for _ in 0..200 {
        let k = rng.random_range(1..=6);
        let n = rng.random_range(1..=30);
        // coarse values so that ties actually happen
        let data: Vec<f64> = (0..k * n).map(|_| f64::from(rng.random_range(-3..=0i32))).collect();
        let values = Matrix::from_vec(k, n, data).unwrap();
        let scores = ScoreMatrix::new("s", values.clone(), false).unwrap();
        let expected: Vec<usize> = (0..n)
            .map(|col| {
                let mut best = 0;
                for row in 1..k {
                    if values[(row, col)] > values[(best, col)] {
                        best = row;
                    }
                }
                best
            })
            .collect();
        assert_eq!(argmax_decode(&scores).labels(), expected.as_slice());
    }
}

#[test]
fn fitted_means_equal_assignment_averages() {
    let mut rng = rng(7);
    let rows: Vec<[f32; 3]> = (0..90)
        .map(|i| {
            let shift = (i % 3) as f32 * 5.0;
            [shift + rng.random_range(-1.0..1.0), -shift, rng.random_range(-1.0..1.0)]
        })
        .collect();
    let corpus = Corpus::new(vec![FeatureSequence::from_rows("v", &rows).unwrap()]).unwrap();
    let model = fit_clusters(&corpus, &KMeansConfig::with_k(3)).unwrap();
    let labels = model.assignments("v").unwrap();
    let mut groups: BTreeMap<usize, Vec<[f32; 3]>> = BTreeMap::new();
    for (row, &l) in rows.iter().zip(labels) {
        groups.entry(l).or_default().push(*row);
    }
    for (k, members) in groups {
        for dim in 0..3 {
            let avg = members.iter().map(|r| f64::from(r[dim])).sum::<f64>() / members.len() as f64;
            assert!((model.mean(k)[dim] - avg).abs() < 1e-9);
        }
    }
}
