//! Cluster-to-label matching and segmentation metrics.
//!
//! Clusters are matched to ground-truth labels once for the whole evaluation
//! set with the Hungarian algorithm on the frame-count confusion matrix.
//! MoF is the fraction of frames whose mapped prediction equals the ground
//! truth, pooled over sequences.
//!
//! Segment F1: a predicted segment is a true positive when strictly more than
//! half of its frames carry the label its cluster maps to, and an unused
//! ground-truth segment of that label overlaps it. Each ground-truth segment
//! is matched at most once (largest overlap first), so precision and recall
//! stay in `[0, 1]`. F1 is computed per sequence and averaged.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::matrix::Matrix;
use crate::types::{segments_of, GroundTruth, LabelMapping, Segmentation};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct VideoMetrics {
    pub sequence_id: String,
    pub frames: usize,
    pub correct: usize,
    pub mof: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MetricsReport {
    pub mof: f64,
    pub f1: f64,
    pub total_frames: usize,
    pub correct_frames: usize,
    pub per_video: Vec<VideoMetrics>,
    /// K×L frame counts: row = predicted cluster, column = ground-truth label.
    pub confusion: Matrix<u64>,
    pub mapping: LabelMapping,
}

/// Minimum-cost perfect matching on a square cost matrix (`O(n^3)` potential
/// method). Returns the column assigned to every row.
pub fn solve_assignment(costs: &Matrix<i64>) -> Vec<usize> {
    let n = costs.rows();
    debug_assert_eq!(n, costs.cols());
    if n == 0 {
        return Vec::new();
    }
    let inf = i64::MAX / 4;
    let mut u = vec![0i64; n + 1];
    let mut v = vec![0i64; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];

    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = costs[(i0 - 1, j - 1)] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut assignment = vec![0usize; n];
    for j in 1..=n {
        if p[j] > 0 {
            assignment[p[j] - 1] = j - 1;
        }
    }
    assignment
}

/// One-to-one cluster → label mapping maximizing the matched frame count.
/// With K > L the surplus clusters stay unmapped.
pub fn hungarian_match(confusion: &Matrix<u64>) -> LabelMapping {
    let (k, l) = (confusion.rows(), confusion.cols());
    let n = k.max(l);
    let mut costs = Matrix::filled(n, n, 0i64);
    for i in 0..k {
        for j in 0..l {
            costs[(i, j)] = -i64::try_from(confusion[(i, j)]).expect("count fits in i64");
        }
    }
    let assignment = solve_assignment(&costs);
    let targets = (0..k)
        .map(|i| Some(assignment[i]).filter(|&j| j < l))
        .collect();
    LabelMapping::new(targets).expect("assignment is a permutation")
}

/// Sum of confusion counts over the mapped pairs.
pub fn matched_total(confusion: &Matrix<u64>, mapping: &LabelMapping) -> u64 {
    (0..confusion.rows())
        .filter_map(|i| mapping.get(i).map(|j| confusion[(i, j)]))
        .sum()
}

fn paired<'a>(
    segmentations: &'a [Segmentation],
    gt: &'a GroundTruth,
) -> impl Iterator<Item = Result<(&'a Segmentation, &'a [usize])>> + 'a {
    segmentations.iter().map(move |seg| {
        let truth = gt
            .get(seg.sequence_id())
            .ok_or_else(|| Error::UnknownSequence(seg.sequence_id().into()))?;
        if truth.len() != seg.len() {
            return Err(Error::LengthMismatch {
                id: seg.sequence_id().into(),
                expected: truth.len(),
                found: seg.len(),
            });
        }
        Ok((seg, truth))
    })
}

/// K×L frame-count confusion matrix pooled over all sequences.
pub fn confusion_matrix(segmentations: &[Segmentation], gt: &GroundTruth, k: usize) -> Result<Matrix<u64>> {
    let mut confusion = Matrix::filled(k, gt.n_labels(), 0u64);
    for pair in paired(segmentations, gt) {
        let (seg, truth) = pair?;
        for (&p, &t) in seg.labels().iter().zip(truth) {
            if p >= k {
                return Err(Error::ClusterOutOfRange { id: p, k });
            }
            confusion[(p, t)] += 1;
        }
    }
    Ok(confusion)
}

fn correct_frames(labels: &[usize], truth: &[usize], mapping: &LabelMapping) -> usize {
    labels
        .iter()
        .zip(truth)
        .filter(|(&p, &t)| mapping.get(p) == Some(t))
        .count()
}

/// Fraction of all frames whose mapped predicted label equals the ground
/// truth. Unmapped clusters never count as correct.
pub fn mof(segmentations: &[Segmentation], gt: &GroundTruth, mapping: &LabelMapping) -> Result<f64> {
    let (mut total, mut correct) = (0usize, 0usize);
    for pair in paired(segmentations, gt) {
        let (seg, truth) = pair?;
        total += seg.len();
        correct += correct_frames(seg.labels(), truth, mapping);
    }
    Ok(if total == 0 { 0.0 } else { correct as f64 / total as f64 })
}

/// Segment F1 of one sequence.
pub fn sequence_f1(labels: &[usize], truth: &[usize], mapping: &LabelMapping) -> f64 {
    let predicted = segments_of(labels);
    let actual = segments_of(truth);
    if predicted.is_empty() || actual.is_empty() {
        return 0.0;
    }
    let mut used = vec![false; actual.len()];
    let mut tp = 0usize;
    for seg in &predicted {
        let Some(target) = mapping.get(seg.label) else {
            continue;
        };
        let hits = truth[seg.start..seg.end].iter().filter(|&&t| t == target).count();
        if 2 * hits <= seg.len() {
            continue;
        }
        let best = actual
            .iter()
            .enumerate()
            .filter(|(g, a)| !used[*g] && a.label == target)
            .map(|(g, a)| (g, a.end.min(seg.end).saturating_sub(a.start.max(seg.start))))
            .filter(|&(_, overlap)| overlap > 0)
            .fold(None, |acc: Option<(usize, usize)>, cur| match acc {
                Some(a) if a.1 >= cur.1 => Some(a),
                _ => Some(cur),
            });
        if let Some((g, _)) = best {
            used[g] = true;
            tp += 1;
        }
    }
    if tp == 0 {
        return 0.0;
    }
    let precision = tp as f64 / predicted.len() as f64;
    let recall = tp as f64 / actual.len() as f64;
    2.0 * precision * recall / (precision + recall)
}

/// Segment F1 averaged over sequences.
pub fn f1(segmentations: &[Segmentation], gt: &GroundTruth, mapping: &LabelMapping) -> Result<f64> {
    let mut sum = 0.0;
    let mut count = 0usize;
    for pair in paired(segmentations, gt) {
        let (seg, truth) = pair?;
        sum += sequence_f1(seg.labels(), truth, mapping);
        count += 1;
    }
    Ok(if count == 0 { 0.0 } else { sum / count as f64 })
}

/// Global Hungarian matching followed by MoF and F1.
pub fn evaluate(segmentations: &[Segmentation], gt: &GroundTruth, k: usize) -> Result<MetricsReport> {
    let confusion = confusion_matrix(segmentations, gt, k)?;
    let mapping = hungarian_match(&confusion);
    let mut per_video = Vec::with_capacity(segmentations.len());
    for pair in paired(segmentations, gt) {
        let (seg, truth) = pair?;
        let correct = correct_frames(seg.labels(), truth, &mapping);
        per_video.push(VideoMetrics {
            sequence_id: seg.sequence_id().into(),
            frames: seg.len(),
            correct,
            mof: if seg.is_empty() { 0.0 } else { correct as f64 / seg.len() as f64 },
            f1: sequence_f1(seg.labels(), truth, &mapping),
        });
    }
    let total_frames: usize = per_video.iter().map(|v| v.frames).sum();
    let correct_frames: usize = per_video.iter().map(|v| v.correct).sum();
    let f1 = if per_video.is_empty() {
        0.0
    } else {
        per_video.iter().map(|v| v.f1).sum::<f64>() / per_video.len() as f64
    };
    Ok(MetricsReport {
        mof: if total_frames == 0 { 0.0 } else { correct_frames as f64 / total_frames as f64 },
        f1,
        total_frames,
        correct_frames,
        per_video,
        confusion,
        mapping,
    })
}
