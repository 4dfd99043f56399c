//! Cluster temporal-location histograms and temporal path extraction.

use alloc::vec;
use alloc::vec::Vec;

use crate::types::{ClusterModel, Corpus, TemporalHistogram, TemporalPath};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct PathConfig {
    /// Number of equal-width bins over relative time `(0, 1]`.
    pub bin_count: usize,
    /// A bin is selected when its normalized count is strictly above this.
    pub theta: f64,
}

impl Default for PathConfig {
    fn default() -> Self {
        Self {
            bin_count: 20,
            theta: 0.15,
        }
    }
}

impl PathConfig {
    pub fn validate(&self) -> Result<()> {
        if self.bin_count == 0 {
            return Err(Error::Config("bin_count must be at least 1"));
        }
        if !(self.theta > 0.0 && self.theta < 1.0) {
            return Err(Error::Config("theta must lie in (0, 1)"));
        }
        Ok(())
    }
}

/// Bin of the 1-based frame `n` of an `len`-frame sequence. The timestamp
/// `n / len` lies in `(0, 1]`; bins are half-open except the last.
pub fn bin_of(n: usize, len: usize, bins: usize) -> usize {
    ((n * bins) / len).min(bins - 1)
}

/// One normalized histogram per cluster over the relative timestamps of the
/// frames hard-assigned to it.
pub fn build_histograms(model: &ClusterModel, corpus: &Corpus, cfg: &PathConfig) -> Result<Vec<TemporalHistogram>> {
    cfg.validate()?;
    let bins = cfg.bin_count;
    let mut counts = vec![vec![0u64; bins]; model.k()];
    for seq in corpus {
        let labels = model
            .assignments(seq.id())
            .ok_or_else(|| Error::UnknownSequence(seq.id().into()))?;
        let len = labels.len();
        for (i, &k) in labels.iter().enumerate() {
            counts[k][bin_of(i + 1, len, bins)] += 1;
        }
    }
    Ok(counts
        .into_iter()
        .enumerate()
        .map(|(cluster, c)| {
            let total: u64 = c.iter().sum();
            let counts = if total == 0 {
                vec![0.0; bins]
            } else {
                c.iter().map(|&v| v as f64 / total as f64).collect()
            };
            TemporalHistogram { cluster, counts }
        })
        .collect())
}

/// Selected `(bin, cluster)` pairs in path order: ascending bin, then
/// ascending cluster id.
pub fn selected_bins(histograms: &[TemporalHistogram], theta: f64) -> Vec<(usize, usize)> {
    let mut selected: Vec<(usize, usize)> = histograms
        .iter()
        .flat_map(|h| {
            h.counts
                .iter()
                .enumerate()
                .filter(move |(_, &c)| c > theta)
                .map(move |(b, _)| (b, h.cluster))
        })
        .collect();
    selected.sort_unstable();
    selected
}

/// Multi-occurrence path: every bin above `theta` from every cluster, sorted
/// by temporal location, with consecutive repeats collapsed. A cluster may
/// appear more than once.
pub fn extract_path(histograms: &[TemporalHistogram], cfg: &PathConfig) -> Result<TemporalPath> {
    cfg.validate()?;
    let mut steps: Vec<usize> = selected_bins(histograms, cfg.theta)
        .into_iter()
        .map(|(_, k)| k)
        .collect();
    steps.dedup();
    if steps.is_empty() {
        return Err(Error::EmptyPath { theta: cfg.theta });
    }
    TemporalPath::new(steps)
}

/// Single-occurrence variant of the path: each cluster of the multi-occurrence
/// path appears once, ordered by the mean of its selected bin positions.
/// Ties go to the lower cluster id.
pub fn single_occurrence_path(histograms: &[TemporalHistogram], cfg: &PathConfig) -> Result<TemporalPath> {
    cfg.validate()?;
    let selected = selected_bins(histograms, cfg.theta);
    if selected.is_empty() {
        return Err(Error::EmptyPath { theta: cfg.theta });
    }
    let k = histograms.iter().map(|h| h.cluster + 1).max().unwrap_or(0);
    let mut sums = vec![(0usize, 0usize); k];
    for &(bin, cluster) in &selected {
        sums[cluster].0 += bin;
        sums[cluster].1 += 1;
    }
    let mut order: Vec<(usize, usize, usize)> = sums
        .iter()
        .enumerate()
        .filter(|(_, (_, count))| *count > 0)
        .map(|(c, &(sum, count))| (sum, count, c))
        .collect();
    // compare sum_a / count_a against sum_b / count_b exactly
    order.sort_by(|a, b| (a.0 * b.1).cmp(&(b.0 * a.1)).then(a.2.cmp(&b.2)));
    TemporalPath::new(order.into_iter().map(|(_, _, c)| c).collect())
}
