//! Corpus-level co-occurrence statistics and salience-pool refinement of
//! per-sequence score matrices.

use alloc::vec;
use alloc::vec::Vec;

use crate::math::{argmax, log};
use crate::matrix::Matrix;
use crate::types::{ClusterModel, CooccurrenceStats, Corpus, ScoreMatrix};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct RefineConfig {
    /// A cluster appears in a sequence when its frame ratio exceeds this.
    pub tau1: f64,
    /// Salience pool admission threshold on the weighted ratio.
    pub tau2: f64,
    /// Probability decay for clusters outside the pool, in `(0, 1]`.
    pub eta: f64,
}

impl Default for RefineConfig {
    fn default() -> Self {
        Self {
            tau1: 0.1,
            tau2: 0.1,
            eta: 0.5,
        }
    }
}

impl RefineConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.tau1) {
            return Err(Error::Config("tau1 must lie in [0, 1)"));
        }
        if !(0.0..1.0).contains(&self.tau2) {
            return Err(Error::Config("tau2 must lie in [0, 1)"));
        }
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            return Err(Error::Config("eta must lie in (0, 1]"));
        }
        Ok(())
    }
}

/// Clusters considered present in one sequence, in admission order.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SaliencePool {
    members: Vec<usize>,
}

impl SaliencePool {
    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn contains(&self, k: usize) -> bool {
        self.members.contains(&k)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// The first admitted cluster, the one with the largest frame ratio.
    pub fn seed(&self) -> usize {
        self.members[0]
    }
}

/// Fraction of frames assigned to each of `k` clusters.
pub fn ratios_from_labels(labels: &[usize], k: usize) -> Vec<f64> {
    let mut counts = vec![0usize; k];
    for &l in labels {
        counts[l] += 1;
    }
    let n = labels.len().max(1) as f64;
    counts.into_iter().map(|c| c as f64 / n).collect()
}

/// `r(k)`: fraction of the frames of `seq_id` hard-assigned to cluster `k`.
pub fn occurrence_ratios(model: &ClusterModel, seq_id: &str) -> Result<Vec<f64>> {
    let labels = model
        .assignments(seq_id)
        .ok_or_else(|| Error::UnknownSequence(seq_id.into()))?;
    Ok(ratios_from_labels(labels, model.k()))
}

/// Counts, over the sequences of `corpus`, how often each cluster and each
/// pair of clusters appears (ratio strictly above `tau1`).
pub fn build_cooccurrence(model: &ClusterModel, corpus: &Corpus, cfg: &RefineConfig) -> Result<CooccurrenceStats> {
    cfg.validate()?;
    let k = model.k();
    let mut occurs = vec![0usize; k];
    let mut pairs = Matrix::filled(k, k, 0usize);
    for seq in corpus {
        let ratios = occurrence_ratios(model, seq.id())?;
        let present: Vec<usize> = (0..k).filter(|&i| ratios[i] > cfg.tau1).collect();
        for &i in &present {
            occurs[i] += 1;
            for &j in &present {
                pairs[(i, j)] += 1;
            }
        }
    }
    CooccurrenceStats::from_counts(occurs, pairs, cfg.tau1)
}

/// Greedy salience pool. Starts from the cluster with the largest ratio;
/// each round multiplies every remaining ratio by `P(i | j)` for the cluster
/// `i` admitted last and admits the best remaining cluster if its weighted
/// ratio exceeds `tau2`. Ties go to the lower cluster id.
pub fn select_salience_pool(ratios: &[f64], stats: &CooccurrenceStats, cfg: &RefineConfig) -> SaliencePool {
    let k = ratios.len();
    debug_assert_eq!(k, stats.k());
    let mut weighted = ratios.to_vec();
    let mut in_pool = vec![false; k];
    let first = argmax(ratios.iter().copied()).unwrap_or(0);
    let mut members = vec![first];
    in_pool[first] = true;

    while members.len() < k {
        let last = *members.last().expect("non-empty");
        for j in (0..k).filter(|&j| !in_pool[j]) {
            weighted[j] *= stats.prob(last, j);
        }
        let best = argmax(
            (0..k).map(|j| if in_pool[j] { f64::NEG_INFINITY } else { weighted[j] }),
        )
        .expect("k > 0");
        if weighted[best] > cfg.tau2 {
            in_pool[best] = true;
            members.push(best);
        } else {
            break;
        }
    }
    SaliencePool { members }
}

/// Adds `ln(eta)` to the rows of every cluster outside `pool`, the log-space
/// form of scaling their probabilities by `eta`.
pub fn refine_scores(scores: &ScoreMatrix, pool: &SaliencePool, cfg: &RefineConfig) -> Result<ScoreMatrix> {
    if scores.is_refined() {
        return Err(Error::AlreadyRefined(scores.sequence_id().into()));
    }
    cfg.validate()?;
    let decay = log(cfg.eta);
    let mut values = scores.values().clone();
    for k in (0..scores.k()).filter(|&k| !pool.contains(k)) {
        for v in values.row_mut(k) {
            *v += decay;
        }
    }
    ScoreMatrix::new(scores.sequence_id(), values, true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::collections::BTreeMap;
    use alloc::string::String;

    fn model_with(assignments: &[(&str, Vec<usize>)], k: usize) -> ClusterModel {
        let map: BTreeMap<String, Vec<usize>> = assignments
            .iter()
            .map(|(id, l)| (String::from(*id), l.clone()))
            .collect();
        ClusterModel::new(
            Matrix::filled(k, 1, 0.0),
            Matrix::filled(k, 1, 0.0),
            Matrix::filled(k, 1, 1.0),
            map,
        )
        .unwrap()
    }

    fn corpus_for(assignments: &[(&str, Vec<usize>)]) -> Corpus {
        Corpus::new(
            assignments
                .iter()
                .map(|(id, l)| crate::FeatureSequence::new(*id, 1, vec![0.0; l.len()]).unwrap())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn ratios_by_direct_count() {
        let model = model_with(
            &[
                ("a", vec![0, 0, 0, 0, 0, 1, 1, 1, 1, 1]),
                ("b", vec![2, 2, 2]),
                ("c", vec![0, 0, 0, 1, 2, 2]),
            ],
            3,
        );
        assert_eq!(occurrence_ratios(&model, "a").unwrap(), vec![0.5, 0.5, 0.0]);
        assert_eq!(occurrence_ratios(&model, "b").unwrap(), vec![0.0, 0.0, 1.0]);
        let r = occurrence_ratios(&model, "c").unwrap();
        assert!((r[0] - 0.5).abs() < 1e-15);
        assert!((r[1] - 1.0 / 6.0).abs() < 1e-15);
        assert!((r[2] - 1.0 / 3.0).abs() < 1e-15);
        assert!(matches!(occurrence_ratios(&model, "zzz"), Err(Error::UnknownSequence(_))));
    }

    #[test]
    fn three_video_hand_count() {
        // video 3: cluster 0 at 1/20 = 0.05 stays below tau1
        let mut v3 = vec![1; 19];
        v3.push(0);
        let data = [
            ("v1", vec![0, 0, 0, 1, 1, 1]),
            ("v2", vec![0, 0, 2, 2]),
            ("v3", v3),
        ];
        let model = model_with(&data, 3);
        let stats = build_cooccurrence(&model, &corpus_for(&data), &RefineConfig::default()).unwrap();
        assert_eq!(stats.occurs(), &[2, 2, 1]);
        assert_eq!(stats.prob(1, 0), 0.5);
        assert_eq!(stats.prob(0, 1), 0.5);
        assert_eq!(stats.prob(2, 0), 0.5);
        assert_eq!(stats.prob(0, 2), 1.0);
        assert_eq!(stats.prob(2, 1), 0.0);
        assert_eq!(stats.prob(1, 2), 0.0);
    }

    #[test]
    fn never_appearing_cluster_has_zero_row_and_column() {
        let data = [("v1", vec![0, 0, 1, 1]), ("v2", vec![0, 1, 1, 1])];
        let model = model_with(&data, 3);
        let stats = build_cooccurrence(&model, &corpus_for(&data), &RefineConfig::default()).unwrap();
        for i in 0..3 {
            assert_eq!(stats.prob(2, i), 0.0);
            assert_eq!(stats.prob(i, 2), 0.0);
        }
        assert_eq!(stats.prob(1, 0), 1.0);
        assert_eq!(stats.prob(0, 1), 1.0);
    }

    fn worked_stats() -> CooccurrenceStats {
        let mut p = Matrix::filled(3, 3, 1.0);
        p[(1, 0)] = 1.0; // P(0|1)
        p[(2, 0)] = 0.2; // P(0|2)
        p[(2, 1)] = 0.5; // P(1|2)
        CooccurrenceStats::from_conditional(p, 0.1).unwrap()
    }

    #[test]
    fn worked_salience_pool() {
        let cfg = RefineConfig {
            tau2: 0.2,
            ..RefineConfig::default()
        };
        let pool = select_salience_pool(&[0.6, 0.3, 0.1], &worked_stats(), &cfg);
        assert_eq!(pool.members(), &[0, 1]);
    }

    #[test]
    fn zero_tau2_full_cooccurrence_admits_everything() {
        let stats = CooccurrenceStats::from_conditional(Matrix::filled(4, 4, 1.0), 0.1).unwrap();
        let cfg = RefineConfig {
            tau2: 0.0,
            ..RefineConfig::default()
        };
        let pool = select_salience_pool(&[0.1, 0.4, 0.2, 0.3], &stats, &cfg);
        assert_eq!(pool.members(), &[1, 3, 2, 0]);
    }

    #[test]
    fn single_dominant_cluster() {
        let pool = select_salience_pool(&[1.0, 0.0, 0.0], &worked_stats(), &RefineConfig::default());
        assert_eq!(pool.members(), &[0]);
    }

    #[test]
    fn argmax_tie_prefers_lower_id() {
        let stats = CooccurrenceStats::from_conditional(Matrix::filled(3, 3, 1.0), 0.1).unwrap();
        let pool = select_salience_pool(&[0.4, 0.4, 0.2], &stats, &RefineConfig::default());
        assert_eq!(pool.members(), &[0, 1, 2]);
    }

    fn scores() -> ScoreMatrix {
        let values = Matrix::from_vec(2, 3, vec![-1.0, -2.0, -3.0, -0.5, -1.5, -2.5]).unwrap();
        ScoreMatrix::new("s", values, false).unwrap()
    }

    #[test]
    fn refine_identity_decay() {
        let pool = SaliencePool { members: vec![0] };
        let cfg = RefineConfig {
            eta: 1.0,
            ..RefineConfig::default()
        };
        let refined = refine_scores(&scores(), &pool, &cfg).unwrap();
        assert_eq!(refined.values(), scores().values());
        assert!(refined.is_refined());
    }

    #[test]
    fn refine_shifts_non_pool_rows() {
        let pool = SaliencePool { members: vec![0] };
        let refined = refine_scores(&scores(), &pool, &RefineConfig::default()).unwrap();
        for n in 0..3 {
            assert_eq!(refined.get(0, n), scores().get(0, n));
            let shift = refined.get(1, n) - scores().get(1, n);
            assert!((shift + core::f64::consts::LN_2).abs() < 1e-12);
        }
    }

    #[test]
    fn refine_full_pool_is_identity_and_refuses_twice() {
        let pool = SaliencePool { members: vec![1, 0] };
        let cfg = RefineConfig {
            eta: 0.01,
            ..RefineConfig::default()
        };
        let refined = refine_scores(&scores(), &pool, &cfg).unwrap();
        assert_eq!(refined.values(), scores().values());
        assert!(matches!(
            refine_scores(&refined, &pool, &cfg),
            Err(Error::AlreadyRefined(_))
        ));
    }

    #[test]
    fn config_bounds() {
        assert!(RefineConfig { eta: 0.0, ..Default::default() }.validate().is_err());
        assert!(RefineConfig { tau1: 1.0, ..Default::default() }.validate().is_err());
        assert!(RefineConfig { tau2: -0.1, ..Default::default() }.validate().is_err());
    }
}
