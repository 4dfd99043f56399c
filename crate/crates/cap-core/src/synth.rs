//! Seeded generator of labelled corpora with known structure.
//!
//! Every video samples one sequence from a weighted grammar, may drop groups
//! of optional sub-actions, and emits a run of frames per step drawn from the
//! step's isotropic Gaussian. Video `m` draws from its own ChaCha stream, so a
//! corpus is fully determined by the seed.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::math::sqrt;
use crate::matrix::Matrix;
use crate::types::{CooccurrenceStats, Corpus, FeatureSequence, GroundTruth};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GrammarRule {
    pub sequence: Vec<usize>,
    pub weight: f64,
}

/// Sub-actions dropped together from a video with probability `drop_prob`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OptionalGroup {
    pub subactions: Vec<usize>,
    pub drop_prob: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SynthSpec {
    pub n_subactions: usize,
    pub dim: usize,
    pub n_videos: usize,
    /// Inclusive range of frames emitted per grammar step.
    pub segment_len: (usize, usize),
    /// One mean per sub-action.
    pub means: Vec<Vec<f64>>,
    /// Isotropic standard deviation per sub-action.
    pub sigmas: Vec<f64>,
    pub grammar: Vec<GrammarRule>,
    #[cfg_attr(feature = "serde", serde(default))]
    pub optional: Vec<OptionalGroup>,
    pub seed: u64,
}

/// Means on scaled coordinate axes: `mean_k = s * e_k` with `s` chosen so
/// every pair is `separation` apart. Needs `n <= dim`.
pub fn axis_means(n: usize, dim: usize, separation: f64) -> Result<Vec<Vec<f64>>> {
    if n > dim {
        return Err(Error::Config("axis means need n_subactions <= dim"));
    }
    let scale = separation / sqrt(2.0);
    Ok((0..n)
        .map(|k| {
            let mut m = vec![0.0; dim];
            m[k] = scale;
            m
        })
        .collect())
}

impl SynthSpec {
    /// A spec with axis means `separation` apart and a shared `sigma`.
    pub fn separated(
        n_subactions: usize,
        dim: usize,
        n_videos: usize,
        separation: f64,
        sigma: f64,
        grammar: Vec<GrammarRule>,
        seed: u64,
    ) -> Result<Self> {
        let spec = Self {
            n_subactions,
            dim,
            n_videos,
            segment_len: (8, 16),
            means: axis_means(n_subactions, dim, separation)?,
            sigmas: vec![sigma; n_subactions],
            grammar,
            optional: Vec::new(),
            seed,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.n_subactions;
        if k == 0 || self.dim == 0 || self.n_videos == 0 {
            return Err(Error::Config("n_subactions, dim and n_videos must be positive"));
        }
        if self.segment_len.0 == 0 || self.segment_len.0 > self.segment_len.1 {
            return Err(Error::Config("segment_len must be a non-empty range of positive lengths"));
        }
        if self.means.len() != k || self.sigmas.len() != k {
            return Err(Error::Config("need one mean and one sigma per sub-action"));
        }
        if self.means.iter().any(|m| m.len() != self.dim || m.iter().any(|v| !v.is_finite())) {
            return Err(Error::Config("means must be finite and match dim"));
        }
        for i in 0..k {
            for j in i + 1..k {
                if self.means[i] == self.means[j] {
                    return Err(Error::Config("sub-action means must be pairwise distinct"));
                }
            }
        }
        if self.sigmas.iter().any(|s| !s.is_finite() || *s <= 0.0) {
            return Err(Error::Config("sigmas must be finite and positive"));
        }
        if self.grammar.is_empty() {
            return Err(Error::Config("grammar needs at least one sequence"));
        }
        for rule in &self.grammar {
            if rule.sequence.is_empty() {
                return Err(Error::Config("grammar sequences must be non-empty"));
            }
            if rule.sequence.iter().any(|&s| s >= k) {
                return Err(Error::Config("grammar refers to an unknown sub-action"));
            }
            if !rule.weight.is_finite() || rule.weight <= 0.0 {
                return Err(Error::Config("grammar weights must be positive"));
            }
        }
        for group in &self.optional {
            if !(0.0..=1.0).contains(&group.drop_prob) {
                return Err(Error::Config("drop_prob must lie in [0, 1]"));
            }
            if group.subactions.iter().any(|&s| s >= k) {
                return Err(Error::Config("optional group refers to an unknown sub-action"));
            }
        }
        Ok(())
    }

    pub fn video_id(m: usize) -> String {
        format!("video_{m:03}")
    }
}

/// The step sequence sampled for one video, after optional drops. Dropping
/// never empties a video: if it would, the full sequence is kept.
fn sample_steps<R: Rng>(spec: &SynthSpec, rules: &WeightedIndex<f64>, rng: &mut R) -> Vec<usize> {
    let base = &spec.grammar[rules.sample(rng)].sequence;
    let mut dropped = BTreeSet::new();
    for group in &spec.optional {
        if rng.random_bool(group.drop_prob) {
            dropped.extend(group.subactions.iter().copied());
        }
    }
    let kept: Vec<usize> = base.iter().copied().filter(|s| !dropped.contains(s)).collect();
    if kept.is_empty() {
        base.clone()
    } else {
        kept
    }
}

/// Generates a corpus and its frame-level ground truth.
pub fn generate(spec: &SynthSpec) -> Result<(Corpus, GroundTruth)> {
    spec.validate()?;
    let weights: Vec<f64> = spec.grammar.iter().map(|r| r.weight).collect();
    let rules = WeightedIndex::new(&weights).map_err(|_| Error::Config("invalid grammar weights"))?;

    let mut sequences = Vec::with_capacity(spec.n_videos);
    let mut labels = BTreeMap::new();
    for m in 0..spec.n_videos {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        rng.set_stream(m as u64);
        let steps = sample_steps(spec, &rules, &mut rng);

        let mut data = Vec::new();
        let mut truth = Vec::new();
        for &s in &steps {
            let len = rng.random_range(spec.segment_len.0..=spec.segment_len.1);
            let (mean, sigma) = (&spec.means[s], spec.sigmas[s]);
            for _ in 0..len {
                for &mu in mean {
                    let z: f64 = rng.sample(StandardNormal);
                    data.push((mu + sigma * z) as f32);
                }
                truth.push(s);
            }
        }
        let id = SynthSpec::video_id(m);
        sequences.push(FeatureSequence::new(id.clone(), spec.dim, data)?);
        labels.insert(id, truth);
    }
    Ok((Corpus::new(sequences)?, GroundTruth::from_ids(spec.n_subactions, labels)?))
}

/// Co-occurrence statistics computed straight from ground-truth labels: a
/// sub-action appears in a video when its frame share exceeds `tau1`.
pub fn true_cooccurrence(gt: &GroundTruth, n_subactions: usize, tau1: f64) -> Result<CooccurrenceStats> {
    let mut occurs = vec![0usize; n_subactions];
    let mut pairs = Matrix::filled(n_subactions, n_subactions, 0usize);
    for (_, labels) in gt.iter() {
        let mut share: BTreeMap<usize, usize> = BTreeMap::new();
        for &l in labels {
            if l >= n_subactions {
                return Err(Error::ClusterOutOfRange { id: l, k: n_subactions });
            }
            *share.entry(l).or_default() += 1;
        }
        let present: Vec<usize> = share
            .into_iter()
            .filter(|&(_, c)| c as f64 > tau1 * labels.len() as f64)
            .map(|(l, _)| l)
            .collect();
        for (a, &i) in present.iter().enumerate() {
            occurs[i] += 1;
            for &j in &present[a + 1..] {
                pairs[(i, j)] += 1;
                pairs[(j, i)] += 1;
            }
        }
    }
    CooccurrenceStats::from_counts(occurs, pairs, tau1)
}
