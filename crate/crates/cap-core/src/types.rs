//! Domain types shared by every pipeline stage.
//!
//! Values are immutable once built; constructors check the structural
//! invariants and [`validate_sequences`] reports content problems such as
//! non-finite features or mismatched dimensions.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::matrix::Matrix;
use crate::{Error, Result};

/// One sequence of per-frame feature vectors, stored row-major.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FeatureSequence {
    id: String,
    dim: usize,
    data: Vec<f32>,
}

impl FeatureSequence {
    /// Structural checks only. Content (finiteness, non-emptiness) is checked
    /// by [`validate_sequences`] and [`Corpus::new`].
    pub fn new(id: impl Into<String>, dim: usize, data: Vec<f32>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::ZeroDimension);
        }
        if !data.len().is_multiple_of(dim) {
            return Err(Error::RaggedFrames {
                len: data.len(),
                dim,
            });
        }
        Ok(Self {
            id: id.into(),
            dim,
            data,
        })
    }

    pub fn from_rows<R: AsRef<[f32]>>(id: impl Into<String>, rows: &[R]) -> Result<Self> {
        let dim = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        let mut data = Vec::with_capacity(dim * rows.len());
        for row in rows {
            let row = row.as_ref();
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Self::new(id, dim, data)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of frames.
    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn frame(&self, n: usize) -> &[f32] {
        &self.data[n * self.dim..(n + 1) * self.dim]
    }

    pub fn frames(&self) -> impl ExactSizeIterator<Item = &[f32]> + '_ {
        self.data.chunks_exact(self.dim)
    }

    pub fn as_slice(&self) -> &[f32] {
        &self.data
    }
}

/// A problem found while validating a set of sequences.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    NoSequences,
    Empty { id: String },
    DimensionMismatch { id: String, expected: usize, found: usize },
    NonFinite { id: String, frame: usize, component: usize },
    DuplicateId { id: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NoSequences => write!(f, "corpus has no sequences"),
            Violation::Empty { id } => write!(f, "sequence `{id}` has no frames"),
            Violation::DimensionMismatch {
                id,
                expected,
                found,
            } => write!(f, "sequence `{id}` has dimension {found}, expected {expected}"),
            Violation::NonFinite {
                id,
                frame,
                component,
            } => write!(
                f,
                "sequence `{id}` has a non-finite value at frame {frame}, component {component}"
            ),
            Violation::DuplicateId { id } => write!(f, "sequence id `{id}` appears more than once"),
        }
    }
}

/// Reports every violation in `sequences`; an empty report means the
/// sequences form a valid [`Corpus`]. The first sequence fixes the expected
/// dimension. At most one non-finite violation is reported per sequence.
pub fn validate_sequences(sequences: &[FeatureSequence]) -> Vec<Violation> {
    let mut report = Vec::new();
    let Some(first) = sequences.first() else {
        report.push(Violation::NoSequences);
        return report;
    };
    let dim = first.dim();
    let mut seen = BTreeSet::new();
    for seq in sequences {
        if !seen.insert(seq.id()) {
            report.push(Violation::DuplicateId { id: seq.id.clone() });
        }
        if seq.is_empty() {
            report.push(Violation::Empty { id: seq.id.clone() });
        }
        if seq.dim() != dim {
            report.push(Violation::DimensionMismatch {
                id: seq.id.clone(),
                expected: dim,
                found: seq.dim(),
            });
        }
        if let Some(pos) = seq.data.iter().position(|v| !v.is_finite()) {
            report.push(Violation::NonFinite {
                id: seq.id.clone(),
                frame: pos / seq.dim,
                component: pos % seq.dim,
            });
        }
    }
    report
}

/// A validated set of sequences sharing one feature dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    dim: usize,
    sequences: Vec<FeatureSequence>,
}

impl Corpus {
    pub fn new(sequences: Vec<FeatureSequence>) -> Result<Self> {
        let report = validate_sequences(&sequences);
        if !report.is_empty() {
            return Err(Error::InvalidCorpus(report));
        }
        Ok(Self {
            dim: sequences[0].dim(),
            sequences,
        })
    }

    pub fn validate(&self) -> Vec<Violation> {
        validate_sequences(&self.sequences)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.sequences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sequences.is_empty()
    }

    pub fn sequences(&self) -> &[FeatureSequence] {
        &self.sequences
    }

    pub fn iter(&self) -> core::slice::Iter<'_, FeatureSequence> {
        self.sequences.iter()
    }

    pub fn get(&self, id: &str) -> Option<&FeatureSequence> {
        self.sequences.iter().find(|s| s.id() == id)
    }

    pub fn total_frames(&self) -> usize {
        self.sequences.iter().map(FeatureSequence::len).sum()
    }

    pub fn into_sequences(self) -> Vec<FeatureSequence> {
        self.sequences
    }
}

impl<'a> IntoIterator for &'a Corpus {
    type Item = &'a FeatureSequence;
    type IntoIter = core::slice::Iter<'a, FeatureSequence>;

    fn into_iter(self) -> Self::IntoIter {
        self.iter()
    }
}

/// K clusters with diagonal Gaussian parameters and the hard k-means
/// assignment of every training frame.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ClusterModel {
    k: usize,
    dim: usize,
    centroids: Matrix<f64>,
    means: Matrix<f64>,
    variances: Matrix<f64>,
    assignments: BTreeMap<String, Vec<usize>>,
}

impl ClusterModel {
    pub fn new(
        centroids: Matrix<f64>,
        means: Matrix<f64>,
        variances: Matrix<f64>,
        assignments: BTreeMap<String, Vec<usize>>,
    ) -> Result<Self> {
        let model = Self {
            k: centroids.rows(),
            dim: centroids.cols(),
            centroids,
            means,
            variances,
            assignments,
        };
        model.check()?;
        Ok(model)
    }

    /// Re-checks the invariants, for models that arrive through deserialization.
    pub fn check(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::Config("model must have at least one cluster"));
        }
        if self.dim == 0 {
            return Err(Error::ZeroDimension);
        }
        for m in [&self.centroids, &self.means, &self.variances] {
            if m.rows() != self.k || m.cols() != self.dim || m.as_slice().len() != self.k * self.dim
            {
                return Err(Error::DimensionMismatch {
                    expected: self.dim,
                    found: m.cols(),
                });
            }
        }
        if self.variances.as_slice().iter().any(|v| !v.is_finite() || *v <= 0.0) {
            return Err(Error::Config("variances must be finite and positive"));
        }
        if self.means.as_slice().iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("means must be finite"));
        }
        for labels in self.assignments.values() {
            if let Some(&id) = labels.iter().find(|&&l| l >= self.k) {
                return Err(Error::ClusterOutOfRange { id, k: self.k });
            }
        }
        Ok(())
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn centroid(&self, k: usize) -> &[f64] {
        self.centroids.row(k)
    }

    pub fn centroids(&self) -> &Matrix<f64> {
        &self.centroids
    }

    pub fn variances(&self) -> &Matrix<f64> {
        &self.variances
    }

    pub fn mean(&self, k: usize) -> &[f64] {
        self.means.row(k)
    }

    pub fn variance(&self, k: usize) -> &[f64] {
        self.variances.row(k)
    }

    /// Hard k-means assignments of the training frames of `id`.
    pub fn assignments(&self, id: &str) -> Option<&[usize]> {
        self.assignments.get(id).map(Vec::as_slice)
    }

    pub fn all_assignments(&self) -> &BTreeMap<String, Vec<usize>> {
        &self.assignments
    }
}

/// K×N per-frame log-probabilities of one sequence.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ScoreMatrix {
    sequence_id: String,
    values: Matrix<f64>,
    refined: bool,
}

impl ScoreMatrix {
    pub fn new(sequence_id: impl Into<String>, values: Matrix<f64>, refined: bool) -> Result<Self> {
        if values.as_slice().iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("score matrix entries must be finite"));
        }
        Ok(Self {
            sequence_id: sequence_id.into(),
            values,
            refined,
        })
    }

    pub fn sequence_id(&self) -> &str {
        &self.sequence_id
    }

    /// Number of clusters (rows).
    pub fn k(&self) -> usize {
        self.values.rows()
    }

    /// Number of frames (columns).
    pub fn len(&self) -> usize {
        self.values.cols()
    }

    pub fn is_empty(&self) -> bool {
        self.values.cols() == 0
    }

    pub fn is_refined(&self) -> bool {
        self.refined
    }

    pub fn get(&self, k: usize, n: usize) -> f64 {
        self.values[(k, n)]
    }

    pub fn values(&self) -> &Matrix<f64> {
        &self.values
    }

    /// Adds `offset` to every entry. Used to check shift invariance.
    pub fn shifted(&self, offset: f64) -> Result<Self> {
        let data = self.values.as_slice().iter().map(|v| v + offset).collect();
        let values = Matrix::from_vec(self.values.rows(), self.values.cols(), data)
            .expect("same shape");
        Self::new(self.sequence_id.clone(), values, self.refined)
    }
}

/// Corpus-level cluster occurrence counts and conditional co-occurrence.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CooccurrenceStats {
    occurs: Vec<usize>,
    pair_counts: Matrix<usize>,
    conditional: Matrix<f64>,
    tau1: f64,
}

impl CooccurrenceStats {
    /// Builds the conditional matrix from counts. The diagonal of
    /// `pair_counts` is overwritten with `occurs` so that `P(i|i) = 1`.
    pub fn from_counts(occurs: Vec<usize>, mut pair_counts: Matrix<usize>, tau1: f64) -> Result<Self> {
        let k = occurs.len();
        if pair_counts.rows() != k || pair_counts.cols() != k {
            return Err(Error::DimensionMismatch {
                expected: k,
                found: pair_counts.rows(),
            });
        }
        for i in 0..k {
            pair_counts[(i, i)] = occurs[i];
        }
        let mut conditional = Matrix::filled(k, k, 0.0);
        for i in 0..k {
            if occurs[i] == 0 {
                continue;
            }
            for j in 0..k {
                conditional[(i, j)] = pair_counts[(i, j)] as f64 / occurs[i] as f64;
            }
        }
        Ok(Self {
            occurs,
            pair_counts,
            conditional,
            tau1,
        })
    }

    /// Builds stats directly from a conditional matrix. Counts are left empty;
    /// meant for hand-specified co-occurrence structure.
    pub fn from_conditional(conditional: Matrix<f64>, tau1: f64) -> Result<Self> {
        let k = conditional.rows();
        if conditional.cols() != k {
            return Err(Error::DimensionMismatch {
                expected: k,
                found: conditional.cols(),
            });
        }
        if conditional.as_slice().iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::Config("conditional probabilities must lie in [0, 1]"));
        }
        Ok(Self {
            occurs: alloc::vec![0; k],
            pair_counts: Matrix::filled(k, k, 0),
            conditional,
            tau1,
        })
    }

    pub fn k(&self) -> usize {
        self.occurs.len()
    }

    /// `C(i)`: number of sequences in which cluster `i` appears.
    pub fn occurs(&self) -> &[usize] {
        &self.occurs
    }

    /// `C(i, j)`: number of sequences in which both clusters appear.
    pub fn pair_counts(&self) -> &Matrix<usize> {
        &self.pair_counts
    }

    /// Row `i`, column `j` holds `P(j | i)`.
    pub fn conditional(&self) -> &Matrix<f64> {
        &self.conditional
    }

    /// `P(j | i)`, zero when cluster `i` never appears.
    pub fn prob(&self, j: usize, given: usize) -> f64 {
        self.conditional[(given, j)]
    }

    pub fn tau1(&self) -> f64 {
        self.tau1
    }
}

/// Distribution of one cluster's frames over relative time.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TemporalHistogram {
    pub cluster: usize,
    /// One entry per bin; sums to 1, or all zero when the cluster has no frames.
    pub counts: Vec<f64>,
}

impl TemporalHistogram {
    pub fn bin_count(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> f64 {
        self.counts.iter().sum()
    }
}

/// Ordered cluster ids to decode along. Consecutive steps always differ.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(try_from = "Vec<usize>", into = "Vec<usize>"))]
pub struct TemporalPath {
    steps: Vec<usize>,
}

impl TemporalPath {
    pub fn new(steps: Vec<usize>) -> Result<Self> {
        if steps.is_empty() || steps.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidPath);
        }
        Ok(Self { steps })
    }

    pub fn steps(&self) -> &[usize] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

impl TryFrom<Vec<usize>> for TemporalPath {
    type Error = Error;

    fn try_from(steps: Vec<usize>) -> Result<Self> {
        Self::new(steps)
    }
}

impl From<TemporalPath> for Vec<usize> {
    fn from(path: TemporalPath) -> Self {
        path.steps
    }
}

/// A maximal run of equal labels covering frames `start..end`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Segment {
    pub label: usize,
    pub start: usize,
    pub end: usize,
}

impl Segment {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end == self.start
    }
}

/// Splits a label sequence into maximal runs.
pub fn segments_of(labels: &[usize]) -> Vec<Segment> {
    let mut out: Vec<Segment> = Vec::new();
    for (n, &label) in labels.iter().enumerate() {
        match out.last_mut() {
            Some(seg) if seg.label == label => seg.end = n + 1,
            _ => out.push(Segment {
                label,
                start: n,
                end: n + 1,
            }),
        }
    }
    out
}

/// Per-frame cluster labels of one sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Segmentation {
    sequence_id: String,
    labels: Vec<usize>,
}

impl Segmentation {
    pub fn new(sequence_id: impl Into<String>, labels: Vec<usize>) -> Self {
        Self {
            sequence_id: sequence_id.into(),
            labels,
        }
    }

    pub fn sequence_id(&self) -> &str {
        &self.sequence_id
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn segments(&self) -> Vec<Segment> {
        segments_of(&self.labels)
    }
}

/// Injective partial map from cluster id to ground-truth label id.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LabelMapping {
    targets: Vec<Option<usize>>,
}

impl LabelMapping {
    pub fn new(targets: Vec<Option<usize>>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        if targets.iter().flatten().any(|t| !seen.insert(*t)) {
            return Err(Error::NonInjectiveMapping);
        }
        Ok(Self { targets })
    }

    pub fn identity(k: usize) -> Self {
        Self {
            targets: (0..k).map(Some).collect(),
        }
    }

    pub fn empty(k: usize) -> Self {
        Self {
            targets: alloc::vec![None; k],
        }
    }

    pub fn get(&self, cluster: usize) -> Option<usize> {
        self.targets.get(cluster).copied().flatten()
    }

    pub fn targets(&self) -> &[Option<usize>] {
        &self.targets
    }

    pub fn mapped_count(&self) -> usize {
        self.targets.iter().flatten().count()
    }
}

/// Per-sequence frame labels over a label vocabulary.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GroundTruth {
    vocabulary: Vec<String>,
    labels: BTreeMap<String, Vec<usize>>,
}

impl GroundTruth {
    pub fn new(vocabulary: Vec<String>, labels: BTreeMap<String, Vec<usize>>) -> Result<Self> {
        let l = vocabulary.len();
        for seq in labels.values() {
            if let Some(&id) = seq.iter().find(|&&x| x >= l) {
                return Err(Error::ClusterOutOfRange { id, k: l });
            }
        }
        Ok(Self { vocabulary, labels })
    }

    /// Ground truth whose vocabulary is just the label ids `0..n_labels`.
    pub fn from_ids(n_labels: usize, labels: BTreeMap<String, Vec<usize>>) -> Result<Self> {
        let vocabulary = (0..n_labels).map(|i| alloc::format!("{i}")).collect();
        Self::new(vocabulary, labels)
    }

    pub fn vocabulary(&self) -> &[String] {
        &self.vocabulary
    }

    pub fn n_labels(&self) -> usize {
        self.vocabulary.len()
    }

    pub fn get(&self, id: &str) -> Option<&[usize]> {
        self.labels.get(id).map(Vec::as_slice)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[usize])> + '_ {
        self.labels.iter().map(|(k, v)| (k.as_str(), v.as_slice()))
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Checks that every sequence in `corpus` has labels of matching length.
    pub fn check_against(&self, corpus: &Corpus) -> Result<()> {
        for seq in corpus {
            let labels = self
                .get(seq.id())
                .ok_or_else(|| Error::UnknownSequence(seq.id().into()))?;
            if labels.len() != seq.len() {
                return Err(Error::LengthMismatch {
                    id: seq.id().into(),
                    expected: seq.len(),
                    found: labels.len(),
                });
            }
        }
        Ok(())
    }
}
