//! Co-occurrence action parsing for unsupervised temporal segmentation.
//!
//! The pipeline clusters the frames of every sequence in a corpus, scores each
//! frame under a per-cluster diagonal Gaussian, refines the scores with corpus
//! level co-occurrence statistics, extracts a temporal path that may revisit
//! clusters, and decodes every sequence along that path. The [`eval`] module
//! maps clusters to ground-truth labels with the Hungarian algorithm and
//! reports MoF and segment F1.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, configuration
//! and the command line live in the companion `cap` crate.

#![no_std]

extern crate alloc;

pub mod clustering;
pub mod cooccur;
pub mod decode;
pub mod error;
pub mod eval;
mod math;
pub mod matrix;
pub mod synth;
pub mod temporal;
pub mod types;

pub use clustering::{fit_clusters, score_sequence, KMeansConfig};
pub use cooccur::{
    build_cooccurrence, occurrence_ratios, refine_scores, select_salience_pool, RefineConfig,
    SaliencePool,
};
pub use decode::{argmax_decode, viterbi_decode, DecodeConfig};
pub use error::Error;
pub use eval::{evaluate, f1, hungarian_match, mof, MetricsReport};
pub use matrix::Matrix;
pub use temporal::{build_histograms, extract_path, PathConfig};
pub use types::{
    ClusterModel, CooccurrenceStats, Corpus, FeatureSequence, GroundTruth, LabelMapping,
    ScoreMatrix, Segment, Segmentation, TemporalHistogram, TemporalPath, Violation,
};

pub type Result<T, E = Error> = core::result::Result<T, E>;
