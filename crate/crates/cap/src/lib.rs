//! File formats, configuration and pipeline orchestration for `cap-core`.
//!
//! * [`features`]: the `CAPF` binary feature format, CSV features and manifests.
//! * [`labels`]: per-sequence label files for ground truth and predictions.
//! * [`store`]: JSON artifacts (cluster model, co-occurrence stats, temporal path).
//! * [`pipeline`]: the end-to-end run with ablation toggles.
//! * [`plot`]: SVG color-bar plots of segmentations.
//! * [`presets`]: synthetic corpora used by the demos and tests.

pub mod config;
pub mod error;
pub mod features;
pub mod labels;
pub mod pipeline;
pub mod plot;
pub mod presets;
pub mod report;
pub mod store;

pub use config::{PathMode, PipelineConfig};
pub use error::{LoadError, PipelineError, Stage};
pub use features::load_features;
pub use labels::load_ground_truth;
pub use pipeline::{run_pipeline, PipelineOutput};
