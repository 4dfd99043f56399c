//! Pipeline configuration, loadable from a TOML file.
//!
//! ```toml
//! features = "data/manifest.txt"
//! ground_truth = "data/gt"
//! output = "out"
//! use_cooccurrence = true
//! path_mode = "multi"        # "multi", "single" or "off"
//!
//! [kmeans]
//! k = 6
//! seed = 0
//!
//! [refine]
//! tau1 = 0.1
//! tau2 = 0.1
//! eta = 0.5
//!
//! [path]
//! bin_count = 20
//! theta = 0.15
//!
//! [decode]
//! stay_log_prob = -0.6931471805599453
//! advance_log_prob = -0.6931471805599453
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use cap_core::{DecodeConfig, KMeansConfig, PathConfig, RefineConfig};
use serde::{Deserialize, Serialize};

use crate::error::LoadError;

/// How frames are decoded after scoring.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PathMode {
    /// Per-frame argmax, no temporal path.
    Off,
    /// Every cluster at most once, ordered by mean temporal location.
    Single,
    /// Multi-occurrence path from the thresholded histogram bins.
    #[default]
    Multi,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub kmeans: KMeansConfig,
    pub refine: RefineConfig,
    pub path: PathConfig,
    pub decode: DecodeConfig,
    pub use_cooccurrence: bool,
    pub path_mode: PathMode,
    pub features: Option<PathBuf>,
    pub ground_truth: Option<PathBuf>,
    pub output: Option<PathBuf>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            kmeans: KMeansConfig::default(),
            refine: RefineConfig::default(),
            path: PathConfig::default(),
            decode: DecodeConfig::default(),
            use_cooccurrence: true,
            path_mode: PathMode::Multi,
            features: None,
            ground_truth: None,
            output: None,
        }
    }
}

impl PipelineConfig {
    pub fn with_k(k: usize) -> Self {
        Self {
            kmeans: KMeansConfig::with_k(k),
            ..Self::default()
        }
    }

    pub fn use_multi_occur_path(&self) -> bool {
        self.path_mode == PathMode::Multi
    }

    pub fn validate(&self) -> cap_core::Result<()> {
        self.kmeans.validate()?;
        self.refine.validate()?;
        self.path.validate()?;
        self.decode.validate()
    }

    /// Reads a TOML config. Relative input and output paths are resolved
    /// against the config file's directory.
    pub fn from_file(path: &Path) -> Result<Self, LoadError> {
        let text = fs::read_to_string(path).map_err(LoadError::io(path))?;
        let mut cfg: Self = toml::from_str(&text).map_err(|source| LoadError::Toml {
            path: path.into(),
            source,
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [&mut cfg.features, &mut cfg.ground_truth, &mut cfg.output].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        cfg.validate().map_err(|source| LoadError::Invalid {
            path: path.into(),
            source,
        })?;
        Ok(cfg)
    }
}
