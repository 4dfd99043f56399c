//! JSON artifacts passed between CLI stages.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use cap_core::{ClusterModel, SaliencePool, TemporalHistogram, TemporalPath};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::LoadError;

pub fn save_json<T: Serialize>(value: &T, path: &Path) -> Result<(), LoadError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(LoadError::io(parent))?;
    }
    let text = serde_json::to_string_pretty(value).map_err(|source| LoadError::Json {
        path: path.into(),
        source,
    })?;
    fs::write(path, text + "\n").map_err(LoadError::io(path))
}

pub fn load_json<T: DeserializeOwned>(path: &Path) -> Result<T, LoadError> {
    let text = fs::read_to_string(path).map_err(LoadError::io(path))?;
    serde_json::from_str(&text).map_err(|source| LoadError::Json {
        path: path.into(),
        source,
    })
}

pub fn load_model(path: &Path) -> Result<ClusterModel, LoadError> {
    let model: ClusterModel = load_json(path)?;
    model.check().map_err(|source| LoadError::Invalid {
        path: path.into(),
        source,
    })?;
    Ok(model)
}

/// Histograms together with the path extracted from them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemporalArtifact {
    pub bin_count: usize,
    pub theta: f64,
    pub histograms: Vec<TemporalHistogram>,
    pub path: Option<TemporalPath>,
}

/// Salience pool of every sequence, keyed by sequence id.
pub type PoolArtifact = BTreeMap<String, SaliencePool>;
