use std::fmt;
use std::io;
use std::path::PathBuf;

/// Failure while reading or writing one of the on-disk formats. Every variant
/// names the offending file.
#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{path}: bad magic, expected `CAPF`")]
    BadMagic { path: PathBuf },
    #[error("{path}: unsupported format version {version}")]
    UnsupportedVersion { path: PathBuf, version: u32 },
    #[error("{path}: truncated, header promises {expected} bytes but {found} are present")]
    Truncated {
        path: PathBuf,
        expected: usize,
        found: usize,
    },
    #[error("{path}: dimension {found} differs from {expected} used by earlier files")]
    DimensionMismatch {
        path: PathBuf,
        expected: usize,
        found: usize,
    },
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{path}: {source}")]
    Invalid {
        path: PathBuf,
        #[source]
        source: cap_core::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("{path}: {source}")]
    Toml {
        path: PathBuf,
        #[source]
        source: toml::de::Error,
    },
}

impl LoadError {
    pub(crate) fn io(path: impl Into<PathBuf>) -> impl FnOnce(io::Error) -> Self {
        let path = path.into();
        move |source| LoadError::Io { path, source }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Load,
    Cluster,
    Score,
    Cooccurrence,
    Refine,
    Histogram,
    Path,
    Decode,
    Eval,
    Write,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Stage::Load => "load",
            Stage::Cluster => "cluster",
            Stage::Score => "score",
            Stage::Cooccurrence => "cooccurrence",
            Stage::Refine => "refine",
            Stage::Histogram => "histogram",
            Stage::Path => "path",
            Stage::Decode => "decode",
            Stage::Eval => "eval",
            Stage::Write => "write",
        };
        f.write_str(name)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("[{stage}] {source}")]
    Core {
        stage: Stage,
        #[source]
        source: cap_core::Error,
    },
    #[error("[{stage}] {source}")]
    Io {
        stage: Stage,
        #[source]
        source: LoadError,
    },
}

impl PipelineError {
    pub fn stage(&self) -> Stage {
        match self {
            PipelineError::Core { stage, .. } | PipelineError::Io { stage, .. } => *stage,
        }
    }
}

pub(crate) trait AtStage<T> {
    fn at(self, stage: Stage) -> Result<T, PipelineError>;
}

impl<T> AtStage<T> for Result<T, cap_core::Error> {
    fn at(self, stage: Stage) -> Result<T, PipelineError> {
        self.map_err(|source| PipelineError::Core { stage, source })
    }
}

impl<T> AtStage<T> for Result<T, LoadError> {
    fn at(self, stage: Stage) -> Result<T, PipelineError> {
        self.map_err(|source| PipelineError::Io { stage, source })
    }
}
