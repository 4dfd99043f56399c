//! Per-sequence label files: `<dir>/<id>.txt`, one label token per line.
//!
//! Ground-truth directories may carry a `vocabulary.txt` listing the label
//! tokens in id order; tokens missing from it (or every token, when the file
//! is absent) are appended in order of first appearance. Prediction files hold
//! cluster ids as decimal tokens.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::{Path, PathBuf};

use cap_core::{Corpus, GroundTruth, Segmentation};

use crate::error::LoadError;

pub const VOCABULARY_NAME: &str = "vocabulary.txt";

fn label_path(dir: &Path, id: &str) -> PathBuf {
    dir.join(format!("{id}.txt"))
}

pub fn read_tokens(path: &Path) -> Result<Vec<String>, LoadError> {
    let text = fs::read_to_string(path).map_err(LoadError::io(path))?;
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(String::from)
        .collect())
}

pub fn write_tokens<T: AsRef<str>>(path: &Path, tokens: &[T]) -> Result<(), LoadError> {
    let mut out = String::new();
    for t in tokens {
        out.push_str(t.as_ref());
        out.push('\n');
    }
    fs::write(path, out).map_err(LoadError::io(path))
}

/// Loads the ground truth of every sequence in `corpus` from `dir`.
pub fn load_ground_truth(dir: &Path, corpus: &Corpus) -> Result<GroundTruth, LoadError> {
    let vocab_path = dir.join(VOCABULARY_NAME);
    let mut vocabulary: Vec<String> = if vocab_path.exists() {
        read_tokens(&vocab_path)?
    } else {
        Vec::new()
    };
    let mut index: HashMap<String, usize> = vocabulary
        .iter()
        .enumerate()
        .map(|(i, t)| (t.clone(), i))
        .collect();

    let mut labels = BTreeMap::new();
    for seq in corpus {
        let path = label_path(dir, seq.id());
        let tokens = read_tokens(&path)?;
        if tokens.len() != seq.len() {
            return Err(LoadError::Invalid {
                path,
                source: cap_core::Error::LengthMismatch {
                    id: seq.id().into(),
                    expected: seq.len(),
                    found: tokens.len(),
                },
            });
        }
        let ids = tokens
            .into_iter()
            .map(|t| {
                let next = vocabulary.len();
                *index.entry(t.clone()).or_insert_with(|| {
                    vocabulary.push(t);
                    next
                })
            })
            .collect();
        labels.insert(seq.id().to_string(), ids);
    }
    GroundTruth::new(vocabulary, labels).map_err(|source| LoadError::Invalid {
        path: dir.into(),
        source,
    })
}

pub fn write_ground_truth(dir: &Path, gt: &GroundTruth) -> Result<(), LoadError> {
    fs::create_dir_all(dir).map_err(LoadError::io(dir))?;
    write_tokens(&dir.join(VOCABULARY_NAME), gt.vocabulary())?;
    for (id, labels) in gt.iter() {
        let tokens: Vec<&str> = labels.iter().map(|&l| gt.vocabulary()[l].as_str()).collect();
        write_tokens(&label_path(dir, id), &tokens)?;
    }
    Ok(())
}

pub fn write_segmentations(dir: &Path, segmentations: &[Segmentation]) -> Result<(), LoadError> {
    fs::create_dir_all(dir).map_err(LoadError::io(dir))?;
    for seg in segmentations {
        let tokens: Vec<String> = seg.labels().iter().map(usize::to_string).collect();
        write_tokens(&label_path(dir, seg.sequence_id()), &tokens)?;
    }
    Ok(())
}

/// Reads the predicted cluster labels of every sequence in `corpus`.
pub fn read_segmentations(dir: &Path, corpus: &Corpus) -> Result<Vec<Segmentation>, LoadError> {
    corpus
        .iter()
        .map(|seq| {
            let path = label_path(dir, seq.id());
            let labels = read_tokens(&path)?
                .iter()
                .enumerate()
                .map(|(i, t)| {
                    t.parse::<usize>().map_err(|e| LoadError::Parse {
                        path: path.clone(),
                        line: i + 1,
                        message: format!("`{t}`: {e}"),
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            if labels.len() != seq.len() {
                return Err(LoadError::Invalid {
                    path: path.clone(),
                    source: cap_core::Error::LengthMismatch {
                        id: seq.id().into(),
                        expected: seq.len(),
                        found: labels.len(),
                    },
                });
            }
            Ok(Segmentation::new(seq.id(), labels))
        })
        .collect()
}
