//! Feature file formats.
//!
//! `CAPF` binary, one sequence per file, all integers and floats
//! little-endian:
//!
//! ```text
//! offset  size  field
//! 0       4     magic  b"CAPF"
//! 4       4     version (u32, currently 1)
//! 8       4     frame count N (u32)
//! 12      4     dimension d (u32)
//! 16      4*N*d frames, row-major f32
//! ```
//!
//! CSV: one frame per row, comma separated, no header.
//!
//! Manifest: UTF-8 text, one `<id><TAB><file>` entry per line; file paths are
//! relative to the manifest. Blank lines and lines starting with `#` are
//! ignored. Files ending in `.csv` are read as CSV, everything else as `CAPF`.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use cap_core::{Corpus, FeatureSequence};

use crate::error::LoadError;

pub const MAGIC: &[u8; 4] = b"CAPF";
pub const VERSION: u32 = 1;
const HEADER_LEN: usize = 16;
pub const MANIFEST_NAME: &str = "manifest.txt";

pub fn encode_binary(seq: &FeatureSequence) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + 4 * seq.as_slice().len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(seq.len() as u32).to_le_bytes());
    out.extend_from_slice(&(seq.dim() as u32).to_le_bytes());
    for v in seq.as_slice() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

fn read_u32(bytes: &[u8], at: usize) -> u32 {
    u32::from_le_bytes(bytes[at..at + 4].try_into().expect("4 bytes"))
}

pub fn decode_binary(id: &str, bytes: &[u8], path: &Path) -> Result<FeatureSequence, LoadError> {
    if bytes.len() < HEADER_LEN {
        if bytes.len() >= 4 && &bytes[..4] != MAGIC {
            return Err(LoadError::BadMagic { path: path.into() });
        }
        return Err(LoadError::Truncated {
            path: path.into(),
            expected: HEADER_LEN,
            found: bytes.len(),
        });
    }
    if &bytes[..4] != MAGIC {
        return Err(LoadError::BadMagic { path: path.into() });
    }
    let version = read_u32(bytes, 4);
    if version != VERSION {
        return Err(LoadError::UnsupportedVersion {
            path: path.into(),
            version,
        });
    }
    let n = read_u32(bytes, 8) as usize;
    let d = read_u32(bytes, 12) as usize;
    let expected = HEADER_LEN + 4 * n * d;
    if bytes.len() < expected {
        return Err(LoadError::Truncated {
            path: path.into(),
            expected,
            found: bytes.len(),
        });
    }
    if bytes.len() > expected {
        return Err(LoadError::Parse {
            path: path.into(),
            line: 0,
            message: format!("{} trailing bytes after payload", bytes.len() - expected),
        });
    }
    let data = bytes[HEADER_LEN..]
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")))
        .collect();
    FeatureSequence::new(id, d, data).map_err(|source| LoadError::Invalid {
        path: path.into(),
        source,
    })
}

pub fn write_binary(seq: &FeatureSequence, path: &Path) -> Result<(), LoadError> {
    fs::write(path, encode_binary(seq)).map_err(LoadError::io(path))
}

pub fn read_binary(id: &str, path: &Path) -> Result<FeatureSequence, LoadError> {
    let bytes = fs::read(path).map_err(LoadError::io(path))?;
    decode_binary(id, &bytes, path)
}

pub fn write_csv(seq: &FeatureSequence, path: &Path) -> Result<(), LoadError> {
    let mut out = String::new();
    for frame in seq.frames() {
        let row: Vec<String> = frame.iter().map(|v| v.to_string()).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    fs::write(path, out).map_err(LoadError::io(path))
}

pub fn read_csv(id: &str, path: &Path) -> Result<FeatureSequence, LoadError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_error(path, 0, e))?;
    let mut rows: Vec<Vec<f32>> = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| csv_error(path, line + 1, e))?;
        let row = record
            .iter()
            .map(|field| {
                field.parse::<f32>().map_err(|e| LoadError::Parse {
                    path: path.into(),
                    line: line + 1,
                    message: format!("`{field}`: {e}"),
                })
            })
            .collect::<Result<Vec<f32>, _>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(LoadError::Parse {
            path: path.into(),
            line: 0,
            message: "no frames".into(),
        });
    }
    FeatureSequence::from_rows(id, &rows).map_err(|source| LoadError::Invalid {
        path: path.into(),
        source,
    })
}

fn csv_error(path: &Path, line: usize, e: csv::Error) -> LoadError {
    LoadError::Parse {
        path: path.into(),
        line,
        message: e.to_string(),
    }
}

fn read_any(id: &str, path: &Path) -> Result<FeatureSequence, LoadError> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("csv") => read_csv(id, path),
        _ => read_binary(id, path),
    }
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("sequence")
        .to_string()
}

/// Parses a manifest into `(id, file)` entries with resolved paths.
pub fn read_manifest(path: &Path) -> Result<Vec<(String, PathBuf)>, LoadError> {
    let text = fs::read_to_string(path).map_err(LoadError::io(path))?;
    let base = path.parent().unwrap_or(Path::new("."));
    let mut entries = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((id, file)) = line.split_once('\t') else {
            return Err(LoadError::Parse {
                path: path.into(),
                line: i + 1,
                message: "expected `<id>\\t<file>`".into(),
            });
        };
        entries.push((id.trim().to_string(), base.join(file.trim())));
    }
    Ok(entries)
}

/// Reads a corpus from a manifest, a single `.capf` file or a single `.csv`
/// file, and validates it.
pub fn load_features(path: &Path) -> Result<Corpus, LoadError> {
    let sequences = match path.extension().and_then(|e| e.to_str()) {
        Some("csv") => vec![read_csv(&stem(path), path)?],
        Some("capf") => vec![read_binary(&stem(path), path)?],
        _ => {
            let entries = read_manifest(path)?;
            let mut sequences: Vec<FeatureSequence> = Vec::with_capacity(entries.len());
            for (id, file) in entries {
                let seq = read_any(&id, &file)?;
                if let Some(first) = sequences.first() {
                    if first.dim() != seq.dim() {
                        return Err(LoadError::DimensionMismatch {
                            path: file,
                            expected: first.dim(),
                            found: seq.dim(),
                        });
                    }
                }
                sequences.push(seq);
            }
            sequences
        }
    };
    Corpus::new(sequences).map_err(|source| LoadError::Invalid {
        path: path.into(),
        source,
    })
}

/// Writes every sequence as `<id>.capf` into `dir` plus a manifest, and
/// returns the manifest path.
pub fn write_corpus(corpus: &Corpus, dir: &Path) -> Result<PathBuf, LoadError> {
    fs::create_dir_all(dir).map_err(LoadError::io(dir))?;
    let manifest = dir.join(MANIFEST_NAME);
    let mut listing = Vec::new();
    for seq in corpus {
        let file = format!("{}.capf", seq.id());
        write_binary(seq, &dir.join(&file))?;
        writeln!(listing, "{}\t{}", seq.id(), file).expect("write to Vec");
    }
    fs::write(&manifest, listing).map_err(LoadError::io(&manifest))?;
    Ok(manifest)
}
