//! Wave files (JSON sidecar + raw little-endian f64 payload) and run manifests.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::spectral::{Exponent, Field, Grid, SpectralError, WaveState};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: malformed header: {message}")]
    Header { path: PathBuf, message: String },
    #[error("{path}: payload has {found} bytes, header implies {expected}")]
    Payload { path: PathBuf, expected: usize, found: usize },
    #[error("{path}: {source}")]
    Invalid {
        path: PathBuf,
        #[source]
        source: SpectralError,
    },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> IoError + '_ {
    move |source| IoError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldHeader {
    pub dim: usize,
    pub half_lengths: Vec<f64>,
    pub sizes: Vec<usize>,
    pub p_num: u32,
    pub p_den: u32,
    pub speed: f64,
    pub created: String,
    pub residual: f64,
}

/// The `.json` and `.f64` paths sharing the basename of `path`.
pub fn wave_paths(path: &Path) -> (PathBuf, PathBuf) {
    let stem = match path.extension().and_then(|e| e.to_str()) {
        Some("json") | Some("f64") => path.with_extension(""),
        _ => path.to_path_buf(),
    };
    let mut j = stem.clone().into_os_string();
    j.push(".json");
    let mut b = stem.into_os_string();
    b.push(".f64");
    (PathBuf::from(j), PathBuf::from(b))
}

/// Writes `<base>.json` and `<base>.f64`; returns both paths.
pub fn save_wave(base: &Path, w: &WaveState, residual: f64) -> Result<(PathBuf, PathBuf), IoError> {
    let (jp, bp) = wave_paths(base);
    let g = w.grid();
    let header = FieldHeader {
        dim: g.dim(),
        half_lengths: g.half_lengths().to_vec(),
        sizes: g.sizes().to_vec(),
        p_num: w.p().num(),
        p_den: w.p().den(),
        speed: w.speed(),
        created: chrono::Utc::now().to_rfc3339(),
        residual,
    };
    let text = serde_json::to_string_pretty(&header).expect("header serializes");
    fs::write(&jp, text).map_err(io_err(&jp))?;
    let mut bytes = Vec::with_capacity(8 * g.len());
    for v in w.field().values() {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    fs::write(&bp, bytes).map_err(io_err(&bp))?;
    Ok((jp, bp))
}

/// Reads a wave file pair given either member or the common basename.
pub fn load_wave(path: &Path) -> Result<(WaveState, FieldHeader), IoError> {
    let (jp, bp) = wave_paths(path);
    let text = fs::read_to_string(&jp).map_err(io_err(&jp))?;
    let header: FieldHeader = serde_json::from_str(&text).map_err(|e| IoError::Header {
        path: jp.clone(),
        message: e.to_string(),
    })?;
    if header.half_lengths.len() != header.dim || header.sizes.len() != header.dim {
        return Err(IoError::Header {
            path: jp,
            message: format!("dim {} disagrees with half_lengths/sizes", header.dim),
        });
    }
    let invalid = |source| IoError::Invalid {
        path: jp.clone(),
        source,
    };
    let grid = Grid::new(header.half_lengths.clone(), header.sizes.clone()).map_err(invalid)?;
    let p = Exponent::new(header.p_num as i64, header.p_den as i64).map_err(invalid)?;
    let bytes = fs::read(&bp).map_err(io_err(&bp))?;
    let expected = grid.len() * 8;
    if bytes.len() != expected {
        return Err(IoError::Payload {
            path: bp,
            expected,
            found: bytes.len(),
        });
    }
    let values = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    let invalid = |source| IoError::Invalid {
        path: bp.clone(),
        source,
    };
    let field = Field::new(grid, values).map_err(invalid)?;
    let state = WaveState::new(field, p, header.speed).map_err(invalid)?;
    Ok((state, header))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArtifactEntry {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub created: String,
    pub command: String,
    pub artifacts: Vec<ArtifactEntry>,
}

pub fn sha256_file(path: &Path) -> Result<String, IoError> {
    let bytes = fs::read(path).map_err(io_err(path))?;
    Ok(Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect())
}

/// Writes `manifest.json` in `dir` listing `files` (paths relative to `dir`).
pub fn write_manifest(dir: &Path, command: &str, files: &[PathBuf]) -> Result<PathBuf, IoError> {
    let mut artifacts = Vec::new();
    for f in files {
        let meta = fs::metadata(f).map_err(io_err(f))?;
        let rel = f.strip_prefix(dir).unwrap_or(f);
        artifacts.push(ArtifactEntry {
            path: rel.to_string_lossy().into_owned(),
            bytes: meta.len(),
            sha256: sha256_file(f)?,
        });
    }
    let manifest = Manifest {
        created: chrono::Utc::now().to_rfc3339(),
        command: command.to_string(),
        artifacts,
    };
    let path = dir.join("manifest.json");
    fs::write(&path, serde_json::to_string_pretty(&manifest).expect("manifest serializes")).map_err(io_err(&path))?;
    Ok(path)
}
