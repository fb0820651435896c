use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

pub const VMAT_MAGIC: &[u8] = b"VMAT1\n";
const MAX_HEADER: usize = 64;

/// Dense row-major `f32` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f32>,
}

#[derive(Debug, thiserror::Error)]
pub enum MatrixError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("bad magic: expected `VMAT1`")]
    BadMagic,
    #[error("bad header: {0}")]
    BadHeader(String),
    #[error("payload holds {actual} bytes, header promises {expected}")]
    Truncated { expected: usize, actual: usize },
    #[error("{0} trailing bytes after payload")]
    Trailing(usize),
    #[error("non-finite value at row {row}, col {col}")]
    NonFinite { row: usize, col: usize },
    #[error("{rows}x{cols} needs {} values, got {len}", rows * cols)]
    Shape { rows: usize, cols: usize, len: usize },
    #[error("vocab has {vocab} tokens but the matrix has {rows} rows")]
    VocabRows { vocab: usize, rows: usize },
    #[error("sidecar: {0}")]
    Sidecar(String),
}

impl Matrix {
    /// Validates shape and finiteness.
    pub fn new(rows: usize, cols: usize, data: Vec<f32>) -> Result<Self, MatrixError> {
        if rows.checked_mul(cols) != Some(data.len()) {
            return Err(MatrixError::Shape {
                rows,
                cols,
                len: data.len(),
            });
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(MatrixError::NonFinite {
                row: i / cols,
                col: i % cols,
            });
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f32>]) -> Result<Self, MatrixError> {
        let cols = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != cols) {
            return Err(MatrixError::Shape {
                rows: rows.len(),
                cols,
                len: bad.len(),
            });
        }
        Self::new(rows.len(), cols, rows.concat())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_f64(&self, i: usize) -> Vec<f64> {
        self.row(i).iter().map(|v| *v as f64).collect()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(VMAT_MAGIC.len() + 24 + self.data.len() * 4);
        out.extend_from_slice(VMAT_MAGIC);
        out.extend_from_slice(format!("{} {}\n", self.rows, self.cols).as_bytes());
        for v in &self.data {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, MatrixError> {
        let rest = bytes.strip_prefix(VMAT_MAGIC).ok_or(MatrixError::BadMagic)?;
        let nl = rest
            .iter()
            .take(MAX_HEADER)
            .position(|b| *b == b'\n')
            .ok_or_else(|| MatrixError::BadHeader("missing `<rows> <cols>` line".into()))?;
        let header = std::str::from_utf8(&rest[..nl])
            .map_err(|_| MatrixError::BadHeader("header is not ASCII".into()))?;
        let dims: Vec<usize> = header
            .split(' ')
            .map(|s| s.parse::<usize>())
            .collect::<Result<_, _>>()
            .map_err(|_| MatrixError::BadHeader(format!("`{header}`")))?;
        let [rows, cols] = dims[..] else {
            return Err(MatrixError::BadHeader(format!("`{header}`")));
        };
        let payload = &rest[nl + 1..];
        let expected = rows
            .checked_mul(cols)
            .and_then(|n| n.checked_mul(4))
            .ok_or_else(|| MatrixError::BadHeader(format!("`{header}` overflows")))?;
        if payload.len() < expected {
            return Err(MatrixError::Truncated {
                expected,
                actual: payload.len(),
            });
        }
        if payload.len() > expected {
            return Err(MatrixError::Trailing(payload.len() - expected));
        }
        let data = payload
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
            .collect();
        Self::new(rows, cols, data)
    }
}

pub fn read_vmat(path: &Path) -> Result<Matrix, MatrixError> {
    let bytes = std::fs::read(path).map_err(|source| MatrixError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Matrix::from_bytes(&bytes)
}

pub fn write_vmat(m: &Matrix, path: &Path) -> Result<(), MatrixError> {
    let io = |source| MatrixError::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut f = std::fs::File::create(path).map_err(io)?;
    f.write_all(&m.to_bytes()).map_err(io)
}

/// One token per line, line `i` naming embedding row `i`. A final newline
/// is optional; `\r\n` endings are accepted.
pub fn parse_vocab(text: &str) -> Vec<String> {
    if text.is_empty() {
        return Vec::new();
    }
    let body = text.strip_suffix('\n').unwrap_or(text);
    body.split('\n')
        .map(|l| l.strip_suffix('\r').unwrap_or(l).to_string())
        .collect()
}

pub fn read_vocab(path: &Path) -> Result<Vec<String>, MatrixError> {
    let text = std::fs::read_to_string(path).map_err(|source| MatrixError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(parse_vocab(&text))
}

pub fn check_vocab(vocab: &[String], embeddings: &Matrix) -> Result<(), MatrixError> {
    if vocab.len() != embeddings.rows() {
        return Err(MatrixError::VocabRows {
            vocab: vocab.len(),
            rows: embeddings.rows(),
        });
    }
    Ok(())
}

/// Provenance written next to each exported matrix as `<file>.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sidecar {
    pub model: String,
    /// `vision-encoder-output`, `post-projector`, `token-embeddings` or `caption-embeddings`.
    pub capture_point: String,
    /// Hooked module name inside the model.
    pub layer: String,
    pub rows: usize,
    pub cols: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
}

pub const CAPTURE_POINTS: [&str; 4] = [
    "vision-encoder-output",
    "post-projector",
    "token-embeddings",
    "caption-embeddings",
];

impl Sidecar {
    pub fn path_for(vmat: &Path) -> PathBuf {
        let mut name = vmat.as_os_str().to_owned();
        name.push(".json");
        PathBuf::from(name)
    }

    pub fn check(&self, m: &Matrix) -> Result<(), MatrixError> {
        if !CAPTURE_POINTS.contains(&self.capture_point.as_str()) {
            return Err(MatrixError::Sidecar(format!(
                "unknown capture point `{}`",
                self.capture_point
            )));
        }
        if (self.rows, self.cols) != (m.rows(), m.cols()) {
            return Err(MatrixError::Sidecar(format!(
                "declares {}x{}, matrix is {}x{}",
                self.rows,
                self.cols,
                m.rows(),
                m.cols()
            )));
        }
        Ok(())
    }
}

pub fn read_sidecar(path: &Path) -> Result<Sidecar, MatrixError> {
    let text = std::fs::read_to_string(path).map_err(|source| MatrixError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|e| MatrixError::Sidecar(format!("{}: {e}", path.display())))
}

pub fn write_sidecar(s: &Sidecar, path: &Path) -> Result<(), MatrixError> {
    let text = serde_json::to_string_pretty(s).expect("sidecar serializes") + "\n";
    std::fs::write(path, text).map_err(|source| MatrixError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Reads a matrix and, when present, validates its sidecar against it.
pub fn read_vmat_checked(path: &Path) -> Result<(Matrix, Option<Sidecar>), MatrixError> {
    let m = read_vmat(path)?;
    let sidecar_path = Sidecar::path_for(path);
    let sidecar = if sidecar_path.exists() {
        let s = read_sidecar(&sidecar_path)?;
        s.check(&m)?;
        Some(s)
    } else {
        None
    };
    Ok((m, sidecar))
}
