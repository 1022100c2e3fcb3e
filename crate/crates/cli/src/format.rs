//! Ensemble files.
//!
//! Binary layout (all integers little-endian):
//!
//! ```text
//! "QMIX" | version: u8 | dim: u64 | degree: u64 | label_len: u64 | label: UTF-8
//! | degree * dim * dim entries of (re: f64, im: f64), row-major, in ensemble order
//! ```
//!
//! The text encoding is a JSON document with keys `version`, `dim`,
//! `degree`, `label` and `unitaries` (matrices as nested rows of `[re, im]`).

use std::fs;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use qexpander::{Complex64, ComplexMatrix, MixedUnitaryEnsemble};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const MAGIC: &[u8; 4] = b"QMIX";
pub const FORMAT_VERSION: u8 = 1;

const HEADER_LEN: usize = 4 + 1 + 8 + 8 + 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Encoding {
    Text,
    Binary,
}

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: not an ensemble file (bad magic bytes)")]
    BadMagic { path: PathBuf },
    #[error("{path}: unsupported format version {version} (expected {FORMAT_VERSION})")]
    UnsupportedVersion { path: PathBuf, version: u64 },
    #[error("{path}: {detail}")]
    Malformed { path: PathBuf, detail: String },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("{path}: {source}")]
    Invalid {
        path: PathBuf,
        #[source]
        source: qexpander::Error,
    },
}

/// A decoded file whose matrices have not been checked for unitarity yet.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleFile {
    pub format_version: u8,
    pub dim: usize,
    pub degree: usize,
    pub label: String,
    pub encoding: Encoding,
    pub payload: Vec<ComplexMatrix>,
}

impl EnsembleFile {
    pub fn from_ensemble(g: &MixedUnitaryEnsemble, encoding: Encoding) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            dim: g.dim(),
            degree: g.degree(),
            label: g.label().to_owned(),
            encoding,
            payload: g.unitaries().iter().map(|u| u.as_matrix().clone()).collect(),
        }
    }

    /// Validates every matrix; the error names the offending index.
    pub fn into_ensemble(self) -> qexpander::Result<MixedUnitaryEnsemble> {
        MixedUnitaryEnsemble::from_matrices(self.payload, self.label)
    }

    pub fn encode(&self) -> Vec<u8> {
        match self.encoding {
            Encoding::Binary => self.encode_binary(),
            Encoding::Text => self.encode_text().into_bytes(),
        }
    }

    fn encode_binary(&self) -> Vec<u8> {
        let entries = self.degree * self.dim * self.dim;
        let mut out = Vec::with_capacity(HEADER_LEN + self.label.len() + 16 * entries);
        out.extend_from_slice(MAGIC);
        out.push(self.format_version);
        out.extend_from_slice(&(self.dim as u64).to_le_bytes());
        out.extend_from_slice(&(self.degree as u64).to_le_bytes());
        out.extend_from_slice(&(self.label.len() as u64).to_le_bytes());
        out.extend_from_slice(self.label.as_bytes());
        for m in &self.payload {
            for z in m.as_slice() {
                out.extend_from_slice(&z.re.to_le_bytes());
                out.extend_from_slice(&z.im.to_le_bytes());
            }
        }
        out
    }

    fn encode_text(&self) -> String {
        let doc = TextDocument {
            version: self.format_version,
            dim: self.dim,
            degree: self.degree,
            label: self.label.clone(),
            unitaries: self
                .payload
                .iter()
                .map(|m| {
                    (0..m.rows())
                        .map(|r| (0..m.cols()).map(|c| [m[(r, c)].re, m[(r, c)].im]).collect())
                        .collect()
                })
                .collect(),
        };
        let mut s = serde_json::to_string_pretty(&doc).expect("ensemble serializes");
        s.push('\n');
        s
    }

    /// Decodes either encoding: binary files start with `QMIX`, text files
    /// with `{`.
    pub fn decode(bytes: &[u8], path: &Path) -> Result<Self, FormatError> {
        if bytes.starts_with(MAGIC) {
            return Self::decode_binary(bytes, path);
        }
        let first = bytes.iter().find(|b| !b.is_ascii_whitespace());
        if first == Some(&b'{') {
            return Self::decode_text(bytes, path);
        }
        Err(FormatError::BadMagic { path: path.to_owned() })
    }

    fn decode_binary(bytes: &[u8], path: &Path) -> Result<Self, FormatError> {
        let malformed = |detail: String| FormatError::Malformed {
            path: path.to_owned(),
            detail,
        };
        if bytes.len() < HEADER_LEN {
            return Err(malformed(format!("truncated header ({} bytes)", bytes.len())));
        }
        let version = bytes[4];
        if version != FORMAT_VERSION {
            return Err(FormatError::UnsupportedVersion {
                path: path.to_owned(),
                version: version.into(),
            });
        }
        let word = |at: usize| u64::from_le_bytes(bytes[at..at + 8].try_into().expect("8 bytes"));
        let (dim, degree, label_len) = (word(5), word(13), word(21));
        let too_big = || {
            malformed(format!(
                "implausible header: dim {dim}, degree {degree}, label {label_len} bytes"
            ))
        };
        let dim = usize::try_from(dim).map_err(|_| too_big())?;
        let degree = usize::try_from(degree).map_err(|_| too_big())?;
        let label_len = usize::try_from(label_len).map_err(|_| too_big())?;
        let entries = dim
            .checked_mul(dim)
            .and_then(|x| x.checked_mul(degree))
            .ok_or_else(too_big)?;
        let expected = entries
            .checked_mul(16)
            .and_then(|x| x.checked_add(HEADER_LEN + label_len))
            .ok_or_else(too_big)?;
        if bytes.len() != expected {
            return Err(malformed(format!(
                "expected {expected} bytes for dim {dim}, degree {degree}, found {}",
                bytes.len()
            )));
        }
        if dim == 0 || degree == 0 {
            return Err(malformed("dim and degree must be positive".into()));
        }
        let label = std::str::from_utf8(&bytes[HEADER_LEN..HEADER_LEN + label_len])
            .map_err(|e| malformed(format!("label is not UTF-8: {e}")))?
            .to_owned();
        let float = |at: usize| f64::from_le_bytes(bytes[at..at + 8].try_into().expect("8 bytes"));
        let mut offset = HEADER_LEN + label_len;
        let mut payload = Vec::with_capacity(degree);
        for _ in 0..degree {
            let mut data = Vec::with_capacity(dim * dim);
            for _ in 0..dim * dim {
                data.push(Complex64::new(float(offset), float(offset + 8)));
                offset += 16;
            }
            payload.push(
                ComplexMatrix::new(dim, dim, data).map_err(|source| FormatError::Invalid {
                    path: path.to_owned(),
                    source,
                })?,
            );
        }
        Ok(Self {
            format_version: version,
            dim,
            degree,
            label,
            encoding: Encoding::Binary,
            payload,
        })
    }

    fn decode_text(bytes: &[u8], path: &Path) -> Result<Self, FormatError> {
        let doc: TextDocument = serde_json::from_slice(bytes).map_err(|source| FormatError::Json {
            path: path.to_owned(),
            source,
        })?;
        if u64::from(doc.version) != u64::from(FORMAT_VERSION) {
            return Err(FormatError::UnsupportedVersion {
                path: path.to_owned(),
                version: doc.version.into(),
            });
        }
        let malformed = |detail: String| FormatError::Malformed {
            path: path.to_owned(),
            detail,
        };
        if doc.unitaries.len() != doc.degree {
            return Err(malformed(format!(
                "degree is {} but {} unitaries are listed",
                doc.degree,
                doc.unitaries.len()
            )));
        }
        let mut payload = Vec::with_capacity(doc.degree);
        for (index, rows) in doc.unitaries.iter().enumerate() {
            if rows.len() != doc.dim || rows.iter().any(|r| r.len() != doc.dim) {
                return Err(malformed(format!("unitary {index} is not {0}x{0}", doc.dim)));
            }
            let data = rows.iter().flatten().map(|&[re, im]| Complex64::new(re, im)).collect();
            payload.push(
                ComplexMatrix::new(doc.dim, doc.dim, data).map_err(|source| FormatError::Invalid {
                    path: path.to_owned(),
                    source,
                })?,
            );
        }
        Ok(Self {
            format_version: doc.version,
            dim: doc.dim,
            degree: doc.degree,
            label: doc.label,
            encoding: Encoding::Text,
            payload,
        })
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct TextDocument {
    version: u8,
    dim: usize,
    degree: usize,
    label: String,
    unitaries: Vec<Vec<Vec<[f64; 2]>>>,
}

pub fn read_file(path: &Path) -> Result<EnsembleFile, FormatError> {
    let bytes = fs::read(path).map_err(|source| FormatError::Io {
        path: path.to_owned(),
        source,
    })?;
    EnsembleFile::decode(&bytes, path)
}

/// Reads and validates an ensemble; non-unitary entries are rejected with the
/// matrix index.
pub fn read_ensemble(path: &Path) -> Result<MixedUnitaryEnsemble, FormatError> {
    read_file(path)?.into_ensemble().map_err(|source| FormatError::Invalid {
        path: path.to_owned(),
        source,
    })
}

pub fn write_ensemble(g: &MixedUnitaryEnsemble, path: &Path, encoding: Encoding) -> Result<(), FormatError> {
    fs::write(path, EnsembleFile::from_ensemble(g, encoding).encode()).map_err(|source| FormatError::Io {
        path: path.to_owned(),
        source,
    })
}
