use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::geometry::Point;
use crate::losses::LossSample;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: expected {expected} fields, found {found}")]
    Ragged { line: usize, expected: usize, found: usize },
    #[error("empty dataset")]
    Empty,
    #[error("sample {index} has dimension {found}, expected {expected}")]
    DimensionMismatch { index: usize, expected: usize, found: usize },
}

/// An ordered, non-empty list of samples sharing one feature dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    samples: Vec<LossSample>,
    dim: usize,
}

impl Dataset {
    pub fn new(samples: Vec<LossSample>) -> Result<Self, DataError> {
        let dim = samples.first().ok_or(DataError::Empty)?.z.len();
        if let Some((index, s)) = samples.iter().enumerate().find(|(_, s)| s.z.len() != dim) {
            return Err(DataError::DimensionMismatch {
                index,
                expected: dim,
                found: s.z.len(),
            });
        }
        Ok(Self { samples, dim })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn samples(&self) -> &[LossSample] {
        &self.samples
    }

    pub fn sample(&self, i: usize) -> &LossSample {
        &self.samples[i]
    }

    /// Zero-pads every feature vector to `dim` columns.
    pub fn padded_to(mut self, dim: usize) -> Result<Self, DataError> {
        if dim < self.dim {
            return Err(DataError::DimensionMismatch {
                index: 0,
                expected: dim,
                found: self.dim,
            });
        }
        for s in &mut self.samples {
            s.z = s.z.clone().resize_vertically(dim, 0.0);
        }
        self.dim = dim;
        Ok(self)
    }
}

fn read(path: &Path) -> Result<String, DataError> {
    fs::read_to_string(path).map_err(|e| DataError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

pub fn parse_libsvm(path: impl AsRef<Path>) -> Result<Dataset, DataError> {
    parse_libsvm_str(&read(path.as_ref())?)
}

/// Parses `label idx:val idx:val …` lines with 1-based indices. Blank lines
/// and `#` comments are skipped. Vectors are as wide as the largest index.
pub fn parse_libsvm_str(text: &str) -> Result<Dataset, DataError> {
    let mut rows: Vec<(f64, Vec<(usize, f64)>)> = Vec::new();
    let mut width = 0;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut tokens = line.split_whitespace();
        let label_tok = tokens.next().expect("non-empty line has a token");
        let label = parse_real(label_tok, line_no)?;
        let mut entries = Vec::new();
        for tok in tokens {
            let (idx, val) = tok.split_once(':').ok_or_else(|| DataError::Parse {
                line: line_no,
                message: format!("expected index:value, found {tok:?}"),
            })?;
            let idx: i64 = idx.parse().map_err(|_| DataError::Parse {
                line: line_no,
                message: format!("non-numeric index {idx:?}"),
            })?;
            if idx <= 0 {
                return Err(DataError::Parse {
                    line: line_no,
                    message: format!("index must be at least 1, found {idx}"),
                });
            }
            let idx = idx as usize;
            width = width.max(idx);
            entries.push((idx - 1, parse_real(val, line_no)?));
        }
        rows.push((label, entries));
    }
    let samples = rows
        .into_iter()
        .map(|(label, entries)| {
            let mut z = Point::zeros(width);
            for (j, v) in entries {
                z[j] = v;
            }
            LossSample::new(z, label)
        })
        .collect();
    Dataset::new(samples)
}

fn parse_real(tok: &str, line: usize) -> Result<f64, DataError> {
    let v: f64 = tok.parse().map_err(|_| DataError::Parse {
        line,
        message: format!("non-numeric token {tok:?}"),
    })?;
    if !v.is_finite() {
        return Err(DataError::Parse {
            line,
            message: format!("non-finite value {tok:?}"),
        });
    }
    Ok(v)
}

/// Sparse libSVM text; zero entries are omitted and values are written in
/// shortest round-trip form.
pub fn to_libsvm_string(data: &Dataset) -> String {
    let mut out = String::new();
    for s in data.samples() {
        write!(out, "{}", s.label).unwrap();
        for (j, v) in s.z.iter().enumerate() {
            if *v != 0.0 {
                write!(out, " {}:{}", j + 1, v).unwrap();
            }
        }
        out.push('\n');
    }
    out
}

pub fn write_libsvm(data: &Dataset, path: impl AsRef<Path>) -> std::io::Result<()> {
    fs::write(path, to_libsvm_string(data))
}

/// Reads a header of asset names followed by one row of per-asset returns
/// per period. Labels are set to zero.
pub fn parse_returns_csv(path: impl AsRef<Path>) -> Result<Dataset, DataError> {
    parse_returns_str(&read(path.as_ref())?)
}

pub fn parse_returns_str(text: &str) -> Result<Dataset, DataError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let width = reader
        .headers()
        .map_err(|e| DataError::Parse {
            line: 1,
            message: e.to_string(),
        })?
        .len();
    let mut samples = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let line = i + 2;
        let record = record.map_err(|e| match e.kind() {
            csv::ErrorKind::UnequalLengths { expected_len, len, .. } => DataError::Ragged {
                line,
                expected: *expected_len as usize,
                found: *len as usize,
            },
            _ => DataError::Parse {
                line,
                message: e.to_string(),
            },
        })?;
        let values = record.iter().map(|cell| parse_real(cell, line)).collect::<Result<Vec<_>, _>>()?;
        if values.len() != width {
            return Err(DataError::Ragged {
                line,
                expected: width,
                found: values.len(),
            });
        }
        samples.push(LossSample::new(Point::from_vec(values), 0.0));
    }
    Dataset::new(samples)
}

pub fn write_returns_csv(data: &Dataset, path: impl AsRef<Path>) -> Result<(), csv::Error> {
    let mut writer = csv::Writer::from_path(path)?;
    writer.write_record((1..=data.dim()).map(|j| format!("asset{j}")))?;
    for s in data.samples() {
        writer.write_record(s.z.iter().map(|v| v.to_string()))?;
    }
    writer.flush()?;
    Ok(())
}
