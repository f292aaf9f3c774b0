use std::path::Path;

use serde::{Deserialize, Serialize};

use super::HmnParams;

const MAGIC: &str = "svgtok-emb/1";

/// Dense row-major `f32` matrix.
///
/// Binary file layout: one ASCII header line `svgtok-emb/1 <rows> <cols> f32le\n`
/// followed by `rows * cols` little-endian `f32` values. The structured-text
/// alternative is a JSON object `{"rows", "cols", "data": [[...], ...]}`; a
/// file starting with `{` is read as JSON.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    rows: usize,
    cols: usize,
    data: Vec<f32>,
}

#[derive(Debug, thiserror::Error)]
pub enum TableFileError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("bad table header: {0}")]
    BadHeader(String),
    #[error("table body has {got} bytes, expected {expected}")]
    Truncated { expected: usize, got: usize },
    #[error("bad table shape: {0}")]
    Shape(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Serialize, Deserialize)]
struct JsonTable {
    rows: usize,
    cols: usize,
    data: Vec<Vec<f32>>,
}

impl EmbeddingTable {
    pub fn new(rows: usize, cols: usize, data: Vec<f32>) -> Result<Self, TableFileError> {
        if rows == 0 || cols == 0 {
            return Err(TableFileError::Shape(format!("{rows} x {cols}: both sides must be at least 1")));
        }
        if data.len() != rows * cols {
            return Err(TableFileError::Shape(format!("{} values for {rows} x {cols}", data.len())));
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(TableFileError::Shape("non-finite value".into()));
        }
        Ok(Self { rows, cols, data })
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

    pub fn row(&self, i: usize) -> Option<&[f32]> {
        (i < self.rows).then(|| &self.data[i * self.cols..(i + 1) * self.cols])
    }

    /// Column means, accumulated in `f64`.
    pub fn mean(&self) -> Vec<f64> {
        let mut acc = vec![0.0; self.cols];
        for r in self.data.chunks_exact(self.cols) {
            acc.iter_mut().zip(r).for_each(|(a, &x)| *a += x as f64);
        }
        acc.iter_mut().for_each(|a| *a /= self.rows as f64);
        acc
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = format!("{MAGIC} {} {} f32le\n", self.rows, self.cols).into_bytes();
        out.reserve(self.data.len() * 4);
        for x in &self.data {
            out.extend_from_slice(&x.to_le_bytes());
        }
        out
    }

    pub fn to_json(&self) -> String {
        let t = JsonTable { rows: self.rows, cols: self.cols, data: self.data.chunks(self.cols).map(<[f32]>::to_vec).collect() };
        serde_json::to_string(&t).expect("table serializes")
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, TableFileError> {
        if bytes.first() == Some(&b'{') {
            let t: JsonTable = serde_json::from_slice(bytes)?;
            if t.data.len() != t.rows || t.data.iter().any(|r| r.len() != t.cols) {
                return Err(TableFileError::Shape("row count or width does not match header".into()));
            }
            return Self::new(t.rows, t.cols, t.data.into_iter().flatten().collect());
        }
        let nl = bytes.iter().position(|&b| b == b'\n').ok_or_else(|| TableFileError::BadHeader("no header line".into()))?;
        let header = std::str::from_utf8(&bytes[..nl]).map_err(|_| TableFileError::BadHeader("not ASCII".into()))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        let [magic, rows, cols, fmt] = fields[..] else {
            return Err(TableFileError::BadHeader(header.into()));
        };
        if magic != MAGIC || fmt != "f32le" {
            return Err(TableFileError::BadHeader(header.into()));
        }
        let parse = |s: &str| s.parse::<usize>().map_err(|_| TableFileError::BadHeader(header.into()));
        let (rows, cols) = (parse(rows)?, parse(cols)?);
        let body = &bytes[nl + 1..];
        let expected = rows.checked_mul(cols).and_then(|n| n.checked_mul(4)).ok_or_else(|| TableFileError::BadHeader(header.into()))?;
        if body.len() != expected {
            return Err(TableFileError::Truncated { expected, got: body.len() });
        }
        let data = body.chunks_exact(4).map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]])).collect();
        Self::new(rows, cols, data)
    }

    pub fn load(path: &Path) -> Result<Self, TableFileError> {
        Self::from_bytes(&std::fs::read(path)?)
    }
}

/// Sidecar written next to an initialized table: row `i` belongs to
/// `tokens[i]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitManifest {
    pub kind: String,
    pub seed: u64,
    pub params: HmnParams,
    pub base_rows: usize,
    pub dim: usize,
    pub tokens: Vec<String>,
}

impl InitManifest {
    pub const KIND: &'static str = "svgtok-hmn-init/1";

    pub fn new(params: HmnParams, base: &EmbeddingTable, tokens: Vec<String>) -> Self {
        Self { kind: Self::KIND.into(), seed: params.seed, params, base_rows: base.rows(), dim: base.cols(), tokens }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_and_json_round_trip() {
        let t = EmbeddingTable::new(2, 3, vec![1.0, -2.5, 0.125, 3.0, 4.0, 1e-7]).unwrap();
        let b = t.to_bytes();
        assert!(b.starts_with(b"svgtok-emb/1 2 3 f32le\n"));
        assert_eq!(EmbeddingTable::from_bytes(&b).unwrap(), t);
        assert_eq!(EmbeddingTable::from_bytes(t.to_json().as_bytes()).unwrap(), t);
        assert_eq!(t.mean(), vec![2.0, 0.75, (0.125f32 as f64 + 1e-7f32 as f64) / 2.0]);
    }

    #[test]
    fn rejects_damage() {
        let t = EmbeddingTable::new(2, 2, vec![0.0; 4]).unwrap();
        let b = t.to_bytes();
        assert!(matches!(EmbeddingTable::from_bytes(&b[..b.len() - 1]), Err(TableFileError::Truncated { .. })));
        assert!(matches!(EmbeddingTable::from_bytes(b"nope 1 1 f32le\n\0\0\0\0"), Err(TableFileError::BadHeader(_))));
        assert!(EmbeddingTable::new(0, 3, vec![]).is_err());
        assert!(EmbeddingTable::from_bytes(br#"{"rows":2,"cols":1,"data":[[1.0]]}"#).is_err());
    }
}
