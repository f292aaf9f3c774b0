use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::Normal;
use sha2::{Digest, Sha256};

use super::{HmnError, HmnParams};

/// Gaussian RBF activations at `k` uniform centers on `[0, 1]` followed by
/// `v, v^2, ..., v^degree`.
pub fn numeric_features(v: f64, params: &HmnParams) -> Vec<f64> {
    let k = params.k;
    let spacing = if k > 1 { 1.0 / (k - 1) as f64 } else { 1.0 };
    let sigma = params.rbf_width * spacing;
    let mut out = Vec::with_capacity(params.feature_len());
    for i in 0..k {
        let c = if k > 1 { i as f64 * spacing } else { 0.5 };
        out.push((-(v - c).powi(2) / (2.0 * sigma * sigma)).exp());
    }
    let mut p = 1.0;
    for _ in 0..params.poly_degree {
        p *= v;
        out.push(p);
    }
    out
}

/// Feature map plus the fixed projection to the embedding dimension.
#[derive(Debug, Clone)]
pub struct NumericEncoder {
    params: HmnParams,
    dim: usize,
    /// `feature_len x dim`, row-major.
    proj: Vec<f64>,
}

impl NumericEncoder {
    /// Draws the projection from ChaCha20 seeded with
    /// `SHA-256("projection" || seed || feature_len || dim)` (integers as u64
    /// LE), entries `N(0, 1 / feature_len)`. When `dim >= feature_len` the
    /// rows are then orthonormalized (Gram-Schmidt in draw order), which makes
    /// the projection an isometry on feature space.
    pub fn new(params: &HmnParams, dim: usize) -> Result<Self, HmnError> {
        params.validate()?;
        if dim == 0 {
            return Err(HmnError::InvalidParams("embedding dimension must be at least 1".into()));
        }
        let f = params.feature_len();
        let mut h = Sha256::new();
        h.update(b"projection");
        h.update(params.seed.to_le_bytes());
        h.update((f as u64).to_le_bytes());
        h.update((dim as u64).to_le_bytes());
        let mut rng = ChaCha20Rng::from_seed(h.finalize().into());
        let normal = Normal::new(0.0, 1.0 / (f as f64).sqrt()).expect("positive std");
        let mut proj: Vec<f64> = (0..f * dim).map(|_| rng.sample(normal)).collect();
        if dim >= f {
            orthonormalize(&mut proj, f, dim);
        }
        Ok(Self { params: *params, dim, proj })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Projects a feature vector (no normalization).
    pub fn project(&self, features: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for (i, &x) in features.iter().enumerate() {
            let row = &self.proj[i * self.dim..(i + 1) * self.dim];
            out.iter_mut().zip(row).for_each(|(o, r)| *o += x * r);
        }
        out
    }

    pub fn direction(&self, v: f64) -> Result<Vec<f64>, HmnError> {
        if !(0.0..=1.0).contains(&v) {
            return Err(HmnError::DomainError(v));
        }
        let mut out = self.project(&numeric_features(v, &self.params));
        let norm = out.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            out.iter_mut().for_each(|x| *x /= norm);
        }
        Ok(out)
    }
}

fn orthonormalize(m: &mut [f64], rows: usize, cols: usize) {
    for i in 0..rows {
        for j in 0..i {
            let (done, rest) = m.split_at_mut(i * cols);
            let prev = &done[j * cols..(j + 1) * cols];
            let cur = &mut rest[..cols];
            let dot: f64 = prev.iter().zip(cur.iter()).map(|(a, b)| a * b).sum();
            cur.iter_mut().zip(prev).for_each(|(c, p)| *c -= dot * p);
        }
        let row = &mut m[i * cols..(i + 1) * cols];
        let norm = row.iter().map(|x| x * x).sum::<f64>().sqrt();
        row.iter_mut().for_each(|x| *x /= norm);
    }
}

/// Unit direction for one value; builds the projection on every call, so
/// prefer [`NumericEncoder`] in loops.
pub fn numeric_direction(v: f64, params: &HmnParams, dim: usize) -> Result<Vec<f64>, HmnError> {
    NumericEncoder::new(params, dim)?.direction(v)
}
