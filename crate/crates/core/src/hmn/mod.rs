//! Hierarchical mean-noise initialization for new token embeddings.
//!
//! Each new token `t` starts at
//!
//! ```text
//! e_t = lambda_mu * mu + lambda_n * eps_t + w_sem * phi(desc_t) + w_num * d_t
//! ```
//!
//! where `mu` is the mean base-vocabulary row, `eps_t` is standard normal
//! noise keyed by the token string, `phi` averages the base rows of the
//! token's description and `d_t` is a unit direction derived from the
//! token's coordinate value (coordinate tokens only).

mod meta;
mod numeric;
mod table;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use meta::{
    atomic_metas, default_gloss, description_ids, normalized_value, segment_metas, DescriptionManifest, TokenMeta,
};
pub use numeric::{numeric_direction, numeric_features, NumericEncoder};
pub use table::{EmbeddingTable, InitManifest, TableFileError};

/// Alias used for the input table of pretrained rows.
pub type BaseEmbeddingTable = EmbeddingTable;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HmnParams {
    pub lambda_mu: f64,
    pub lambda_n: f64,
    pub w_sem: f64,
    pub w_num: f64,
    /// Number of Gaussian RBF centers on `[0, 1]`.
    pub k: usize,
    pub poly_degree: usize,
    /// RBF width in units of center spacing; `1.0` means `1 / (k - 1)`.
    pub rbf_width: f64,
    pub seed: u64,
}

impl Default for HmnParams {
    fn default() -> Self {
        Self { lambda_mu: 0.8, lambda_n: 0.02, w_sem: 0.1, w_num: 0.08, k: 16, poly_degree: 3, rbf_width: 1.0, seed: 0 }
    }
}

impl HmnParams {
    pub fn validate(&self) -> Result<(), HmnError> {
        let w = [self.lambda_mu, self.lambda_n, self.w_sem, self.w_num];
        if w.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(HmnError::InvalidParams("weights must be finite and non-negative".into()));
        }
        if self.k < 1 {
            return Err(HmnError::InvalidParams("k must be at least 1".into()));
        }
        if !(self.rbf_width.is_finite() && self.rbf_width > 0.0) {
            return Err(HmnError::InvalidParams("rbf_width must be positive".into()));
        }
        Ok(())
    }

    /// Length of the feature vector before projection.
    pub fn feature_len(&self) -> usize {
        self.k + self.poly_degree
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum HmnError {
    #[error("numeric value {0} outside [0, 1]")]
    DomainError(f64),
    #[error("base id {id} out of range for a table with {rows} rows")]
    IdOutOfRange { id: u32, rows: usize },
    #[error("token {0:?} has an empty description")]
    EmptyDescription(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
}

impl HmnError {
    pub fn name(&self) -> &'static str {
        match self {
            HmnError::DomainError(_) => "DomainError",
            HmnError::IdOutOfRange { .. } => "IdOutOfRange",
            HmnError::EmptyDescription(_) => "EmptyDescription",
            HmnError::InvalidParams(_) => "InvalidParams",
        }
    }
}

/// Mean of the base rows named by `ids`.
pub fn semantic_embedding(ids: &[u32], base: &EmbeddingTable) -> Result<Vec<f64>, HmnError> {
    if ids.is_empty() {
        return Err(HmnError::EmptyDescription(String::new()));
    }
    let mut acc = vec![0.0; base.cols()];
    for &id in ids {
        let row = base.row(id as usize).ok_or(HmnError::IdOutOfRange { id, rows: base.rows() })?;
        acc.iter_mut().zip(row).for_each(|(a, &r)| *a += r as f64);
    }
    let n = ids.len() as f64;
    acc.iter_mut().for_each(|a| *a /= n);
    Ok(acc)
}

/// Standard normal noise vector keyed by `(seed, token)`.
///
/// The stream is ChaCha20 seeded with `SHA-256(seed as u64 LE || token)`,
/// so the draw for a token does not depend on which other tokens exist or
/// in what order they are initialized.
pub fn token_noise(seed: u64, token: &str, dim: usize) -> Vec<f64> {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(token.as_bytes());
    let mut rng = ChaCha20Rng::from_seed(h.finalize().into());
    (0..dim).map(|_| rng.sample(StandardNormal)).collect()
}

/// Initializer bound to one base table and parameter set.
#[derive(Debug, Clone)]
pub struct HmnInit<'a> {
    base: &'a EmbeddingTable,
    params: HmnParams,
    mean: Vec<f64>,
    numeric: NumericEncoder,
}

impl<'a> HmnInit<'a> {
    pub fn new(base: &'a EmbeddingTable, params: HmnParams) -> Result<Self, HmnError> {
        params.validate()?;
        Ok(Self { base, params, mean: base.mean(), numeric: NumericEncoder::new(&params, base.cols())? })
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn params(&self) -> &HmnParams {
        &self.params
    }

    pub fn token(&self, meta: &TokenMeta) -> Result<Vec<f64>, HmnError> {
        let p = &self.params;
        let phi = semantic_embedding(&meta.description, self.base).map_err(|e| match e {
            HmnError::EmptyDescription(_) => HmnError::EmptyDescription(meta.token.clone()),
            e => e,
        })?;
        let eps = token_noise(p.seed, &meta.token, self.base.cols());
        let mut e: Vec<f64> =
            (0..self.base.cols()).map(|i| p.lambda_mu * self.mean[i] + p.lambda_n * eps[i] + p.w_sem * phi[i]).collect();
        if let Some(v) = meta.numeric_value {
            let d = self.numeric.direction(v)?;
            e.iter_mut().zip(d).for_each(|(x, di)| *x += p.w_num * di);
        }
        Ok(e)
    }

    /// One row per meta, in input order. Rows are computed in parallel.
    pub fn vocab(&self, metas: &[TokenMeta]) -> Result<EmbeddingTable, HmnError> {
        let rows = metas.par_iter().map(|m| self.token(m)).collect::<Result<Vec<_>, _>>()?;
        let cols = self.base.cols();
        let data = rows.into_iter().flatten().map(|x| x as f32).collect();
        Ok(EmbeddingTable::new(metas.len(), cols, data).expect("rows have the table width"))
    }
}

pub fn init_token(meta: &TokenMeta, base: &EmbeddingTable, params: &HmnParams) -> Result<Vec<f64>, HmnError> {
    HmnInit::new(base, *params)?.token(meta)
}

pub fn init_vocab(metas: &[TokenMeta], base: &EmbeddingTable, params: &HmnParams) -> Result<EmbeddingTable, HmnError> {
    HmnInit::new(base, *params)?.vocab(metas)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> EmbeddingTable {
        EmbeddingTable::new(3, 4, vec![1., 0., 0., 2., 0., 1., 0., 2., 0., 0., 1., 2.]).unwrap()
    }

    fn meta(token: &str, ids: &[u32], v: Option<f64>) -> TokenMeta {
        TokenMeta { token: token.into(), gloss: String::new(), description: ids.to_vec(), numeric_value: v }
    }

    #[test]
    fn semantic_is_row_mean() {
        let b = base();
        assert_eq!(semantic_embedding(&[1], &b).unwrap(), [0., 1., 0., 2.]);
        assert_eq!(semantic_embedding(&[0, 1], &b).unwrap(), [0.5, 0.5, 0., 2.]);
        assert_eq!(semantic_embedding(&[], &b), Err(HmnError::EmptyDescription(String::new())));
        assert_eq!(semantic_embedding(&[3], &b), Err(HmnError::IdOutOfRange { id: 3, rows: 3 }));
    }

    #[test]
    fn mean_only() {
        let b = base();
        let p = HmnParams { lambda_n: 0.0, w_sem: 0.0, w_num: 0.0, ..Default::default() };
        let e = init_token(&meta("<d_3>", &[0], Some(0.4)), &b, &p).unwrap();
        let mu = b.mean();
        for (x, m) in e.iter().zip(&mu) {
            assert!((x - 0.8 * m).abs() < 1e-12);
        }
    }

    #[test]
    fn non_numeric_tokens_skip_the_numeric_branch() {
        let b = base();
        let p = HmnParams::default();
        let init = HmnInit::new(&b, p).unwrap();
        let m = meta("<path>", &[2], None);
        let e = init.token(&m).unwrap();
        let eps = token_noise(p.seed, "<path>", 4);
        let phi = semantic_embedding(&[2], &b).unwrap();
        for i in 0..4 {
            let rest = e[i] - p.lambda_mu * init.mean()[i] - p.lambda_n * eps[i] - p.w_sem * phi[i];
            assert!(rest.abs() < 1e-12);
        }
    }

    #[test]
    fn noise_is_keyed_by_token() {
        assert_eq!(token_noise(7, "<d_1>", 8), token_noise(7, "<d_1>", 8));
        assert_ne!(token_noise(7, "<d_1>", 8), token_noise(7, "<d_2>", 8));
        assert_ne!(token_noise(7, "<d_1>", 8), token_noise(8, "<d_1>", 8));
    }

    #[test]
    fn permuting_metas_permutes_rows() {
        let b = base();
        let p = HmnParams::default();
        let metas = vec![meta("a", &[0], Some(0.1)), meta("b", &[1], None), meta("c", &[2, 0], Some(0.9))];
        let rev: Vec<_> = metas.iter().rev().cloned().collect();
        let x = init_vocab(&metas, &b, &p).unwrap();
        let y = init_vocab(&rev, &b, &p).unwrap();
        for i in 0..3 {
            assert_eq!(x.row(i), y.row(2 - i));
        }
        let zero = HmnParams { lambda_mu: 0.0, lambda_n: 0.0, w_sem: 0.0, w_num: 0.0, ..p };
        assert!(init_vocab(&metas, &b, &zero).unwrap().data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn rejects_bad_params() {
        let b = base();
        let p = HmnParams { w_sem: -1.0, ..Default::default() };
        assert!(matches!(HmnInit::new(&b, p), Err(HmnError::InvalidParams(_))));
        let p = HmnParams { k: 0, ..Default::default() };
        assert!(matches!(HmnInit::new(&b, p), Err(HmnError::InvalidParams(_))));
    }
}
