use std::collections::BTreeMap;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::atomic::{AtomicToken, AtomicVocab, FlagKind};
use crate::ir::CommandKind;
use crate::segment::SegmentVocab;

/// Inputs for initializing one new token.
#[derive(Debug, Clone, PartialEq)]
pub struct TokenMeta {
    pub token: String,
    /// Human-readable description the base ids were derived from.
    pub gloss: String,
    /// Base-vocabulary ids averaged for the semantic branch.
    pub description: Vec<u32>,
    /// Normalized coordinate value in `[0, 1]`; coordinate tokens only.
    pub numeric_value: Option<f64>,
}

/// `P_v -> v / (c + tol)`, `d_v -> (v + c + tol) / (2 (c + tol))`; `None`
/// for non-coordinate tokens.
pub fn normalized_value(tok: AtomicToken, vocab: &AtomicVocab) -> Option<f64> {
    let m = vocab.max_coord() as f64;
    match tok {
        AtomicToken::Abs(v) => Some(v as f64 / m),
        AtomicToken::Rel(v) => Some((v as f64 + m) / (2.0 * m)),
        _ => None,
    }
}

fn command_gloss(kind: CommandKind, relative: bool) -> String {
    let name = match kind {
        CommandKind::MoveTo => "move to",
        CommandKind::LineTo => "line to",
        CommandKind::HorizontalTo => "horizontal line to",
        CommandKind::VerticalTo => "vertical line to",
        CommandKind::CubicTo => "cubic curve to",
        CommandKind::SmoothCubicTo => "smooth cubic curve to",
        CommandKind::QuadTo => "quadratic curve to",
        CommandKind::SmoothQuadTo => "smooth quadratic curve to",
        CommandKind::ArcTo => "arc to",
        CommandKind::Close => "close path",
    };
    format!("{name} {}", if relative { "relative" } else { "absolute" })
}

/// Built-in English description of an atomic token.
pub fn default_gloss(tok: AtomicToken, vocab: &AtomicVocab) -> String {
    match tok {
        AtomicToken::Open(i) => format!("start {} element", vocab.elements()[i]),
        AtomicToken::Close(i) => format!("end {} element", vocab.elements()[i]),
        AtomicToken::Cmd { kind, relative } => command_gloss(kind, relative),
        AtomicToken::Flag { kind, value } => {
            let k = match kind {
                FlagKind::Large => "large arc",
                FlagKind::Sweep => "sweep",
            };
            format!("{k} flag {}", u8::from(value))
        }
        AtomicToken::Abs(v) => format!("absolute position {v}"),
        AtomicToken::Rel(v) => format!("relative offset {v}"),
    }
}

/// Stand-in for the host tokenizer: each whitespace-separated, lowercased
/// word maps to `SHA-256(word)[..8] as u64 LE mod rows`.
pub fn description_ids(gloss: &str, rows: usize) -> Vec<u32> {
    gloss
        .split_whitespace()
        .map(|w| {
            let h = Sha256::digest(w.to_lowercase().as_bytes());
            let x = u64::from_le_bytes(h[..8].try_into().expect("8 bytes"));
            (x % rows as u64) as u32
        })
        .collect()
}

/// Token string to base-vocabulary id list, overriding the hashed glosses.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DescriptionManifest(pub BTreeMap<String, Vec<u32>>);

impl DescriptionManifest {
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text).map(Self)
    }

    pub fn load(path: &Path) -> std::io::Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text).map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))
    }

    fn ids(&self, token: &str, gloss: &str, rows: usize) -> Vec<u32> {
        self.0.get(token).cloned().unwrap_or_else(|| description_ids(gloss, rows))
    }
}

/// One meta per atomic token, in id order.
pub fn atomic_metas(vocab: &AtomicVocab, base_rows: usize, manifest: &DescriptionManifest) -> Vec<TokenMeta> {
    (0..vocab.len() as u32)
        .map(|id| {
            let tok = vocab.decode_id(id).expect("id in range");
            let token = vocab.token(id).expect("id in range").to_string();
            let gloss = default_gloss(tok, vocab);
            TokenMeta {
                description: manifest.ids(&token, &gloss, base_rows),
                numeric_value: normalized_value(tok, vocab),
                token,
                gloss,
            }
        })
        .collect()
}

/// One meta per composite, in composite order. The gloss joins the command
/// glosses of the expansion; composites carry no numeric value.
pub fn segment_metas(
    sv: &SegmentVocab,
    atomic: &AtomicVocab,
    base_rows: usize,
    manifest: &DescriptionManifest,
) -> Vec<TokenMeta> {
    sv.expansions()
        .iter()
        .enumerate()
        .map(|(k, segs)| {
            let token = SegmentVocab::composite_token(k as u32);
            let gloss = segs
                .iter()
                .filter_map(|s| atomic.decode_id(s.cmd))
                .map(|t| default_gloss(t, atomic))
                .collect::<Vec<_>>()
                .join(" ");
            TokenMeta { description: manifest.ids(&token, &gloss, base_rows), numeric_value: None, token, gloss }
        })
        .collect()
}
