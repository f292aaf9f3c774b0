//! Segment-level merging over atomic token sequences.
//!
//! A segment is one path command together with all of its parameter tokens.
//! Training counts adjacent segment pairs inside each path and repeatedly
//! merges the most frequent one into a composite token; encoding applies the
//! learned merges in order.

mod clean;
mod stats;
mod train;
mod vocab;

use serde::{Deserialize, Serialize};

use crate::atomic::{AtomicError, AtomicToken, AtomicVocab, TokenItem, TokenSeq};

pub use clean::{clean_segments, Motif, NoiseReport};
pub use stats::{segment_stats, BucketStats, LengthSummary, SegmentStats};
pub use train::{train, TrainParams};
pub use vocab::{encode_segments, expand_segments, SegmentVocab, SegmentVocabFileError};

/// A command token and its parameter tokens (coordinates and arc flags).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Segment {
    pub cmd: u32,
    pub params: Vec<u32>,
}

impl Segment {
    /// Number of atomic tokens the segment occupies.
    pub fn atomic_len(&self) -> usize {
        1 + self.params.len()
    }

    pub fn push_atomic(&self, out: &mut Vec<TokenItem>) {
        out.push(TokenItem::Tok(self.cmd));
        out.extend(self.params.iter().map(|&p| TokenItem::Tok(p)));
    }

    pub fn to_text(&self, vocab: &AtomicVocab) -> String {
        std::iter::once(self.cmd)
            .chain(self.params.iter().copied())
            .map(|id| vocab.token(id).unwrap_or("<?>"))
            .collect()
    }
}

/// Merge symbol: a base segment or a previously learned composite.
///
/// The derived order (all base segments by command then parameter ids,
/// followed by composites by index) is the tie-break order for training.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Symbol {
    Base(Segment),
    Composite(u32),
}

/// Piece of an atomic sequence split at path-command boundaries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Part {
    /// Structure token or literal span, passed through unchanged.
    Item(TokenItem),
    /// Consecutive command segments of one path element.
    Path(Vec<Segment>),
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SegmentedSeq {
    pub parts: Vec<Part>,
}

impl SegmentedSeq {
    pub fn paths(&self) -> impl Iterator<Item = &Vec<Segment>> {
        self.parts.iter().filter_map(|p| match p {
            Part::Path(s) => Some(s),
            Part::Item(_) => None,
        })
    }

    pub fn to_atomic(&self) -> TokenSeq {
        let mut out = Vec::new();
        for p in &self.parts {
            match p {
                Part::Item(i) => out.push(i.clone()),
                Part::Path(segs) => segs.iter().for_each(|s| s.push_atomic(&mut out)),
            }
        }
        TokenSeq::new(out)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SegmentError {
    #[error(transparent)]
    Atomic(#[from] AtomicError),
    #[error("empty corpus")]
    EmptyCorpus,
    #[error("unknown composite token id {0}")]
    UnknownComposite(u32),
    #[error("invalid training parameters: {0}")]
    BadParams(String),
}

impl SegmentError {
    pub fn name(&self) -> &'static str {
        match self {
            SegmentError::Atomic(e) => e.name(),
            SegmentError::EmptyCorpus => "EmptyCorpus",
            SegmentError::UnknownComposite(_) => "UnknownComposite",
            SegmentError::BadParams(_) => "BadParams",
        }
    }
}

/// Splits an atomic sequence into pass-through items and per-path segment
/// lists. Paths never share a list, so no adjacency crosses an element
/// boundary.
pub fn extract_segments(seq: &TokenSeq, vocab: &AtomicVocab) -> Result<SegmentedSeq, SegmentError> {
    let mut parts = Vec::new();
    let mut run: Vec<Segment> = Vec::new();
    let items = &seq.items;
    let mut i = 0;
    while i < items.len() {
        let tok = match &items[i] {
            TokenItem::Tok(id) => vocab.decode_id(*id).map(|t| (*id, t)),
            TokenItem::Lit(_) => None,
        };
        match tok {
            Some((id, AtomicToken::Cmd { kind, .. })) => {
                let arity = kind.token_arity();
                let mut params = Vec::with_capacity(arity);
                for k in 1..=arity {
                    match items.get(i + k) {
                        Some(TokenItem::Tok(p))
                            if matches!(
                                vocab.decode_id(*p),
                                Some(AtomicToken::Abs(_) | AtomicToken::Rel(_) | AtomicToken::Flag { .. })
                            ) =>
                        {
                            params.push(*p)
                        }
                        _ => {
                            return Err(AtomicError::ArityViolation(format!(
                                "{} needs {arity} parameters",
                                vocab.token(id).unwrap_or_default()
                            ))
                            .into())
                        }
                    }
                }
                run.push(Segment { cmd: id, params });
                i += 1 + arity;
            }
            Some((id, AtomicToken::Abs(_) | AtomicToken::Rel(_) | AtomicToken::Flag { .. })) => {
                return Err(
                    AtomicError::ArityViolation(format!("{} without a command", vocab.token(id).unwrap_or_default())).into()
                );
            }
            _ => {
                if !run.is_empty() {
                    parts.push(Part::Path(std::mem::take(&mut run)));
                }
                parts.push(Part::Item(items[i].clone()));
                i += 1;
            }
        }
    }
    if !run.is_empty() {
        parts.push(Part::Path(run));
    }
    Ok(SegmentedSeq { parts })
}

/// Extracts, cleans and flattens one atomic sequence: the form every
/// sequence takes before training or segment encoding.
pub fn clean_sequence(seq: &TokenSeq, vocab: &AtomicVocab) -> Result<(TokenSeq, NoiseReport), SegmentError> {
    let (clean, report) = clean_segments(&extract_segments(seq, vocab)?, vocab);
    Ok((clean.to_atomic(), report))
}
