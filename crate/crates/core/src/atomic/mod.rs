//! Atomic tokens: a closed vocabulary over structure tags, path commands,
//! quantized coordinates and arc flags, plus literal spans for attributes.

mod codec;
mod count;
mod format;
mod vocab;

use serde::{Deserialize, Serialize};

pub use codec::{decode_atomic, encode_atomic, escape_literal, literal, split_literal, unescape_literal};
pub use count::{count_commands, count_paths, count_tokens, count_tokens_with, LitMode};
pub use format::{from_ids, from_text, from_text_with, read_id_batches, to_ids, to_text, to_text_with, write_id_batches};
pub use vocab::{AtomicToken, AtomicVocab, FlagKind, TokenCategory, VocabFileError};

/// One element of a token sequence: a vocabulary id or a literal span.
///
/// Literal spans carry one attribute each as `name=value` with the value
/// escaped (see [`escape_literal`]); element text uses the name `#text`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TokenItem {
    Tok(u32),
    Lit(String),
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TokenSeq {
    pub items: Vec<TokenItem>,
}

impl TokenSeq {
    pub fn new(items: Vec<TokenItem>) -> Self {
        Self { items }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Token ids only, in order.
    pub fn ids(&self) -> impl Iterator<Item = u32> + '_ {
        self.items.iter().filter_map(|i| match i {
            TokenItem::Tok(t) => Some(*t),
            TokenItem::Lit(_) => None,
        })
    }
}

impl From<Vec<TokenItem>> for TokenSeq {
    fn from(items: Vec<TokenItem>) -> Self {
        Self { items }
    }
}

/// Text key under which element text content travels.
pub const TEXT_KEY: &str = "#text";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AtomicError {
    #[error("coordinate out of range: {0}")]
    OutOfRange(String),
    #[error("unsupported tag <{0}>")]
    UnsupportedTag(String),
    #[error("arity violation: {0}")]
    ArityViolation(String),
    #[error("unbalanced structure: {0}")]
    UnbalancedStructure(String),
    #[error("unknown token {0}")]
    UnknownToken(String),
    #[error("malformed literal span: {0}")]
    MalformedLiteral(String),
}

impl AtomicError {
    pub fn name(&self) -> &'static str {
        match self {
            AtomicError::OutOfRange(_) => "OutOfRange",
            AtomicError::UnsupportedTag(_) => "UnsupportedTag",
            AtomicError::ArityViolation(_) => "ArityViolation",
            AtomicError::UnbalancedStructure(_) => "UnbalancedStructure",
            AtomicError::UnknownToken(_) => "UnknownToken",
            AtomicError::MalformedLiteral(_) => "MalformedLiteral",
        }
    }
}
