use std::collections::HashMap;
use std::fmt;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::ir::{CommandKind, STRUCTURE_ELEMENTS};

use super::AtomicError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TokenCategory {
    Struct,
    Cmd,
    Flag,
    CoordAbs,
    CoordRel,
}

impl fmt::Display for TokenCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TokenCategory::Struct => "struct",
            TokenCategory::Cmd => "cmd",
            TokenCategory::Flag => "flag",
            TokenCategory::CoordAbs => "coord_abs",
            TokenCategory::CoordRel => "coord_rel",
        })
    }
}

/// Arc flag slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlagKind {
    Large,
    Sweep,
}

/// What a single atomic id stands for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AtomicToken {
    Open(usize),
    Close(usize),
    Cmd { kind: CommandKind, relative: bool },
    Flag { kind: FlagKind, value: bool },
    Abs(i64),
    Rel(i64),
}

/// Closed vocabulary of structure, command, arc-flag and coordinate tokens
/// for a given canvas and overflow tolerance.
///
/// Ids are laid out as: structure (open/close per element), commands
/// (absolute then relative per command), flags, `P_0..P_max`,
/// `d_-max..d_max`, where `max = canvas + tolerance`.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomicVocab {
    canvas: u32,
    tolerance: u32,
    elements: Vec<String>,
    tokens: Vec<String>,
    index: HashMap<String, u32>,
}

const N_CMD: usize = 20;
const N_FLAG: usize = 4;

impl AtomicVocab {
    /// Vocabulary over the default 21 structure elements.
    pub fn build(canvas: u32, tolerance: u32) -> Self {
        Self::with_elements(canvas, tolerance, STRUCTURE_ELEMENTS.iter().map(|s| s.to_string()).collect())
    }

    pub fn with_elements(canvas: u32, tolerance: u32, elements: Vec<String>) -> Self {
        let max = canvas as i64 + tolerance as i64;
        let mut tokens = Vec::with_capacity(elements.len() * 2 + N_CMD + N_FLAG + (3 * max + 2) as usize);
        for e in &elements {
            tokens.push(format!("<{e}>"));
            tokens.push(format!("</{e}>"));
        }
        for kind in CommandKind::ALL {
            let upper = kind.letter();
            tokens.push(format!("<cmd_{upper}>"));
            tokens.push(format!("<cmd_{}>", upper.to_ascii_lowercase()));
        }
        for name in ["large", "sweep"] {
            for v in 0..2 {
                tokens.push(format!("<{name}_{v}>"));
            }
        }
        for v in 0..=max {
            tokens.push(format!("<P_{v}>"));
        }
        for v in -max..=max {
            tokens.push(format!("<d_{v}>"));
        }
        let index = tokens.iter().enumerate().map(|(i, t)| (t.clone(), i as u32)).collect();
        Self { canvas, tolerance, elements, tokens, index }
    }

    pub fn canvas(&self) -> u32 {
        self.canvas
    }

    pub fn tolerance(&self) -> u32 {
        self.tolerance
    }

    /// Largest coordinate magnitude, `canvas + tolerance`.
    pub fn max_coord(&self) -> i64 {
        self.canvas as i64 + self.tolerance as i64
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn elements(&self) -> &[String] {
        &self.elements
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn token(&self, id: u32) -> Option<&str> {
        self.tokens.get(id as usize).map(String::as_str)
    }

    pub fn id(&self, token: &str) -> Option<u32> {
        self.index.get(token).copied()
    }

    fn cmd_base(&self) -> usize {
        self.elements.len() * 2
    }

    fn flag_base(&self) -> usize {
        self.cmd_base() + N_CMD
    }

    fn abs_base(&self) -> usize {
        self.flag_base() + N_FLAG
    }

    fn rel_base(&self) -> usize {
        self.abs_base() + self.max_coord() as usize + 1
    }

    pub fn category(&self, id: u32) -> Option<TokenCategory> {
        let i = id as usize;
        Some(if i < self.cmd_base() {
            TokenCategory::Struct
        } else if i < self.flag_base() {
            TokenCategory::Cmd
        } else if i < self.abs_base() {
            TokenCategory::Flag
        } else if i < self.rel_base() {
            TokenCategory::CoordAbs
        } else if i < self.len() {
            TokenCategory::CoordRel
        } else {
            return None;
        })
    }

    /// Id range `[start, end)` of a category.
    pub fn range(&self, cat: TokenCategory) -> std::ops::Range<u32> {
        let (a, b) = match cat {
            TokenCategory::Struct => (0, self.cmd_base()),
            TokenCategory::Cmd => (self.cmd_base(), self.flag_base()),
            TokenCategory::Flag => (self.flag_base(), self.abs_base()),
            TokenCategory::CoordAbs => (self.abs_base(), self.rel_base()),
            TokenCategory::CoordRel => (self.rel_base(), self.len()),
        };
        a as u32..b as u32
    }

    pub fn count(&self, cat: TokenCategory) -> usize {
        self.range(cat).len()
    }

    pub fn decode_id(&self, id: u32) -> Option<AtomicToken> {
        let i = id as usize;
        Some(match self.category(id)? {
            TokenCategory::Struct => {
                if i % 2 == 0 {
                    AtomicToken::Open(i / 2)
                } else {
                    AtomicToken::Close(i / 2)
                }
            }
            TokenCategory::Cmd => {
                let k = i - self.cmd_base();
                AtomicToken::Cmd { kind: CommandKind::ALL[k / 2], relative: k % 2 == 1 }
            }
            TokenCategory::Flag => {
                let k = i - self.flag_base();
                let kind = if k < 2 { FlagKind::Large } else { FlagKind::Sweep };
                AtomicToken::Flag { kind, value: k % 2 == 1 }
            }
            TokenCategory::CoordAbs => AtomicToken::Abs((i - self.abs_base()) as i64),
            TokenCategory::CoordRel => AtomicToken::Rel((i - self.rel_base()) as i64 - self.max_coord()),
        })
    }

    pub fn element_index(&self, tag: &str) -> Option<usize> {
        self.elements.iter().position(|e| e == tag)
    }

    pub fn open_id(&self, tag: &str) -> Result<u32, AtomicError> {
        self.element_index(tag)
            .map(|i| (2 * i) as u32)
            .ok_or_else(|| AtomicError::UnsupportedTag(tag.to_string()))
    }

    pub fn close_id(&self, tag: &str) -> Result<u32, AtomicError> {
        self.open_id(tag).map(|i| i + 1)
    }

    pub fn cmd_id(&self, kind: CommandKind, relative: bool) -> u32 {
        let k = CommandKind::ALL.iter().position(|c| *c == kind).expect("command in table");
        (self.cmd_base() + 2 * k + relative as usize) as u32
    }

    pub fn flag_id(&self, kind: FlagKind, value: bool) -> u32 {
        let k = match kind {
            FlagKind::Large => 0,
            FlagKind::Sweep => 2,
        };
        (self.flag_base() + k + value as usize) as u32
    }

    pub fn abs_id(&self, v: i64) -> Result<u32, AtomicError> {
        if (0..=self.max_coord()).contains(&v) {
            Ok((self.abs_base() as i64 + v) as u32)
        } else {
            Err(AtomicError::OutOfRange(format!("absolute coordinate {v} outside [0, {}]", self.max_coord())))
        }
    }

    pub fn rel_id(&self, v: i64) -> Result<u32, AtomicError> {
        let m = self.max_coord();
        if (-m..=m).contains(&v) {
            Ok((self.rel_base() as i64 + v + m) as u32)
        } else {
            Err(AtomicError::OutOfRange(format!("relative coordinate {v} outside [-{m}, {m}]")))
        }
    }

    /// Writes the vocabulary as JSON: canvas, tolerance, structure elements
    /// and every token with its id and category.
    pub fn to_json(&self) -> String {
        let file = VocabFile {
            kind: VOCAB_KIND.into(),
            canvas: self.canvas,
            tolerance: self.tolerance,
            elements: self.elements.clone(),
            tokens: self
                .tokens
                .iter()
                .enumerate()
                .map(|(i, t)| VocabEntry { id: i as u32, token: t.clone(), category: self.category(i as u32).unwrap() })
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("vocab serializes")
    }

    /// Reads a vocabulary file and checks that it matches the vocabulary
    /// rebuilt from its parameters token for token.
    pub fn from_json(text: &str) -> Result<Self, VocabFileError> {
        let file: VocabFile = serde_json::from_str(text)?;
        if file.kind != VOCAB_KIND {
            return Err(VocabFileError::Mismatch(format!("unexpected kind {:?}", file.kind)));
        }
        let v = Self::with_elements(file.canvas, file.tolerance, file.elements);
        if v.len() != file.tokens.len() {
            return Err(VocabFileError::Mismatch(format!("{} tokens listed, {} expected", file.tokens.len(), v.len())));
        }
        for (i, e) in file.tokens.iter().enumerate() {
            if e.id as usize != i || e.token != v.tokens[i] || Some(e.category) != v.category(e.id) {
                return Err(VocabFileError::Mismatch(format!("entry {i} is {:?}", e.token)));
            }
        }
        Ok(v)
    }

    pub fn load(path: &Path) -> Result<Self, VocabFileError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

const VOCAB_KIND: &str = "svgtok-atomic-vocab/1";

#[derive(Serialize, Deserialize)]
struct VocabFile {
    kind: String,
    canvas: u32,
    tolerance: u32,
    elements: Vec<String>,
    tokens: Vec<VocabEntry>,
}

#[derive(Serialize, Deserialize)]
struct VocabEntry {
    id: u32,
    token: String,
    category: TokenCategory,
}

#[derive(Debug, thiserror::Error)]
pub enum VocabFileError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("invalid vocabulary file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("vocabulary file does not match its parameters: {0}")]
    Mismatch(String),
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn published_counts() {
        let v = AtomicVocab::build(784, 10);
        assert_eq!(v.len(), 2450);
        assert_eq!(v.count(TokenCategory::CoordAbs), 795);
        assert_eq!(v.count(TokenCategory::CoordRel), 1589);
        assert_eq!(v.count(TokenCategory::Struct), 42);
        assert_eq!(v.count(TokenCategory::Cmd), 20);
        assert_eq!(v.count(TokenCategory::Flag), 4);
        assert_eq!(AtomicVocab::build(100, 0).len(), 368);
    }

    #[test]
    fn ids_are_stable() {
        let v = AtomicVocab::build(784, 10);
        assert_eq!(v.token(0), Some("<svg>"));
        assert_eq!(v.token(1), Some("</svg>"));
        assert_eq!(v.token(42), Some("<cmd_M>"));
        assert_eq!(v.token(43), Some("<cmd_m>"));
        assert_eq!(v.token(61), Some("<cmd_z>"));
        assert_eq!(v.token(62), Some("<large_0>"));
        assert_eq!(v.token(66), Some("<P_0>"));
        assert_eq!(v.token(66 + 794), Some("<P_794>"));
        assert_eq!(v.token(861), Some("<d_-794>"));
        assert_eq!(v.token(2449), Some("<d_794>"));
        assert_eq!(v.id("<d_0>"), Some(861 + 794));
    }

    #[test]
    fn decode_id_inverts_constructors() {
        let v = AtomicVocab::build(50, 3);
        for id in 0..v.len() as u32 {
            let back = match v.decode_id(id).unwrap() {
                AtomicToken::Open(i) => v.open_id(&v.elements()[i]).unwrap(),
                AtomicToken::Close(i) => v.close_id(&v.elements()[i]).unwrap(),
                AtomicToken::Cmd { kind, relative } => v.cmd_id(kind, relative),
                AtomicToken::Flag { kind, value } => v.flag_id(kind, value),
                AtomicToken::Abs(x) => v.abs_id(x).unwrap(),
                AtomicToken::Rel(x) => v.rel_id(x).unwrap(),
            };
            assert_eq!(back, id);
        }
        assert!(v.decode_id(v.len() as u32).is_none());
        assert!(v.abs_id(54).is_err() && v.abs_id(-1).is_err() && v.rel_id(-54).is_err());
    }

    #[test]
    fn json_round_trip() {
        let v = AtomicVocab::build(30, 2);
        let text = v.to_json();
        assert_eq!(AtomicVocab::from_json(&text).unwrap(), v);
        let tampered = text.replacen("<P_0>", "<P_00>", 1);
        assert!(matches!(AtomicVocab::from_json(&tampered), Err(VocabFileError::Mismatch(_))));
    }
}
