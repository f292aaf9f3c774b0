use std::collections::HashMap;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::atomic::{from_text, AtomicVocab, TokenItem, TokenSeq};

use super::train::TrainParams;
use super::{extract_segments, Part, Segment, SegmentError, Symbol};

/// Ordered merges learned by [`train`](super::train) and the composite
/// tokens they define. Composite `k` has the token string `<seg_k>` and the
/// id `atomic_size + k`.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentVocab {
    canvas: u32,
    tolerance: u32,
    atomic_size: u32,
    params: TrainParams,
    fingerprint: String,
    merges: Vec<(Symbol, Symbol)>,
    counts: Vec<u64>,
    expansions: Vec<Vec<Segment>>,
    lookup: HashMap<(Symbol, Symbol), u32>,
}

impl SegmentVocab {
    pub(crate) fn from_merges(
        atomic: &AtomicVocab,
        learned: Vec<(Symbol, Symbol, u64)>,
        params: TrainParams,
        fingerprint: String,
    ) -> Self {
        let mut merges = Vec::with_capacity(learned.len());
        let mut counts = Vec::with_capacity(learned.len());
        let mut expansions: Vec<Vec<Segment>> = Vec::with_capacity(learned.len());
        let mut lookup = HashMap::new();
        for (k, (a, b, c)) in learned.into_iter().enumerate() {
            let mut exp = Vec::new();
            for s in [&a, &b] {
                match s {
                    Symbol::Base(seg) => exp.push(seg.clone()),
                    Symbol::Composite(i) => exp.extend(expansions[*i as usize].iter().cloned()),
                }
            }
            expansions.push(exp);
            lookup.insert((a.clone(), b.clone()), k as u32);
            merges.push((a, b));
            counts.push(c);
        }
        Self {
            canvas: atomic.canvas(),
            tolerance: atomic.tolerance(),
            atomic_size: atomic.len() as u32,
            params,
            fingerprint,
            merges,
            counts,
            expansions,
            lookup,
        }
    }

    /// Vocabulary without merges: encoding is the identity.
    pub fn empty(atomic: &AtomicVocab) -> Self {
        Self::from_merges(atomic, Vec::new(), TrainParams { merges: 0, min_freq: 1 }, String::new())
    }

    /// Canvas and tolerance of the atomic vocabulary this was trained on.
    pub fn canvas(&self) -> (u32, u32) {
        (self.canvas, self.tolerance)
    }

    pub fn len(&self) -> usize {
        self.merges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.merges.is_empty()
    }

    pub fn merges(&self) -> &[(Symbol, Symbol)] {
        &self.merges
    }

    /// Pair count at the time each merge was selected.
    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn params(&self) -> TrainParams {
        self.params
    }

    pub fn fingerprint(&self) -> &str {
        &self.fingerprint
    }

    pub fn atomic_size(&self) -> u32 {
        self.atomic_size
    }

    /// Atomic vocabulary size plus composites.
    pub fn total_size(&self) -> usize {
        self.atomic_size as usize + self.merges.len()
    }

    pub fn composite_id(&self, k: u32) -> u32 {
        self.atomic_size + k
    }

    /// Base segments a composite token id stands for.
    pub fn expansion(&self, id: u32) -> Option<&[Segment]> {
        id.checked_sub(self.atomic_size).and_then(|k| self.expansions.get(k as usize)).map(Vec::as_slice)
    }

    pub fn expansions(&self) -> &[Vec<Segment>] {
        &self.expansions
    }

    pub fn composite_token(k: u32) -> String {
        format!("<seg_{k}>")
    }

    /// Token string for any id of the combined vocabulary.
    pub fn token_name(&self, id: u32, atomic: &AtomicVocab) -> Option<String> {
        if id < self.atomic_size {
            atomic.token(id).map(String::from)
        } else if ((id - self.atomic_size) as usize) < self.merges.len() {
            Some(Self::composite_token(id - self.atomic_size))
        } else {
            None
        }
    }

    /// Id for any token string of the combined vocabulary.
    pub fn token_id(&self, token: &str, atomic: &AtomicVocab) -> Option<u32> {
        if let Some(k) = token.strip_prefix("<seg_").and_then(|r| r.strip_suffix('>')) {
            let k: u32 = k.parse().ok()?;
            ((k as usize) < self.merges.len() && Self::composite_token(k) == token).then(|| self.atomic_size + k)
        } else {
            atomic.id(token)
        }
    }

    fn check_atomic(&self, atomic: &AtomicVocab) -> Result<(), SegmentVocabFileError> {
        if atomic.canvas() != self.canvas || atomic.tolerance() != self.tolerance || atomic.len() as u32 != self.atomic_size {
            return Err(SegmentVocabFileError::Mismatch(format!(
                "segment vocabulary was trained for canvas {} tolerance {} ({} atomic tokens)",
                self.canvas, self.tolerance, self.atomic_size
            )));
        }
        Ok(())
    }

    pub fn to_json(&self, atomic: &AtomicVocab) -> String {
        let sym = |s: &Symbol| match s {
            Symbol::Base(seg) => seg.to_text(atomic),
            Symbol::Composite(k) => Self::composite_token(*k),
        };
        let file = SegmentVocabFile {
            kind: KIND.into(),
            canvas: self.canvas,
            tolerance: self.tolerance,
            atomic_size: self.atomic_size,
            params: self.params,
            corpus_fingerprint: self.fingerprint.clone(),
            merges: self
                .merges
                .iter()
                .zip(&self.counts)
                .enumerate()
                .map(|(k, ((a, b), c))| MergeEntry {
                    token: Self::composite_token(k as u32),
                    id: self.atomic_size + k as u32,
                    left: sym(a),
                    right: sym(b),
                    count: *c,
                    atomic: self.expansions[k]
                        .iter()
                        .flat_map(|s| std::iter::once(s.cmd).chain(s.params.iter().copied()))
                        .map(|id| atomic.token(id).unwrap_or_default().to_string())
                        .collect(),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("segment vocab serializes")
    }

    pub fn from_json(text: &str, atomic: &AtomicVocab) -> Result<Self, SegmentVocabFileError> {
        let file: SegmentVocabFile = serde_json::from_str(text)?;
        if file.kind != KIND {
            return Err(SegmentVocabFileError::Mismatch(format!("unexpected kind {:?}", file.kind)));
        }
        let parse_sym = |s: &str, k: usize| -> Result<Symbol, SegmentVocabFileError> {
            if let Some(i) = s.strip_prefix("<seg_").and_then(|r| r.strip_suffix('>')) {
                let i: u32 = i.parse().map_err(|_| SegmentVocabFileError::Mismatch(format!("bad composite {s}")))?;
                if i as usize >= k {
                    return Err(SegmentVocabFileError::Mismatch(format!("merge {k} refers to later composite {s}")));
                }
                return Ok(Symbol::Composite(i));
            }
            let seq = from_text(s, atomic).map_err(|e| SegmentVocabFileError::Mismatch(format!("{s}: {e}")))?;
            let segs = extract_segments(&seq, atomic).map_err(|e| SegmentVocabFileError::Mismatch(format!("{s}: {e}")))?;
            match segs.parts.as_slice() {
                [Part::Path(p)] if p.len() == 1 => Ok(Symbol::Base(p[0].clone())),
                _ => Err(SegmentVocabFileError::Mismatch(format!("{s} is not a single segment"))),
            }
        };
        let mut learned = Vec::with_capacity(file.merges.len());
        for (k, m) in file.merges.iter().enumerate() {
            learned.push((parse_sym(&m.left, k)?, parse_sym(&m.right, k)?, m.count));
        }
        let sv = Self::from_merges(atomic, learned, file.params, file.corpus_fingerprint);
        if file.canvas != sv.canvas || file.tolerance != sv.tolerance || file.atomic_size != sv.atomic_size {
            return Err(SegmentVocabFileError::Mismatch("atomic vocabulary parameters differ".into()));
        }
        for (k, m) in file.merges.iter().enumerate() {
            let expected: Vec<String> = sv.expansions[k]
                .iter()
                .flat_map(|s| std::iter::once(s.cmd).chain(s.params.iter().copied()))
                .map(|id| atomic.token(id).unwrap_or_default().to_string())
                .collect();
            if m.atomic != expected || m.id != sv.atomic_size + k as u32 || m.token != Self::composite_token(k as u32) {
                return Err(SegmentVocabFileError::Mismatch(format!("merge {k} is inconsistent")));
            }
        }
        Ok(sv)
    }

    pub fn load(path: &Path, atomic: &AtomicVocab) -> Result<Self, SegmentVocabFileError> {
        let sv = Self::from_json(&std::fs::read_to_string(path)?, atomic)?;
        sv.check_atomic(atomic)?;
        Ok(sv)
    }
}

const KIND: &str = "svgtok-segment-vocab/1";

#[derive(Serialize, Deserialize)]
struct SegmentVocabFile {
    kind: String,
    canvas: u32,
    tolerance: u32,
    atomic_size: u32,
    params: TrainParams,
    corpus_fingerprint: String,
    merges: Vec<MergeEntry>,
}

#[derive(Serialize, Deserialize)]
struct MergeEntry {
    token: String,
    id: u32,
    left: String,
    right: String,
    count: u64,
    atomic: Vec<String>,
}

#[derive(Debug, thiserror::Error)]
pub enum SegmentVocabFileError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("invalid segment vocabulary file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("segment vocabulary mismatch: {0}")]
    Mismatch(String),
}

/// Applies the learned merges inside every path. Structure tokens and
/// literal spans pass through; segments no merge applies to stay atomic.
///
/// The input is expected to be cleaned already (see
/// [`clean_segments`](super::clean_segments)); encoding itself never drops
/// anything, so `expand_segments(encode_segments(x)) == x`.
pub fn encode_segments(seq: &TokenSeq, sv: &SegmentVocab, atomic: &AtomicVocab) -> Result<TokenSeq, SegmentError> {
    let split = extract_segments(seq, atomic)?;
    if sv.is_empty() {
        return Ok(seq.clone());
    }
    let mut out = Vec::with_capacity(seq.len());
    for part in split.parts {
        match part {
            Part::Item(i) => out.push(i),
            Part::Path(segs) => {
                for sym in apply_merges(segs, sv) {
                    match sym {
                        Symbol::Base(s) => s.push_atomic(&mut out),
                        Symbol::Composite(k) => out.push(TokenItem::Tok(sv.composite_id(k))),
                    }
                }
            }
        }
    }
    Ok(TokenSeq::new(out))
}

/// Repeatedly merges the lowest-ranked pair present, which is the same as
/// applying every merge in learned order.
fn apply_merges(segs: Vec<Segment>, sv: &SegmentVocab) -> Vec<Symbol> {
    let mut syms: Vec<Symbol> = segs.into_iter().map(Symbol::Base).collect();
    loop {
        let best = syms
            .windows(2)
            .filter_map(|w| sv.lookup.get(&(w[0].clone(), w[1].clone())).copied())
            .min();
        let Some(k) = best else { break };
        let (a, b) = &sv.merges[k as usize];
        let mut out = Vec::with_capacity(syms.len());
        let mut i = 0;
        while i < syms.len() {
            if i + 1 < syms.len() && &syms[i] == a && &syms[i + 1] == b {
                out.push(Symbol::Composite(k));
                i += 2;
            } else {
                out.push(syms[i].clone());
                i += 1;
            }
        }
        syms = out;
    }
    syms
}

/// Replaces every composite token by its atomic expansion.
pub fn expand_segments(seq: &TokenSeq, sv: &SegmentVocab) -> Result<TokenSeq, SegmentError> {
    let mut out = Vec::with_capacity(seq.len() * 2);
    for item in &seq.items {
        match item {
            TokenItem::Tok(id) if *id >= sv.atomic_size => {
                let exp = sv.expansion(*id).ok_or(SegmentError::UnknownComposite(*id))?;
                exp.iter().for_each(|s| s.push_atomic(&mut out));
            }
            other => out.push(other.clone()),
        }
    }
    Ok(TokenSeq::new(out))
}
