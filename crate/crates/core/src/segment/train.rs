use std::cmp::Reverse;
use std::collections::{BTreeSet, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::atomic::{to_ids, AtomicVocab, TokenSeq};

use super::{clean_segments, extract_segments, Segment, SegmentError, SegmentVocab, Symbol};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrainParams {
    /// Maximum number of merges.
    pub merges: usize,
    /// A pair is merged only while its count is strictly greater than this.
    pub min_freq: u64,
}

impl Default for TrainParams {
    fn default() -> Self {
        Self { merges: 500, min_freq: 2 }
    }
}

/// Learns segment merges from a corpus of atomic sequences.
///
/// Each sequence is split into per-path segment lists and cleaned first.
/// Every iteration merges the adjacent pair with the highest count; ties go
/// to the smallest `(left, right)` under the [`Symbol`] order. Training
/// stops after `params.merges` merges or once the best count is at most
/// `params.min_freq`. Pair counts are updated incrementally, touching only
/// the paths that contain the merged pair.
pub fn train(corpus: &[TokenSeq], vocab: &AtomicVocab, params: TrainParams) -> Result<SegmentVocab, SegmentError> {
    if corpus.is_empty() {
        return Err(SegmentError::EmptyCorpus);
    }
    if params.min_freq < 1 {
        return Err(SegmentError::BadParams("min_freq must be at least 1".into()));
    }
    let fingerprint = corpus_fingerprint(corpus);
    let per_seq: Vec<Vec<Vec<Segment>>> = corpus
        .par_iter()
        .map(|seq| {
            let segs = extract_segments(seq, vocab)?;
            let (clean, _) = clean_segments(&segs, vocab);
            Ok(clean.paths().cloned().collect())
        })
        .collect::<Result<_, SegmentError>>()?;

    let bases: Vec<Segment> = per_seq.iter().flatten().flatten().cloned().collect::<BTreeSet<_>>().into_iter().collect();
    let rank: HashMap<&Segment, u32> = bases.iter().enumerate().map(|(i, s)| (s, i as u32)).collect();
    let mut grouped: HashMap<Vec<u32>, u64> = HashMap::new();
    for path in per_seq.iter().flatten() {
        if path.len() >= 2 {
            *grouped.entry(path.iter().map(|s| rank[s]).collect()).or_default() += 1;
        }
    }
    let mut words: Vec<(Vec<u32>, u64)> = grouped.into_iter().collect();
    words.sort_unstable();

    let merges = learn(&mut words, bases.len() as u32, params);
    let symbol = |r: u32| {
        if (r as usize) < bases.len() {
            Symbol::Base(bases[r as usize].clone())
        } else {
            Symbol::Composite(r - bases.len() as u32)
        }
    };
    let learned = merges.into_iter().map(|(a, b, c)| (symbol(a), symbol(b), c)).collect();
    Ok(SegmentVocab::from_merges(vocab, learned, params, fingerprint))
}

/// SHA-256 over the id serialization of every sequence, in corpus order.
pub(crate) fn corpus_fingerprint(corpus: &[TokenSeq]) -> String {
    let mut h = Sha256::new();
    for seq in corpus {
        h.update(to_ids(seq).as_bytes());
        h.update(b"\n");
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

type Pair = (u32, u32);

struct Counts {
    count: HashMap<Pair, u64>,
    /// `(Reverse(count), left, right)`: first entry is the next merge.
    queue: BTreeSet<(Reverse<u64>, u32, u32)>,
    holders: HashMap<Pair, BTreeSet<usize>>,
}

impl Counts {
    fn apply(&mut self, deltas: HashMap<Pair, i64>) {
        for (p, d) in deltas {
            if d == 0 {
                continue;
            }
            let old = self.count.get(&p).copied().unwrap_or(0);
            if old > 0 {
                self.queue.remove(&(Reverse(old), p.0, p.1));
            }
            let new = (old as i64 + d) as u64;
            if new > 0 {
                self.count.insert(p, new);
                self.queue.insert((Reverse(new), p.0, p.1));
            } else {
                self.count.remove(&p);
            }
        }
    }
}

fn add_pairs(word: &[u32], freq: u64, sign: i64, deltas: &mut HashMap<Pair, i64>) {
    for w in word.windows(2) {
        *deltas.entry((w[0], w[1])).or_default() += sign * freq as i64;
    }
}

/// Replaces non-overlapping occurrences of `pair`, scanning left to right.
pub(crate) fn merge_word(word: &[u32], pair: Pair, new: u32) -> Vec<u32> {
    let mut out = Vec::with_capacity(word.len());
    let mut i = 0;
    while i < word.len() {
        if i + 1 < word.len() && word[i] == pair.0 && word[i + 1] == pair.1 {
            out.push(new);
            i += 2;
        } else {
            out.push(word[i]);
            i += 1;
        }
    }
    out
}

/// Core merge loop over interned words with multiplicities. Symbols below
/// `n_base` are base segments; the k-th merge creates symbol `n_base + k`.
/// Returns `(left, right, count)` per merge.
fn learn(words: &mut [(Vec<u32>, u64)], n_base: u32, params: TrainParams) -> Vec<(u32, u32, u64)> {
    let mut counts = Counts { count: HashMap::new(), queue: BTreeSet::new(), holders: HashMap::new() };
    let mut init = HashMap::new();
    for (i, (w, f)) in words.iter().enumerate() {
        add_pairs(w, *f, 1, &mut init);
        for p in w.windows(2) {
            counts.holders.entry((p[0], p[1])).or_default().insert(i);
        }
    }
    counts.apply(init);

    let mut merges = Vec::new();
    while merges.len() < params.merges {
        let Some(&(Reverse(best), a, b)) = counts.queue.first() else { break };
        if best <= params.min_freq {
            break;
        }
        let new = n_base + merges.len() as u32;
        merges.push((a, b, best));
        let holders = counts.holders.remove(&(a, b)).unwrap_or_default();
        let mut deltas = HashMap::new();
        for i in holders {
            let (word, freq) = &words[i];
            if !word.windows(2).any(|p| p[0] == a && p[1] == b) {
                continue;
            }
            let merged = merge_word(word, (a, b), new);
            add_pairs(word, *freq, -1, &mut deltas);
            add_pairs(&merged, *freq, 1, &mut deltas);
            for p in merged.windows(2) {
                counts.holders.entry((p[0], p[1])).or_default().insert(i);
            }
            words[i].0 = merged;
        }
        counts.apply(deltas);
    }
    merges
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(words: &[(&[u32], u64)], m: usize, f_min: u64) -> Vec<(u32, u32, u64)> {
        let mut w: Vec<(Vec<u32>, u64)> = words.iter().map(|(s, f)| (s.to_vec(), *f)).collect();
        learn(&mut w, 10, TrainParams { merges: m, min_freq: f_min })
    }

    #[test]
    fn single_candidate() {
        assert_eq!(run(&[(&[0, 1], 10)], 1, 1), [(0, 1, 10)]);
    }

    #[test]
    fn second_merge_uses_composite() {
        // A=0 B=1 C=2: {[A,B,C]x5, [B,C]x3}
        assert_eq!(run(&[(&[0, 1, 2], 5), (&[1, 2], 3)], 2, 2), [(1, 2, 8), (0, 10, 5)]);
    }

    #[test]
    fn threshold_is_strict_and_zero_merges_is_empty() {
        assert_eq!(run(&[(&[0, 1], 2)], 5, 2), []);
        assert_eq!(run(&[(&[0, 1], 3)], 5, 2), [(0, 1, 3)]);
        assert_eq!(run(&[(&[0, 1], 30)], 0, 1), []);
    }

    #[test]
    fn ties_prefer_smallest_pair() {
        assert_eq!(run(&[(&[3, 4], 5), (&[1, 2], 5)], 1, 1), [(1, 2, 5)]);
        assert_eq!(run(&[(&[2, 0], 5), (&[1, 9], 5)], 1, 1), [(1, 9, 5)]);
    }

    #[test]
    fn overlapping_runs() {
        // a a a: the pair occurs twice but only one merge fits
        let out = run(&[(&[0, 0, 0], 4)], 2, 1);
        assert_eq!(out[0], (0, 0, 8));
        assert_eq!(out[1], (10, 0, 4));
    }
}
