use std::collections::BTreeMap;

use serde::Serialize;

use crate::atomic::{AtomicToken, AtomicVocab, TokenSeq};

use super::{encode_segments, SegmentError, SegmentVocab};

/// Quantiles of a length distribution (linear interpolation).
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct LengthSummary {
    pub count: usize,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub mean: f64,
}

impl LengthSummary {
    pub fn from_values(values: &[usize]) -> Self {
        if values.is_empty() {
            return Self::default();
        }
        let mut v: Vec<f64> = values.iter().map(|&x| x as f64).collect();
        v.sort_by(f64::total_cmp);
        let q = |p: f64| {
            let pos = p * (v.len() - 1) as f64;
            let lo = pos.floor() as usize;
            let hi = pos.ceil() as usize;
            v[lo] + (v[hi] - v[lo]) * (pos - lo as f64)
        };
        Self {
            count: v.len(),
            min: v[0],
            q1: q(0.25),
            median: q(0.5),
            q3: q(0.75),
            max: v[v.len() - 1],
            mean: v.iter().sum::<f64>() / v.len() as f64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BucketStats {
    pub name: String,
    pub composites: usize,
    /// Occurrences of the bucket's composites in the encoded corpus.
    pub uses: u64,
    /// Percentage of commands of each type (lowercase letter) over all
    /// commands inside the bucket's composites.
    pub command_share: BTreeMap<String, f64>,
    pub atomic_length: LengthSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SegmentStats {
    pub composites: usize,
    pub atomic_length: LengthSummary,
    pub segments_per_composite: LengthSummary,
    pub buckets: Vec<BucketStats>,
}

/// Usage-ranked composite buckets (top 50, 51-200, rest) with their command
/// mix, and the atomic length distribution of all composites.
///
/// `corpus` holds cleaned atomic sequences; usage is counted after encoding
/// them with `sv`.
pub fn segment_stats(sv: &SegmentVocab, corpus: &[TokenSeq], atomic: &AtomicVocab) -> Result<SegmentStats, SegmentError> {
    let mut uses = vec![0u64; sv.len()];
    for seq in corpus {
        for id in encode_segments(seq, sv, atomic)?.ids() {
            if let Some(k) = id.checked_sub(sv.atomic_size()) {
                uses[k as usize] += 1;
            }
        }
    }
    let mut order: Vec<usize> = (0..sv.len()).collect();
    order.sort_by_key(|&k| (std::cmp::Reverse(uses[k]), k));

    let atomic_len = |k: usize| sv.expansions()[k].iter().map(|s| s.atomic_len()).sum::<usize>();
    let bounds = [("top_50", 0, 50), ("51_200", 50, 200), ("rest", 200, usize::MAX)];
    let buckets = bounds
        .iter()
        .map(|&(name, lo, hi)| {
            let members: Vec<usize> = order.iter().copied().skip(lo).take(hi.saturating_sub(lo)).collect();
            let mut mix: BTreeMap<String, u64> = BTreeMap::new();
            for &k in &members {
                for s in &sv.expansions()[k] {
                    if let Some(AtomicToken::Cmd { kind, .. }) = atomic.decode_id(s.cmd) {
                        *mix.entry(kind.letter().to_ascii_lowercase().to_string()).or_default() += 1;
                    }
                }
            }
            let total: u64 = mix.values().sum();
            BucketStats {
                name: name.to_string(),
                composites: members.len(),
                uses: members.iter().map(|&k| uses[k]).sum(),
                command_share: mix.into_iter().map(|(k, c)| (k, 100.0 * c as f64 / total as f64)).collect(),
                atomic_length: LengthSummary::from_values(&members.iter().map(|&k| atomic_len(k)).collect::<Vec<_>>()),
            }
        })
        .collect();
    Ok(SegmentStats {
        composites: sv.len(),
        atomic_length: LengthSummary::from_values(&(0..sv.len()).map(atomic_len).collect::<Vec<_>>()),
        segments_per_composite: LengthSummary::from_values(&sv.expansions().iter().map(Vec::len).collect::<Vec<_>>()),
        buckets,
    })
}
