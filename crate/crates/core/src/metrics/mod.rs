//! Corpus-level compression, cleaning and length-partition statistics.
//!
//! Every statistic is a sum or count reduced over samples, so parallel
//! evaluation gives the same result as a sequential pass.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::atomic::{count_commands, count_paths, count_tokens, AtomicVocab, LitMode, TokenSeq};
use crate::segment::{clean_segments, encode_segments, extract_segments, Motif, NoiseReport, SegmentError, SegmentVocab};

/// Raw-text token counter supplied by the caller, e.g. a language model's
/// subword tokenizer.
pub trait TokenCounter: Sync {
    /// Recorded in reports.
    fn name(&self) -> &str;
    fn count(&self, text: &str) -> usize;
}

/// [`TokenCounter`] from a name and a closure.
pub struct FnCounter<F> {
    name: String,
    f: F,
}

impl<F: Fn(&str) -> usize + Sync> FnCounter<F> {
    pub fn new(name: impl Into<String>, f: F) -> Self {
        Self { name: name.into(), f }
    }
}

impl<F: Fn(&str) -> usize + Sync> TokenCounter for FnCounter<F> {
    fn name(&self) -> &str {
        &self.name
    }

    fn count(&self, text: &str) -> usize {
        (self.f)(text)
    }
}

/// One corpus entry: the original SVG text and its cleaned atomic sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusSample {
    pub raw: String,
    pub atomic: TokenSeq,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompressionReport {
    pub n_samples: usize,
    pub baseline: String,
    /// How literal spans were counted in atomic and segment lengths.
    pub lit_mode: String,
    pub avg_raw_tokens: f64,
    pub avg_atomic_tokens: f64,
    pub avg_segment_tokens: f64,
    pub ratio_raw_to_at: f64,
    pub ratio_at_to_st: f64,
    pub paths_avg: f64,
    pub cmds_avg: f64,
}

#[derive(Debug, Clone, Copy, Default)]
struct Sums {
    raw: usize,
    at: usize,
    st: usize,
    paths: usize,
    cmds: usize,
}

impl std::ops::Add for Sums {
    type Output = Sums;
    fn add(self, o: Sums) -> Sums {
        Sums {
            raw: self.raw + o.raw,
            at: self.at + o.at,
            st: self.st + o.st,
            paths: self.paths + o.paths,
            cmds: self.cmds + o.cmds,
        }
    }
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

fn lit_mode_name(m: LitMode) -> &'static str {
    match m {
        LitMode::Items => "items",
        LitMode::Chars => "chars",
    }
}

/// Averages and corpus-level ratios (total over total). Segment lengths
/// come from encoding each sample's atomic sequence with `sv`.
pub fn compression_report(
    corpus: &[CorpusSample],
    atomic: &AtomicVocab,
    sv: &SegmentVocab,
    baseline: &dyn TokenCounter,
    lit_mode: LitMode,
) -> Result<CompressionReport, SegmentError> {
    if corpus.is_empty() {
        return Err(SegmentError::EmptyCorpus);
    }
    let s = corpus
        .par_iter()
        .map(|x| {
            let st = encode_segments(&x.atomic, sv, atomic)?;
            Ok::<_, SegmentError>(Sums {
                raw: baseline.count(&x.raw),
                at: count_tokens(&x.atomic, lit_mode),
                st: count_tokens(&st, lit_mode),
                paths: count_paths(&x.atomic, atomic),
                cmds: count_commands(&x.atomic, atomic),
            })
        })
        .try_reduce(Sums::default, |a, b| Ok(a + b))?;
    let n = corpus.len() as f64;
    Ok(CompressionReport {
        n_samples: corpus.len(),
        baseline: baseline.name().to_string(),
        lit_mode: lit_mode_name(lit_mode).into(),
        avg_raw_tokens: s.raw as f64 / n,
        avg_atomic_tokens: s.at as f64 / n,
        avg_segment_tokens: s.st as f64 / n,
        ratio_raw_to_at: ratio(s.raw, s.at),
        ratio_at_to_st: ratio(s.at, s.st),
        paths_avg: s.paths as f64 / n,
        cmds_avg: s.cmds as f64 / n,
    })
}

impl CompressionReport {
    pub fn to_table(&self) -> String {
        let rows = [
            ("samples", self.n_samples.to_string()),
            ("baseline", self.baseline.clone()),
            ("literal spans", self.lit_mode.clone()),
            ("avg raw tokens", format!("{:.2}", self.avg_raw_tokens)),
            ("avg atomic tokens (AT)", format!("{:.2}", self.avg_atomic_tokens)),
            ("avg segment tokens (ST)", format!("{:.2}", self.avg_segment_tokens)),
            ("raw -> AT", format!("{:.3}x", self.ratio_raw_to_at)),
            ("AT -> ST", format!("{:.3}x", self.ratio_at_to_st)),
            ("paths / sample", format!("{:.2}", self.paths_avg)),
            ("commands / sample", format!("{:.2}", self.cmds_avg)),
        ];
        table(&rows)
    }
}

/// Curriculum stage of a sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Stage {
    S1,
    S2,
    S3,
    #[serde(rename = "discard")]
    Discard,
}

impl Stage {
    pub const ALL: [Stage; 4] = [Stage::S1, Stage::S2, Stage::S3, Stage::Discard];

    pub fn name(self) -> &'static str {
        match self {
            Stage::S1 => "S1",
            Stage::S2 => "S2",
            Stage::S3 => "S3",
            Stage::Discard => "discard",
        }
    }
}

pub const STAGE_BOUNDARIES: [usize; 4] = [30, 326, 605, 1000];

/// `[30, 326) -> S1`, `[326, 605) -> S2`, `[605, 1000] -> S3`, else discard.
pub fn assign_stage(len: usize) -> Stage {
    let [a, b, c, d] = STAGE_BOUNDARIES;
    match len {
        l if l < a => Stage::Discard,
        l if l < b => Stage::S1,
        l if l < c => Stage::S2,
        l if l <= d => Stage::S3,
        _ => Stage::Discard,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageBuckets {
    pub boundaries: [usize; 4],
    pub lengths: Vec<usize>,
    pub assignment: Vec<Stage>,
    pub counts: BTreeMap<Stage, usize>,
}

impl StageBuckets {
    pub fn to_table(&self) -> String {
        let rows: Vec<(&str, String)> = Stage::ALL.iter().map(|s| (s.name(), self.counts[s].to_string())).collect();
        table(&rows)
    }
}

/// Assigns each sample a stage from its atomic length.
pub fn partition_by_length(corpus: &[TokenSeq], lit_mode: LitMode) -> StageBuckets {
    let lengths: Vec<usize> = corpus.iter().map(|s| count_tokens(s, lit_mode)).collect();
    let assignment: Vec<Stage> = lengths.iter().map(|&l| assign_stage(l)).collect();
    let mut counts: BTreeMap<Stage, usize> = Stage::ALL.iter().map(|&s| (s, 0)).collect();
    for s in &assignment {
        *counts.get_mut(s).expect("all stages present") += 1;
    }
    StageBuckets { boundaries: STAGE_BOUNDARIES, lengths, assignment, counts }
}

/// Sum of the per-sample cleaning reports over uncleaned atomic sequences.
pub fn cleaning_report(corpus: &[TokenSeq], atomic: &AtomicVocab) -> Result<NoiseReport, SegmentError> {
    corpus
        .par_iter()
        .map(|seq| Ok::<_, SegmentError>(clean_segments(&extract_segments(seq, atomic)?, atomic).1))
        .try_reduce(
            || NoiseReport { motifs: Motif::ALL.iter().map(|&m| (m, 0)).collect(), ..Default::default() },
            |mut a, b| {
                a.merge(&b);
                Ok(a)
            },
        )
}

pub fn noise_table(r: &NoiseReport) -> String {
    let mut rows = vec![("samples".to_string(), r.n_samples.to_string())];
    for (k, v) in r.removed_per_command() {
        rows.push((format!("removed <{k}> / sample"), format!("{v:.3}")));
    }
    rows.push(("removed / sample".into(), format!("{:.3}", r.total_removed() as f64 / r.n_samples.max(1) as f64)));
    for (m, share) in r.redundancy_mass() {
        let name = serde_json::to_value(m).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default();
        rows.push((format!("{name} mass"), format!("{:.1}%", share * 100.0)));
    }
    let rows: Vec<(&str, String)> = rows.iter().map(|(k, v)| (k.as_str(), v.clone())).collect();
    table(&rows)
}

fn table(rows: &[(&str, String)]) -> String {
    let w = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    let mut out = String::new();
    for (k, v) in rows {
        let _ = writeln!(out, "{k:<w$}  {v}");
    }
    out
}
