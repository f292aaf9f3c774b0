use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::atomic::{AtomicToken, AtomicVocab};
use crate::ir::CommandKind;

use super::{Part, Segment, SegmentedSeq};

/// Redundancy motif classes. They are disjoint: a removed segment counts
/// once under its removal motif, and zero pairs are counted only inside
/// segments that stay.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Motif {
    /// An `(x, y)` parameter pair that is `<d_0><d_0>`.
    ZeroDeltaPair,
    /// A relative command whose deltas are all zero.
    ZeroMoveCommand,
    /// An arc with a zero radius or a zero endpoint delta.
    DegenerateArc,
}

impl Motif {
    pub const ALL: [Motif; 3] = [Motif::ZeroDeltaPair, Motif::ZeroMoveCommand, Motif::DegenerateArc];
}

/// Removal and motif counts, summed over samples.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct NoiseReport {
    pub n_samples: u64,
    /// Removed (or, for zero-radius arcs, rewritten) commands by command
    /// letter as written, e.g. `l`, `h`, `a`.
    pub removed: BTreeMap<String, u64>,
    pub motifs: BTreeMap<Motif, u64>,
}

impl NoiseReport {
    pub fn merge(&mut self, other: &NoiseReport) {
        self.n_samples += other.n_samples;
        for (k, v) in &other.removed {
            *self.removed.entry(k.clone()).or_default() += v;
        }
        for (k, v) in &other.motifs {
            *self.motifs.entry(*k).or_default() += v;
        }
    }

    pub fn total_removed(&self) -> u64 {
        self.removed.values().sum()
    }

    /// Average removals per sample for each command.
    pub fn removed_per_command(&self) -> BTreeMap<String, f64> {
        let n = self.n_samples.max(1) as f64;
        self.removed.iter().map(|(k, v)| (k.clone(), *v as f64 / n)).collect()
    }

    /// Share of each motif among all motif occurrences. All zero when no
    /// motif occurred.
    pub fn redundancy_mass(&self) -> BTreeMap<Motif, f64> {
        let total: u64 = self.motifs.values().sum();
        Motif::ALL
            .iter()
            .map(|m| {
                let c = self.motifs.get(m).copied().unwrap_or(0);
                (*m, if total == 0 { 0.0 } else { c as f64 / total as f64 })
            })
            .collect()
    }

    pub fn motif_count(&self, m: Motif) -> u64 {
        self.motifs.get(&m).copied().unwrap_or(0)
    }
}

/// Removes geometry-free segments from every path of one sample.
///
/// * zero-move commands: relative `l c s q t h v` with all deltas `d_0`
/// * degenerate arcs: a relative arc with a zero endpoint delta is removed;
///   one with a zero radius but a real endpoint renders as a straight line
///   and is rewritten as `l dx dy`
///
/// A removable segment directly followed by a smooth curve (`s`, `t`) is
/// kept, since the smooth curve reflects its control point. The current
/// point after every kept segment is unchanged.
pub fn clean_segments(seq: &SegmentedSeq, vocab: &AtomicVocab) -> (SegmentedSeq, NoiseReport) {
    let mut report = NoiseReport { n_samples: 1, ..Default::default() };
    let parts = seq
        .parts
        .iter()
        .map(|p| match p {
            Part::Item(i) => Part::Item(i.clone()),
            Part::Path(segs) => Part::Path(clean_path(segs, vocab, &mut report)),
        })
        .collect();
    for m in Motif::ALL {
        report.motifs.entry(m).or_insert(0);
    }
    (SegmentedSeq { parts }, report)
}

fn command(seg: &Segment, vocab: &AtomicVocab) -> Option<(CommandKind, bool)> {
    match vocab.decode_id(seg.cmd) {
        Some(AtomicToken::Cmd { kind, relative }) => Some((kind, relative)),
        _ => None,
    }
}

fn is_zero(id: u32, vocab: &AtomicVocab) -> bool {
    vocab.decode_id(id) == Some(AtomicToken::Rel(0))
}

fn clean_path(segs: &[Segment], vocab: &AtomicVocab, report: &mut NoiseReport) -> Vec<Segment> {
    let mut out = Vec::with_capacity(segs.len());
    for (j, seg) in segs.iter().enumerate() {
        let Some((kind, relative)) = command(seg, vocab) else {
            out.push(seg.clone());
            continue;
        };
        let next_smooth = segs
            .get(j + 1)
            .and_then(|n| command(n, vocab))
            .is_some_and(|(k, _)| matches!(k, CommandKind::SmoothCubicTo | CommandKind::SmoothQuadTo));
        let letter = kind.letter().to_ascii_lowercase().to_string();
        let zero_move = relative
            && matches!(
                kind,
                CommandKind::LineTo
                    | CommandKind::CubicTo
                    | CommandKind::SmoothCubicTo
                    | CommandKind::QuadTo
                    | CommandKind::SmoothQuadTo
                    | CommandKind::HorizontalTo
                    | CommandKind::VerticalTo
            )
            && seg.params.iter().all(|&p| is_zero(p, vocab));
        if zero_move && !next_smooth {
            *report.removed.entry(letter).or_default() += 1;
            *report.motifs.entry(Motif::ZeroMoveCommand).or_default() += 1;
            continue;
        }
        if relative && kind == CommandKind::ArcTo {
            let p = &seg.params;
            let no_endpoint = is_zero(p[5], vocab) && is_zero(p[6], vocab);
            let no_radius = is_zero(p[0], vocab) || is_zero(p[1], vocab);
            if no_endpoint && !next_smooth {
                *report.removed.entry(letter).or_default() += 1;
                *report.motifs.entry(Motif::DegenerateArc).or_default() += 1;
                continue;
            }
            if no_radius && !no_endpoint {
                *report.removed.entry(letter).or_default() += 1;
                *report.motifs.entry(Motif::DegenerateArc).or_default() += 1;
                let line = Segment { cmd: vocab.cmd_id(CommandKind::LineTo, true), params: vec![p[5], p[6]] };
                count_zero_pairs(&line, CommandKind::LineTo, vocab, report);
                out.push(line);
                continue;
            }
        }
        if relative {
            count_zero_pairs(seg, kind, vocab, report);
        }
        out.push(seg.clone());
    }
    out
}

fn count_zero_pairs(seg: &Segment, kind: CommandKind, vocab: &AtomicVocab, report: &mut NoiseReport) {
    let p = &seg.params;
    let pairs: &[(usize, usize)] = match kind {
        CommandKind::MoveTo | CommandKind::LineTo | CommandKind::SmoothQuadTo => &[(0, 1)],
        CommandKind::CubicTo => &[(0, 1), (2, 3), (4, 5)],
        CommandKind::SmoothCubicTo | CommandKind::QuadTo => &[(0, 1), (2, 3)],
        CommandKind::ArcTo => &[(5, 6)],
        _ => &[],
    };
    let n = pairs.iter().filter(|(a, b)| is_zero(p[*a], vocab) && is_zero(p[*b], vocab)).count();
    *report.motifs.entry(Motif::ZeroDeltaPair).or_default() += n as u64;
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atomic::from_text;
    use crate::preprocess::endpoints;
    use crate::segment::extract_segments;

    fn run(path: &str) -> (String, NoiseReport) {
        let v = AtomicVocab::build(784, 10);
        let seq = from_text(path, &v).unwrap();
        let (clean, report) = clean_segments(&extract_segments(&seq, &v).unwrap(), &v);
        (crate::atomic::to_text(&clean.to_atomic(), &v), report)
    }

    #[test]
    fn zero_move_removed() {
        let (out, r) = run("<cmd_M><P_1><P_1><cmd_l><d_0><d_0><cmd_l><d_2><d_0>");
        assert_eq!(out, "<cmd_M><P_1><P_1><cmd_l><d_2><d_0>");
        assert_eq!(r.removed["l"], 1);
        assert_eq!(r.motif_count(Motif::ZeroMoveCommand), 1);
        assert_eq!(r.motif_count(Motif::ZeroDeltaPair), 0);
    }

    #[test]
    fn degenerate_arcs() {
        // zero radius with a real endpoint becomes a line
        let (out, r) = run("<cmd_M><P_1><P_1><cmd_a><d_0><d_40><d_0><large_0><sweep_0><d_10><d_10>");
        assert_eq!(out, "<cmd_M><P_1><P_1><cmd_l><d_10><d_10>");
        assert_eq!(r.motif_count(Motif::DegenerateArc), 1);
        assert_eq!(r.removed["a"], 1);
        // zero endpoint disappears
        let (out, r) = run("<cmd_M><P_1><P_1><cmd_a><d_5><d_5><d_0><large_1><sweep_0><d_0><d_0><cmd_h><d_3>");
        assert_eq!(out, "<cmd_M><P_1><P_1><cmd_h><d_3>");
        assert_eq!(r.motif_count(Motif::DegenerateArc), 1);
    }

    #[test]
    fn clean_path_is_untouched() {
        let src = "<cmd_M><P_1><P_1><cmd_c><d_1><d_2><d_3><d_4><d_5><d_6><cmd_z>";
        let (out, r) = run(src);
        assert_eq!(out, src);
        assert_eq!(r.total_removed(), 0);
        assert!(r.motifs.values().all(|&c| c == 0));
        assert!(r.redundancy_mass().values().all(|&m| m == 0.0));
    }

    #[test]
    fn smooth_successor_keeps_predecessor() {
        let src = "<cmd_M><P_1><P_1><cmd_c><d_1><d_2><d_3><d_4><d_5><d_6><cmd_l><d_0><d_0><cmd_s><d_1><d_1><d_2><d_2>";
        let (out, r) = run(src);
        assert_eq!(out, src);
        assert_eq!(r.total_removed(), 0);
        assert_eq!(r.motif_count(Motif::ZeroDeltaPair), 1);
    }

    #[test]
    fn zero_pairs_and_mass() {
        let (_, r) = run("<cmd_M><P_1><P_1><cmd_c><d_0><d_0><d_3><d_4><d_0><d_0><cmd_l><d_0><d_0><cmd_h><d_0>");
        assert_eq!(r.motif_count(Motif::ZeroDeltaPair), 2);
        assert_eq!(r.motif_count(Motif::ZeroMoveCommand), 2);
        let mass = r.redundancy_mass();
        assert!((mass.values().sum::<f64>() - 1.0).abs() < 1e-12);
        assert_eq!(mass[&Motif::ZeroDeltaPair], 0.5);
    }

    #[test]
    fn endpoints_survive_cleaning() {
        let v = AtomicVocab::build(784, 10);
        let src = "<svg>viewBox=0 0 784 784<path><cmd_M><P_10><P_10><cmd_l><d_0><d_0><cmd_a><d_0><d_3><d_0><large_0><sweep_1><d_4><d_-2><cmd_v><d_0><cmd_a><d_2><d_2><d_0><large_0><sweep_1><d_0><d_0><cmd_q><d_1><d_1><d_2><d_2><cmd_z></path></svg>";
        let seq = from_text(src, &v).unwrap();
        let (clean, _) = clean_segments(&extract_segments(&seq, &v).unwrap(), &v);
        let before = crate::atomic::decode_atomic(&seq, &v).unwrap();
        let after = crate::atomic::decode_atomic(&clean.to_atomic(), &v).unwrap();
        let pts = |d: &crate::ir::SvgDocument| {
            let mut e = endpoints(d.root.children[0].path_data.as_ref().unwrap());
            e.dedup();
            e
        };
        assert_eq!(pts(&before), pts(&after));
    }
}
