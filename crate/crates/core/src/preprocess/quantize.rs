use crate::ir::{CommandKind, Element, PathCommand, SvgDocument};

use super::geometry::absolutize;
use super::{PreprocessConfig, PreprocessError};

/// Rounds half away from zero. Same as `f64::round`, spelled out because the
/// rounding mode is part of the output format.
fn quantize(v: f64) -> f64 {
    let r = v.abs().round();
    if r == 0.0 {
        0.0
    } else {
        r.copysign(v)
    }
}

/// Rounds all geometry to integers and rewrites each path as one absolute
/// moveto followed by relative commands.
///
/// Deltas are taken between already quantized absolute points, so rounding
/// error stays within 0.5 per axis and never accumulates. Subpaths whose
/// bounding box lies entirely outside the tolerance band are dropped; the
/// remaining positions are clamped to `[0, canvas + tolerance]`. Paths left
/// empty are removed. If the document had geometry and none survives, the
/// sample is unstable.
pub fn quantize_and_relativize(mut doc: SvgDocument, cfg: &PreprocessConfig) -> Result<SvgDocument, PreprocessError> {
    let mut had_geometry = false;
    doc.root.walk(&mut |e| had_geometry |= e.path_data.as_ref().is_some_and(|p| !p.is_empty()));
    quantize_element(&mut doc.root, cfg);
    let mut left = false;
    doc.root.walk(&mut |e| left |= e.path_data.as_ref().is_some_and(|p| !p.is_empty()));
    if had_geometry && !left {
        return Err(PreprocessError::UnstableSample);
    }
    Ok(doc)
}

fn quantize_element(el: &mut Element, cfg: &PreprocessConfig) {
    for child in el.children.iter_mut() {
        quantize_element(child, cfg);
    }
    el.children.retain(|c| !matches!(&c.path_data, Some(p) if p.is_empty()));
    if let Some(cmds) = el.path_data.as_mut() {
        *cmds = quantize_path(cmds, cfg);
    }
}

/// Quantizes one path. Exposed for tests and for callers that already hold
/// canvas-space path data.
pub(crate) fn quantize_path(cmds: &[PathCommand], cfg: &PreprocessConfig) -> Vec<PathCommand> {
    let hi = cfg.max_coord() as f64;
    let tol = cfg.overflow_tolerance as f64;
    let abs: Vec<PathCommand> = absolutize(cmds).iter().map(|c| round_absolute(c, hi)).collect();

    // split into subpaths at each moveto and drop the ones fully outside
    let mut kept: Vec<PathCommand> = Vec::with_capacity(abs.len());
    let mut start = 0;
    let mut cur = (0.0, 0.0);
    while start < abs.len() {
        let mut end = start + 1;
        while end < abs.len() && abs[end].kind() != CommandKind::MoveTo {
            end += 1;
        }
        let (bbox, next) = subpath_bbox(&abs[start..end], cur);
        cur = next;
        let outside = bbox.2 < -tol || bbox.0 > hi || bbox.3 < -tol || bbox.1 > hi;
        if !outside {
            kept.extend_from_slice(&abs[start..end]);
        }
        start = end;
    }
    let clamped: Vec<PathCommand> = kept.iter().map(|c| clamp_absolute(c, hi)).collect();
    relativize(&clamped)
}

fn round_absolute(c: &PathCommand, hi: f64) -> PathCommand {
    let p = c.params();
    let q: Vec<f64> = match c.kind() {
        CommandKind::ArcTo => {
            // a nonzero radius never collapses to zero
            let radius = |r: f64| {
                let q = quantize(r.abs());
                if q == 0.0 && r != 0.0 {
                    1.0
                } else {
                    q.min(hi)
                }
            };
            let rot = quantize(p[2]).rem_euclid(180.0);
            vec![radius(p[0]), radius(p[1]), rot, quantize(p[3]), quantize(p[4])]
        }
        _ => p.iter().map(|&v| quantize(v)).collect(),
    };
    PathCommand::with_params(c.kind(), false, q, c.flags())
}

fn clamp_absolute(c: &PathCommand, hi: f64) -> PathCommand {
    let p = c.params();
    let q: Vec<f64> = match c.kind() {
        CommandKind::ArcTo => vec![p[0], p[1], p[2], p[3].clamp(0.0, hi), p[4].clamp(0.0, hi)],
        _ => p.iter().map(|&v| v.clamp(0.0, hi)).collect(),
    };
    PathCommand::with_params(c.kind(), false, q, c.flags())
}

/// Bounding box `(min_x, min_y, max_x, max_y)` of one absolute subpath, plus
/// the current point after it.
fn subpath_bbox(cmds: &[PathCommand], mut cur: (f64, f64)) -> ((f64, f64, f64, f64), (f64, f64)) {
    let mut bb = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    let mut add = |x: f64, y: f64| {
        bb.0 = bb.0.min(x);
        bb.1 = bb.1.min(y);
        bb.2 = bb.2.max(x);
        bb.3 = bb.3.max(y);
    };
    let mut start = cur;
    for c in cmds {
        let p = c.params();
        match c.kind() {
            CommandKind::HorizontalTo => cur.0 = p[0],
            CommandKind::VerticalTo => cur.1 = p[0],
            CommandKind::Close => cur = start,
            CommandKind::ArcTo => cur = (p[3], p[4]),
            _ => {
                for xy in p.chunks(2) {
                    add(xy[0], xy[1]);
                }
                cur = (p[p.len() - 2], p[p.len() - 1]);
            }
        }
        if c.kind() == CommandKind::MoveTo {
            start = cur;
        }
        add(cur.0, cur.1);
    }
    (bb, cur)
}

fn relativize(abs: &[PathCommand]) -> Vec<PathCommand> {
    let mut out = Vec::with_capacity(abs.len());
    let (mut cx, mut cy) = (0.0, 0.0);
    let (mut sx, mut sy) = (0.0, 0.0);
    for (i, c) in abs.iter().enumerate() {
        let p = c.params();
        let kind = c.kind();
        let first = i == 0;
        let rel: Vec<f64> = match kind {
            _ if first => p.to_vec(),
            CommandKind::HorizontalTo => vec![p[0] - cx],
            CommandKind::VerticalTo => vec![p[0] - cy],
            CommandKind::ArcTo => vec![p[0], p[1], p[2], p[3] - cx, p[4] - cy],
            CommandKind::Close => Vec::new(),
            _ => p.chunks(2).flat_map(|xy| [xy[0] - cx, xy[1] - cy]).collect(),
        };
        match kind {
            CommandKind::HorizontalTo => cx = p[0],
            CommandKind::VerticalTo => cy = p[0],
            CommandKind::Close => (cx, cy) = (sx, sy),
            _ => (cx, cy) = (p[p.len() - 2], p[p.len() - 1]),
        }
        if kind == CommandKind::MoveTo {
            (sx, sy) = (cx, cy);
        }
        let rel: Vec<f64> = rel.into_iter().map(|v| if v == 0.0 { 0.0 } else { v }).collect();
        out.push(PathCommand::with_params(kind, !first, rel, c.flags()));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::{parse_path_data, write_path_data};

    fn q(d: &str) -> String {
        write_path_data(&quantize_path(&parse_path_data(d).unwrap(), &PreprocessConfig::default()))
    }

    #[test]
    fn rounds_then_diffs() {
        assert_eq!(q("M 100.4 200.6 L 150 170"), "M 100 201 l 50 -31");
    }

    #[test]
    fn fixed_point() {
        assert_eq!(q("M 10 20 l 5 -3 h 4 v -2 c 1 2 3 4 5 6 z m 3 3 a 5 4 30 1 0 6 7"), "M 10 20 l 5 -3 h 4 v -2 c 1 2 3 4 5 6 z m 3 3 a 5 4 30 1 0 6 7");
    }

    #[test]
    fn clamps_overflow() {
        assert_eq!(q("M 10 10 L 800.2 20"), "M 10 10 l 784 10");
        assert_eq!(q("M 10 10 L -3 20"), "M 10 10 l -10 10");
    }

    #[test]
    fn half_away_from_zero() {
        assert_eq!(quantize(2.5), 3.0);
        assert_eq!(quantize(-2.5), -3.0);
        assert_eq!(quantize(-0.4), 0.0);
        assert!(quantize(-0.4).is_sign_positive());
    }

    #[test]
    fn no_drift_over_many_small_steps() {
        let mut d = String::from("M 0.4 0.4");
        for _ in 0..100 {
            d.push_str(" l 0.6 0.6");
        }
        let out = quantize_path(&parse_path_data(&d).unwrap(), &PreprocessConfig::default());
        let ends = crate::preprocess::endpoints(&out);
        let (x, y) = *ends.last().unwrap();
        assert_eq!((x, y), (60.0, 60.0));
    }

    #[test]
    fn outside_subpath_dropped() {
        assert_eq!(q("M 900 900 l 10 0 z M 10 10 l 5 5"), "M 10 10 l 5 5");
        assert_eq!(q("M 10 10 l 5 5 M 2000 10 l 1 1 M 20 20 h 3"), "M 10 10 l 5 5 m 5 5 h 3");
        // partially outside is kept and clamped
        assert_eq!(q("M 780 10 l 30 0"), "M 780 10 l 14 0");
    }

    #[test]
    fn arc_parameters() {
        assert_eq!(q("M 10 10 A 0.3 7 -30 0 1 20 10"), "M 10 10 a 1 7 150 0 1 10 0");
        assert_eq!(q("M 10 10 A 0 7 0 0 1 20 10"), "M 10 10 a 0 7 0 0 1 10 0");
        assert_eq!(q("M 10 10 A 5000 5000 180 0 1 20 10"), "M 10 10 a 794 794 0 0 1 10 0");
    }
}
