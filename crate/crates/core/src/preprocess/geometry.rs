use crate::ir::{ArcFlags, CommandKind, PathCommand};

use super::TransformMatrix;

/// Rewrites every command in absolute form. `H`/`V` stay one-parameter.
pub fn absolutize(cmds: &[PathCommand]) -> Vec<PathCommand> {
    let mut out = Vec::with_capacity(cmds.len());
    let (mut cx, mut cy) = (0.0, 0.0);
    let (mut sx, mut sy) = (0.0, 0.0);
    for cmd in cmds {
        let kind = cmd.kind();
        let rel = cmd.is_relative();
        let p = cmd.params();
        let abs = match kind {
            CommandKind::HorizontalTo => {
                let x = if rel { p[0] + cx } else { p[0] };
                vec![x]
            }
            CommandKind::VerticalTo => {
                let y = if rel { p[0] + cy } else { p[0] };
                vec![y]
            }
            CommandKind::ArcTo => {
                let (x, y) = if rel { (p[3] + cx, p[4] + cy) } else { (p[3], p[4]) };
                vec![p[0], p[1], p[2], x, y]
            }
            CommandKind::Close => Vec::new(),
            _ => p
                .chunks(2)
                .flat_map(|xy| if rel { [xy[0] + cx, xy[1] + cy] } else { [xy[0], xy[1]] })
                .collect(),
        };
        match kind {
            CommandKind::HorizontalTo => cx = abs[0],
            CommandKind::VerticalTo => cy = abs[0],
            CommandKind::Close => {
                cx = sx;
                cy = sy;
            }
            _ => {
                cx = abs[abs.len() - 2];
                cy = abs[abs.len() - 1];
            }
        }
        if kind == CommandKind::MoveTo {
            sx = cx;
            sy = cy;
        }
        out.push(PathCommand::with_params(kind, false, abs, cmd.flags()));
    }
    out
}

/// Absolute current point after each command.
pub fn endpoints(cmds: &[PathCommand]) -> Vec<(f64, f64)> {
    let abs = absolutize(cmds);
    let mut out = Vec::with_capacity(abs.len());
    let (mut cx, mut cy, mut sx, mut sy) = (0.0, 0.0, 0.0, 0.0);
    for c in &abs {
        let p = c.params();
        match c.kind() {
            CommandKind::HorizontalTo => cx = p[0],
            CommandKind::VerticalTo => cy = p[0],
            CommandKind::Close => {
                cx = sx;
                cy = sy;
            }
            _ => {
                cx = p[p.len() - 2];
                cy = p[p.len() - 1];
            }
        }
        if c.kind() == CommandKind::MoveTo {
            sx = cx;
            sy = cy;
        }
        out.push((cx, cy));
    }
    out
}

/// Maps absolute path data through `m`. `H`/`V` survive only under
/// axis-aligned transforms; otherwise they become `L`.
pub(crate) fn transform_absolute(cmds: &[PathCommand], m: &TransformMatrix) -> Vec<PathCommand> {
    let mut out = Vec::with_capacity(cmds.len());
    let (mut cx, mut cy, mut sx, mut sy) = (0.0, 0.0, 0.0, 0.0);
    let flips = m.determinant() < 0.0;
    for cmd in cmds {
        debug_assert!(!cmd.is_relative());
        let p = cmd.params();
        let new = match cmd.kind() {
            CommandKind::HorizontalTo => {
                let (nx, ny) = m.apply(p[0], cy);
                cx = p[0];
                if m.is_axis_aligned() {
                    PathCommand::with_params(CommandKind::HorizontalTo, false, vec![nx], None)
                } else {
                    PathCommand::line_to(false, nx, ny)
                }
            }
            CommandKind::VerticalTo => {
                let (nx, ny) = m.apply(cx, p[0]);
                cy = p[0];
                if m.is_axis_aligned() {
                    PathCommand::with_params(CommandKind::VerticalTo, false, vec![ny], None)
                } else {
                    PathCommand::line_to(false, nx, ny)
                }
            }
            CommandKind::ArcTo => {
                let (rx, ry, rot) = if m.is_axis_aligned() && m.a.abs() == m.d.abs() {
                    // similarity without rotation: radii scale, angle only mirrors
                    let s = m.a.abs();
                    let rot = if m.a * m.d < 0.0 { (-p[2]).rem_euclid(180.0) } else { p[2] };
                    (p[0].abs() * s, p[1].abs() * s, rot)
                } else {
                    transform_arc(p[0], p[1], p[2], m)
                };
                let (x, y) = m.apply(p[3], p[4]);
                let fl = cmd.flags().expect("arc flags");
                cx = p[3];
                cy = p[4];
                PathCommand::with_params(
                    CommandKind::ArcTo,
                    false,
                    vec![rx, ry, rot, x, y],
                    Some(ArcFlags { large_arc: fl.large_arc, sweep: fl.sweep != flips }),
                )
            }
            CommandKind::Close => {
                cx = sx;
                cy = sy;
                cmd.clone()
            }
            kind => {
                let mapped: Vec<f64> = p
                    .chunks(2)
                    .flat_map(|xy| {
                        let (x, y) = m.apply(xy[0], xy[1]);
                        [x, y]
                    })
                    .collect();
                cx = p[p.len() - 2];
                cy = p[p.len() - 1];
                PathCommand::with_params(kind, false, mapped, None)
            }
        };
        if cmd.kind() == CommandKind::MoveTo {
            sx = cx;
            sy = cy;
        }
        out.push(new);
    }
    out
}

/// Image of an ellipse `(rx, ry, rotation°)` under the linear part of `m`.
///
/// Returns non-negative radii and a rotation in `[0, 180)`.
pub fn transform_arc(rx: f64, ry: f64, rotation_deg: f64, m: &TransformMatrix) -> (f64, f64, f64) {
    let (rx, ry) = (rx.abs(), ry.abs());
    let (s, c) = rotation_deg.to_radians().sin_cos();
    // columns of M·R(θ)·diag(rx, ry)
    let ma = [
        rx * (m.a * c + m.c * s),
        rx * (m.b * c + m.d * s),
        ry * (-m.a * s + m.c * c),
        ry * (-m.b * s + m.d * c),
    ];
    // ma·maᵀ = [[j, l], [l, k]]
    let j = ma[0] * ma[0] + ma[2] * ma[2];
    let k = ma[1] * ma[1] + ma[3] * ma[3];
    let l = ma[0] * ma[1] + ma[2] * ma[3];
    let mean = (j + k) / 2.0;
    let half_gap = (((j - k) / 2.0).powi(2) + l * l).sqrt();
    if half_gap <= 1e-12 * mean.max(f64::MIN_POSITIVE) {
        let r = mean.sqrt();
        return (r, r, 0.0);
    }
    let l1 = mean + half_gap;
    let l2 = (mean - half_gap).max(0.0);
    // major axis along the l1 eigenvector; pick the better-conditioned form
    let angle = if j >= k { l.atan2(l1 - k) } else { (l1 - j).atan2(l) }.to_degrees();
    let mut rot = angle.rem_euclid(180.0);
    if rot >= 180.0 {
        rot -= 180.0;
    }
    (l1.sqrt(), l2.sqrt(), rot)
}
