use crate::ir::{Element, SvgDocument, ViewBox};

use super::geometry::{absolutize, transform_absolute};
use super::{format_attr_number, parse_number_attr, PreprocessConfig, PreprocessError, TransformMatrix};

/// Moves the viewBox origin to `(0, 0)` and scales uniformly so the longer
/// side spans the canvas.
pub fn normalize_viewbox(mut doc: SvgDocument, cfg: &PreprocessConfig) -> Result<SvgDocument, PreprocessError> {
    let vb = doc.viewbox;
    if !vb.is_valid() {
        return Err(PreprocessError::DegenerateViewBox { width: vb.width, height: vb.height });
    }
    let canvas = cfg.canvas as f64;
    let s = canvas / vb.width.max(vb.height);
    let m = TransformMatrix::scale(s, s) * TransformMatrix::translate(-vb.min_x, -vb.min_y);
    if !m.is_identity() {
        map_element(&mut doc.root, &m, s, false);
    }
    doc.viewbox = ViewBox::square(canvas);
    Ok(doc)
}

fn map_element(el: &mut Element, m: &TransformMatrix, s: f64, width_in_scope: bool) {
    let mut width_in_scope = width_in_scope;
    if let Some(w) = el.attr("stroke-width").and_then(parse_number_attr) {
        el.set_attr("stroke-width", format_attr_number(w * s));
        width_in_scope = true;
    } else if !width_in_scope && el.attr("stroke").is_some_and(|v| v != "none") {
        // the implicit 1-unit default must scale with the geometry too
        el.set_attr("stroke-width", format_attr_number(s));
        width_in_scope = true;
    }
    if let Some(cmds) = el.path_data.as_mut() {
        *cmds = transform_absolute(&absolutize(cmds), m);
    }
    if el.tag == "text" {
        let x = el.attr("x").and_then(parse_number_attr).unwrap_or(0.0);
        let y = el.attr("y").and_then(parse_number_attr).unwrap_or(0.0);
        let (nx, ny) = m.apply(x, y);
        el.set_attr("x", format_attr_number(nx));
        el.set_attr("y", format_attr_number(ny));
        if let Some(fs) = el.attr("font-size").and_then(parse_number_attr) {
            el.set_attr("font-size", format_attr_number(fs * s));
        }
    }
    for child in el.children.iter_mut() {
        map_element(child, m, s, width_in_scope);
    }
}
