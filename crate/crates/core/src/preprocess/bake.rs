use crate::ir::{Element, SvgDocument};

use super::geometry::{absolutize, transform_absolute};
use super::{format_attr_number, parse_number_attr, parse_transform_list, PreprocessError, TransformMatrix};

const SINGULAR_EPS: f64 = 1e-9;

/// Folds every `transform` attribute into the coordinates below it.
///
/// All path data comes out absolute. Stroke widths and text positions are
/// carried along so the rendering stays the same.
pub fn bake_transforms(mut doc: SvgDocument) -> Result<SvgDocument, PreprocessError> {
    let scope = Inherited { ctm: TransformMatrix::IDENTITY, stroke_width: None };
    bake(&mut doc.root, &scope)?;
    Ok(doc)
}

#[derive(Clone, Copy)]
struct Inherited {
    ctm: TransformMatrix,
    /// Stroke width in the coordinate system of the nearest element that set
    /// it explicitly, if any did.
    stroke_width: Option<f64>,
}

fn bake(el: &mut Element, parent: &Inherited) -> Result<(), PreprocessError> {
    let mut ctm = parent.ctm;
    if let Some(t) = el.remove_attr("transform") {
        let local = parse_transform_list(&t).ok_or(PreprocessError::BadTransform(t))?;
        ctm = ctm * local;
        let det = ctm.determinant();
        if det.abs() < SINGULAR_EPS || !det.is_finite() {
            return Err(PreprocessError::SingularTransform(det));
        }
    }

    let own_sw = el.attr("stroke-width").and_then(parse_number_attr);
    let sw = own_sw.or(parent.stroke_width);
    if let Some(w) = sw {
        let changed = (ctm.mean_scale() - parent.ctm.mean_scale()).abs() > 1e-12;
        if own_sw.is_some() || changed {
            el.set_attr("stroke-width", format_attr_number(w * ctm.mean_scale()));
        }
    }

    if let Some(cmds) = el.path_data.as_mut() {
        let abs = absolutize(cmds);
        *cmds = if ctm.is_identity() { abs } else { transform_absolute(&abs, &ctm) };
    }
    if el.tag == "text" && !ctm.is_identity() {
        map_text(el, &ctm);
    }

    let scope = Inherited { ctm, stroke_width: sw };
    for child in el.children.iter_mut() {
        bake(child, &scope)?;
    }
    Ok(())
}

fn map_text(el: &mut Element, m: &TransformMatrix) {
    let x = el.attr("x").and_then(parse_number_attr).unwrap_or(0.0);
    let y = el.attr("y").and_then(parse_number_attr).unwrap_or(0.0);
    let (nx, ny) = m.apply(x, y);
    el.set_attr("x", format_attr_number(nx));
    el.set_attr("y", format_attr_number(ny));
    if let Some(fs) = el.attr("font-size").and_then(parse_number_attr) {
        el.set_attr("font-size", format_attr_number(fs * m.mean_scale()));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::{parse_svg, write_path_data, CommandKind};

    fn first_path(doc: &SvgDocument) -> Element {
        let mut out = None;
        doc.root.walk(&mut |e| {
            if e.tag == "path" && out.is_none() {
                out = Some(e.clone());
            }
        });
        out.unwrap()
    }

    #[test]
    fn translation_is_folded() {
        let doc = parse_svg(r#"<svg viewBox="0 0 50 50"><g transform="translate(10,20)"><path d="M1 0"/></g></svg>"#)
            .unwrap();
        let doc = bake_transforms(doc).unwrap();
        let p = first_path(&doc);
        assert_eq!(write_path_data(p.path_data.as_ref().unwrap()), "M 11 20");
        let mut transforms = 0;
        doc.root.walk(&mut |e| transforms += e.attr("transform").is_some() as usize);
        assert_eq!(transforms, 0);
    }

    #[test]
    fn rotated_h_becomes_l() {
        let doc = parse_svg(r#"<svg viewBox="0 0 50 50"><path transform="rotate(90)" d="M0 0 H5"/></svg>"#).unwrap();
        let doc = bake_transforms(doc).unwrap();
        let cmds = first_path(&doc).path_data.unwrap();
        assert_eq!(cmds[1].kind(), CommandKind::LineTo);
        let p = cmds[1].params();
        assert!(p[0].abs() < 1e-12 && (p[1] - 5.0).abs() < 1e-12);
    }

    #[test]
    fn singular_and_bad_transforms() {
        let doc = parse_svg(r#"<svg viewBox="0 0 50 50"><path transform="scale(0,1)" d="M0 0 H5"/></svg>"#).unwrap();
        assert!(matches!(bake_transforms(doc), Err(PreprocessError::SingularTransform(_))));
        let doc = parse_svg(r#"<svg viewBox="0 0 50 50"><path transform="spin(3)" d="M0 0 H5"/></svg>"#).unwrap();
        assert!(matches!(bake_transforms(doc), Err(PreprocessError::BadTransform(_))));
    }

    #[test]
    fn nested_transforms_compose_outer_last() {
        let doc = parse_svg(
            r#"<svg viewBox="0 0 50 50"><g transform="translate(5 0)"><g transform="scale(2)"><path d="M1 1 l1 0"/></g></g></svg>"#,
        )
        .unwrap();
        let doc = bake_transforms(doc).unwrap();
        assert_eq!(write_path_data(first_path(&doc).path_data.as_ref().unwrap()), "M 7 2 L 9 2");
    }

    #[test]
    fn stroke_width_follows_scale() {
        let doc = parse_svg(
            r#"<svg viewBox="0 0 50 50"><g stroke-width="1.5"><path transform="scale(2)" d="M1 1 h1"/><path d="M0 0 h1"/></g></svg>"#,
        )
        .unwrap();
        let doc = bake_transforms(doc).unwrap();
        let g = &doc.root.children[0];
        assert_eq!(g.attr("stroke-width"), Some("1.5"));
        assert_eq!(g.children[0].attr("stroke-width"), Some("3"));
        assert_eq!(g.children[1].attr("stroke-width"), None);
    }
}
