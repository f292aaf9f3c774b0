//! Structural cleaning and style normalization.

use crate::ir::{is_structure_element, Element, PathCommand, SvgDocument};

use super::{parse_number_attr, PreprocessConfig, PreprocessError};

/// Fill written onto rendered paths that have none in scope.
pub const DEFAULT_FILL: &str = "#000000";

/// CSS properties that have an equivalent presentation attribute.
const PRESENTATION: &[&str] = &[
    "clip-path",
    "clip-rule",
    "color",
    "display",
    "dominant-baseline",
    "fill",
    "fill-opacity",
    "fill-rule",
    "font-family",
    "font-size",
    "font-style",
    "font-weight",
    "isolation",
    "mask",
    "mix-blend-mode",
    "opacity",
    "paint-order",
    "shape-rendering",
    "stop-color",
    "stop-opacity",
    "stroke",
    "stroke-dasharray",
    "stroke-dashoffset",
    "stroke-linecap",
    "stroke-linejoin",
    "stroke-miterlimit",
    "stroke-opacity",
    "stroke-width",
    "text-anchor",
    "vector-effect",
    "visibility",
];

const COLOR_PROPS: &[&str] = &["fill", "stroke", "stop-color", "flood-color", "lighting-color", "color"];

/// Elements whose content is only rendered through a reference.
const TEMPLATE_TAGS: &[&str] = &["defs", "symbol", "clipPath"];

/// Elements that do not render on their own and should not receive
/// presentation attributes pushed down from the root.
const NON_RENDERED: &[&str] = &[
    "defs",
    "title",
    "desc",
    "linearGradient",
    "radialGradient",
    "clipPath",
    "mask",
    "pattern",
    "symbol",
];

/// Unsupported wrappers whose children are kept.
const UNWRAP_TAGS: &[&str] = &["a"];

/// Removes unsafe and unsupported content and normalizes styling.
///
/// * any `reject_tags` element rejects the document
/// * `drop_tags` and elements without a structure token are removed
/// * `<style>` rules with simple selectors and inline `style` are merged into
///   presentation attributes
/// * colors become lowercase hex
/// * basic shapes are rewritten as `<path>`
/// * root presentation attributes move to the root's rendered children and
///   the root keeps only its viewBox
/// * rendered paths with no fill in scope get [`DEFAULT_FILL`]
pub fn clean_document(doc: SvgDocument, cfg: &PreprocessConfig) -> Result<SvgDocument, PreprocessError> {
    let mut rejected = None;
    doc.root.walk(&mut |e| {
        if rejected.is_none() && cfg.reject_tags.contains(&e.tag) {
            rejected = Some(e.tag.clone());
        }
    });
    if let Some(tag) = rejected {
        return Err(PreprocessError::RejectedContent(tag));
    }

    let mut rules = Vec::new();
    doc.root.walk(&mut |e| {
        if e.tag == "style" {
            if let Some(t) = &e.text {
                parse_stylesheet(t, &mut rules);
            }
        }
    });
    rules.sort_by_key(|r| r.specificity);

    let ctx = Scope::default();
    let SvgDocument { viewbox, root, .. } = doc;

    let mut root = normalize_own(root, &rules, &ctx);
    let root_attrs: Vec<(String, String)> = std::mem::take(&mut root.attributes)
        .into_iter()
        .filter(|(k, _)| PRESENTATION.contains(&k.as_str()))
        .collect();
    let scope = ctx.enter(&root_attrs, "svg");

    let mut children = Vec::new();
    for child in std::mem::take(&mut root.children) {
        for mut c in clean_children(child, &rules, cfg, &scope) {
            if !NON_RENDERED.contains(&c.tag.as_str()) {
                for (k, v) in &root_attrs {
                    if c.attr(k).is_none() {
                        c.attributes.push((k.clone(), v.clone()));
                    }
                }
            }
            children.push(c);
        }
    }
    root.children = children;
    root.text = None;

    Ok(SvgDocument { viewbox, root, namespaces: Vec::new() })
}

#[derive(Clone, Default)]
struct Scope {
    fill: bool,
    color: Option<String>,
    in_template: bool,
}

impl Scope {
    fn enter(&self, attrs: &[(String, String)], tag: &str) -> Scope {
        let get = |n: &str| attrs.iter().find(|(k, _)| k == n).map(|(_, v)| v.as_str());
        Scope {
            fill: self.fill || get("fill").is_some(),
            color: get("color").map(String::from).or_else(|| self.color.clone()),
            in_template: self.in_template || TEMPLATE_TAGS.contains(&tag),
        }
    }
}

/// Cleans one element; returns zero (dropped), one, or several (unwrapped)
/// elements.
fn clean_children(el: Element, rules: &[CssRule], cfg: &PreprocessConfig, scope: &Scope) -> Vec<Element> {
    if cfg.drop_tags.contains(&el.tag) || el.tag == "style" {
        return Vec::new();
    }
    if UNWRAP_TAGS.contains(&el.tag.as_str()) {
        return el.children.into_iter().flat_map(|c| clean_children(c, rules, cfg, scope)).collect();
    }
    if !is_structure_element(&el.tag) {
        log::debug!("dropping unsupported element <{}>", el.tag);
        return Vec::new();
    }

    let mut el = normalize_own(el, rules, scope);
    if let Some(shape) = shape_to_path(&el) {
        match shape {
            Some(p) => el = p,
            None => return Vec::new(),
        }
    }

    let inner = scope.enter(&el.attributes, &el.tag);
    if el.path_data.is_some() && !inner.fill && !inner.in_template {
        el.attributes.push(("fill".into(), DEFAULT_FILL.into()));
    }
    el.children = std::mem::take(&mut el.children)
        .into_iter()
        .flat_map(|c| clean_children(c, rules, cfg, &inner))
        .collect();
    vec![el]
}

/// Style merging, attribute filtering, color and whitespace normalization for
/// a single element (children untouched).
fn normalize_own(mut el: Element, rules: &[CssRule], scope: &Scope) -> Element {
    let classes: Vec<String> = el
        .attr("class")
        .map(|c| c.split_whitespace().map(String::from).collect())
        .unwrap_or_default();
    let id = el.attr("id").map(String::from);
    let inline = el.attr("style").map(String::from);

    let mut decls = Vec::new();
    for rule in rules {
        if rule.selector.matches(&el.tag, id.as_deref(), &classes) {
            decls.extend(rule.declarations.iter().cloned());
        }
    }
    if let Some(style) = inline {
        decls.extend(parse_declarations(&style));
    }

    let mut attrs: Vec<(String, String)> = Vec::with_capacity(el.attributes.len());
    for (k, v) in std::mem::take(&mut el.attributes) {
        let name = match k.as_str() {
            "xlink:href" => "href".to_string(),
            _ => k,
        };
        if drop_attribute(&name) {
            continue;
        }
        upsert(&mut attrs, name, v);
    }
    for (k, v) in decls {
        if PRESENTATION.contains(&k.as_str()) {
            upsert(&mut attrs, k, v);
        }
    }

    let color_in_scope = attrs
        .iter()
        .find(|(k, _)| k == "color")
        .map(|(_, v)| v.clone())
        .or_else(|| scope.color.clone());
    for (k, v) in attrs.iter_mut() {
        *v = collapse_whitespace(v);
        if COLOR_PROPS.contains(&k.as_str()) {
            *v = normalize_color(v, color_in_scope.as_deref());
        }
    }
    el.attributes = attrs;
    el.text = el.text.map(|t| collapse_whitespace(&t)).filter(|t| !t.is_empty());
    el
}

fn upsert(attrs: &mut Vec<(String, String)>, k: String, v: String) {
    match attrs.iter_mut().find(|(n, _)| *n == k) {
        Some(slot) => slot.1 = v,
        None => attrs.push((k, v)),
    }
}

fn drop_attribute(name: &str) -> bool {
    name == "class"
        || name == "style"
        || name == "version"
        || name == "baseProfile"
        || name == "enable-background"
        || name == "role"
        || name.starts_with("on")
        || name.starts_with("data-")
        || name.starts_with("aria-")
        || name.contains(':')
}

fn collapse_whitespace(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Lowercase `#rrggbb` (or `#rrggbbaa` with alpha); keywords and paint
/// server references pass through; unparsable colors become the default.
fn normalize_color(v: &str, current_color: Option<&str>) -> String {
    let lower = v.trim().to_ascii_lowercase();
    match lower.as_str() {
        "none" | "inherit" => return lower,
        "currentcolor" => {
            return match current_color {
                Some(c) if !c.eq_ignore_ascii_case("currentcolor") => normalize_color(c, None),
                _ => DEFAULT_FILL.to_string(),
            }
        }
        _ => {}
    }
    if lower.starts_with("url(") {
        return v.trim().to_string();
    }
    match csscolorparser::parse(&lower) {
        Ok(c) => c.to_css_hex().to_string().to_ascii_lowercase(),
        Err(_) => DEFAULT_FILL.to_string(),
    }
}

fn attr_num(el: &Element, name: &str) -> Option<f64> {
    el.attr(name).and_then(parse_number_attr)
}

/// `None` when the element is not a basic shape; `Some(None)` when it is a
/// shape that renders nothing.
fn shape_to_path(el: &Element) -> Option<Option<Element>> {
    let geometry: &[&str] = match el.tag.as_str() {
        "rect" => &["x", "y", "width", "height", "rx", "ry"],
        "circle" => &["cx", "cy", "r"],
        "ellipse" => &["cx", "cy", "rx", "ry"],
        "line" => &["x1", "y1", "x2", "y2"],
        "polyline" | "polygon" => &["points"],
        _ => return None,
    };
    let num = |n: &str| attr_num(el, n).unwrap_or(0.0);
    let cmds = match el.tag.as_str() {
        "rect" => {
            let (x, y, w, h) = (num("x"), num("y"), num("width"), num("height"));
            if w <= 0.0 || h <= 0.0 {
                return Some(None);
            }
            let (rx, ry) = match (attr_num(el, "rx"), attr_num(el, "ry")) {
                (None, None) => (0.0, 0.0),
                (Some(r), None) | (None, Some(r)) => (r, r),
                (Some(a), Some(b)) => (a, b),
            };
            let rx = rx.max(0.0).min(w / 2.0);
            let ry = ry.max(0.0).min(h / 2.0);
            if rx == 0.0 || ry == 0.0 {
                vec![
                    PathCommand::move_to(false, x, y),
                    PathCommand::line_to(false, x + w, y),
                    PathCommand::line_to(false, x + w, y + h),
                    PathCommand::line_to(false, x, y + h),
                    PathCommand::close(false),
                ]
            } else {
                vec![
                    PathCommand::move_to(false, x + rx, y),
                    PathCommand::line_to(false, x + w - rx, y),
                    PathCommand::arc_to(false, rx, ry, 0.0, false, true, x + w, y + ry),
                    PathCommand::line_to(false, x + w, y + h - ry),
                    PathCommand::arc_to(false, rx, ry, 0.0, false, true, x + w - rx, y + h),
                    PathCommand::line_to(false, x + rx, y + h),
                    PathCommand::arc_to(false, rx, ry, 0.0, false, true, x, y + h - ry),
                    PathCommand::line_to(false, x, y + ry),
                    PathCommand::arc_to(false, rx, ry, 0.0, false, true, x + rx, y),
                    PathCommand::close(false),
                ]
            }
        }
        "circle" | "ellipse" => {
            let (cx, cy) = (num("cx"), num("cy"));
            let (rx, ry) = if el.tag == "circle" {
                (num("r"), num("r"))
            } else {
                match (attr_num(el, "rx"), attr_num(el, "ry")) {
                    (Some(a), Some(b)) => (a, b),
                    (Some(r), None) | (None, Some(r)) => (r, r),
                    (None, None) => (0.0, 0.0),
                }
            };
            if rx <= 0.0 || ry <= 0.0 {
                return Some(None);
            }
            vec![
                PathCommand::move_to(false, cx + rx, cy),
                PathCommand::arc_to(false, rx, ry, 0.0, false, true, cx - rx, cy),
                PathCommand::arc_to(false, rx, ry, 0.0, false, true, cx + rx, cy),
                PathCommand::close(false),
            ]
        }
        "line" => vec![
            PathCommand::move_to(false, num("x1"), num("y1")),
            PathCommand::line_to(false, num("x2"), num("y2")),
        ],
        _ => {
            let nums: Vec<f64> = el
                .attr("points")
                .unwrap_or("")
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|t| !t.is_empty())
                .map_while(|t| t.parse::<f64>().ok().filter(|v| v.is_finite()))
                .collect();
            let pts: Vec<(f64, f64)> = nums.chunks_exact(2).map(|p| (p[0], p[1])).collect();
            if pts.is_empty() {
                return Some(None);
            }
            let mut cmds = vec![PathCommand::move_to(false, pts[0].0, pts[0].1)];
            cmds.extend(pts[1..].iter().map(|&(x, y)| PathCommand::line_to(false, x, y)));
            if el.tag == "polygon" {
                cmds.push(PathCommand::close(false));
            }
            cmds
        }
    };
    let mut path = Element::path(cmds);
    path.attributes = el
        .attributes
        .iter()
        .filter(|(k, _)| !geometry.contains(&k.as_str()))
        .cloned()
        .collect();
    path.children = el.children.clone();
    path.text = el.text.clone();
    Some(Some(path))
}

#[derive(Debug, Clone)]
struct Selector {
    tag: Option<String>,
    id: Option<String>,
    classes: Vec<String>,
}

impl Selector {
    fn parse(s: &str) -> Option<Self> {
        let s = s.trim();
        if s.is_empty() || s.contains(|c: char| c.is_whitespace() || "> +~:[*".contains(c)) {
            return None;
        }
        let mut sel = Selector { tag: None, id: None, classes: Vec::new() };
        let mut rest = s;
        let head_end = rest.find(['.', '#']).unwrap_or(rest.len());
        if head_end > 0 {
            sel.tag = Some(rest[..head_end].to_string());
        }
        rest = &rest[head_end..];
        while !rest.is_empty() {
            let marker = rest.as_bytes()[0];
            let body = &rest[1..];
            let end = body.find(['.', '#']).unwrap_or(body.len());
            let name = &body[..end];
            if name.is_empty() {
                return None;
            }
            if marker == b'.' {
                sel.classes.push(name.to_string());
            } else {
                sel.id = Some(name.to_string());
            }
            rest = &body[end..];
        }
        Some(sel)
    }

    fn specificity(&self) -> (usize, usize, usize) {
        (self.id.is_some() as usize, self.classes.len(), self.tag.is_some() as usize)
    }

    fn matches(&self, tag: &str, id: Option<&str>, classes: &[String]) -> bool {
        self.tag.as_deref().map_or(true, |t| t == tag)
            && self.id.as_deref().map_or(true, |i| Some(i) == id)
            && self.classes.iter().all(|c| classes.contains(c))
    }
}

#[derive(Debug, Clone)]
struct CssRule {
    selector: Selector,
    specificity: (usize, usize, usize),
    declarations: Vec<(String, String)>,
}

/// Simple-selector subset of CSS: type, class and id selectors (compounds
/// allowed), comma lists. Rules with combinators or pseudo-classes are
/// skipped. Source order is preserved for equal specificity.
fn parse_stylesheet(css: &str, out: &mut Vec<CssRule>) {
    let mut text = String::with_capacity(css.len());
    let mut rest = css;
    while let Some(start) = rest.find("/*") {
        text.push_str(&rest[..start]);
        rest = rest[start + 2..].find("*/").map_or("", |e| &rest[start + 2 + e + 2..]);
    }
    text.push_str(rest);

    for block in text.split('}') {
        let Some((sels, body)) = block.split_once('{') else { continue };
        if sels.trim_start().starts_with('@') {
            continue;
        }
        let decls = parse_declarations(body);
        for s in sels.split(',') {
            if let Some(selector) = Selector::parse(s) {
                out.push(CssRule { specificity: selector.specificity(), selector, declarations: decls.clone() });
            }
        }
    }
}

fn parse_declarations(body: &str) -> Vec<(String, String)> {
    body.split(';')
        .filter_map(|d| {
            let (k, v) = d.split_once(':')?;
            let v = v.trim().trim_end_matches("!important").trim();
            let k = k.trim().to_ascii_lowercase();
            (!k.is_empty() && !v.is_empty()).then(|| (k, v.to_string()))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::{parse_svg, write_path_data};

    fn clean(src: &str) -> Result<SvgDocument, PreprocessError> {
        clean_document(parse_svg(src).unwrap(), &PreprocessConfig::default())
    }

    #[test]
    fn inline_style_becomes_hex_attribute() {
        let doc = clean(r#"<svg viewBox="0 0 10 10"><path style="fill:red" d="M0 0h1"/></svg>"#).unwrap();
        let p = &doc.root.children[0];
        assert_eq!(p.attributes, vec![("fill".to_string(), "#ff0000".to_string())]);
    }

    #[test]
    fn rejects_script_and_image() {
        assert_eq!(
            clean(r#"<svg viewBox="0 0 10 10"><g><image href="x.png"/></g></svg>"#).unwrap_err(),
            PreprocessError::RejectedContent("image".into())
        );
    }

    #[test]
    fn clean_document_is_fixed_point() {
        let doc = clean(r##"<svg viewBox="0 0 10 10"><g fill="#00ff00"><path d="M0 0h1"/></g></svg>"##).unwrap();
        assert_eq!(clean_document(doc.clone(), &PreprocessConfig::default()).unwrap(), doc);
    }

    #[test]
    fn drops_foreign_and_unsupported() {
        let doc = clean(
            r#"<svg xmlns:i="urn:x" viewBox="0 0 10 10" width="10" class="k" i:v="1">
                 <foreignObject><div/></foreignObject><metadata/><a><path d="M0 0h1"/></a></svg>"#,
        )
        .unwrap();
        assert!(doc.root.attributes.is_empty());
        assert!(doc.namespaces.is_empty());
        assert_eq!(doc.root.children.len(), 1);
        assert_eq!(doc.root.children[0].tag, "path");
        assert_eq!(doc.root.children[0].attr("fill"), Some(DEFAULT_FILL));
    }

    #[test]
    fn stylesheet_rules_and_precedence() {
        let doc = clean(
            r#"<svg viewBox="0 0 10 10"><style>/* c */ .a{fill:#ABC;stroke:blue} path.a{stroke:lime}
                 #z{fill:white !important} g > path{fill:red}</style>
                 <path class="a" d="M0 0h1"/><path id="z" class="a" fill="black" d="M0 0h1"/>
                 <path class="a" style="fill:teal" d="M0 0h1"/></svg>"#,
        )
        .unwrap();
        let c = &doc.root.children;
        assert_eq!(c[0].attr("fill"), Some("#aabbcc"));
        assert_eq!(c[0].attr("stroke"), Some("#00ff00"));
        assert_eq!(c[1].attr("fill"), Some("#ffffff"));
        assert_eq!(c[1].attr("id"), Some("z"));
        assert_eq!(c[2].attr("fill"), Some("#008080"));
    }

    #[test]
    fn root_presentation_moves_to_children() {
        let doc = clean(
            r#"<svg viewBox="0 0 24 24" fill="none" stroke="currentColor" stroke-width="2">
                 <title>x</title><polyline points="1 2 3 4 5"/></svg>"#,
        )
        .unwrap();
        let title = &doc.root.children[0];
        assert!(title.attributes.is_empty());
        let p = &doc.root.children[1];
        assert_eq!(p.tag, "path");
        assert_eq!(write_path_data(p.path_data.as_ref().unwrap()), "M 1 2 L 3 4");
        assert_eq!(p.attr("fill"), Some("none"));
        assert_eq!(p.attr("stroke"), Some("#000000"));
        assert_eq!(p.attr("stroke-width"), Some("2"));
    }

    #[test]
    fn shapes_become_paths() {
        let doc = clean(
            r#"<svg viewBox="0 0 24 24"><rect x="1" y="2" width="3" height="4"/>
               <rect width="10" height="10" rx="2"/><circle cx="5" cy="5" r="2" fill="red"/>
               <ellipse rx="0" ry="1"/><line x1="1" y1="1" x2="2" y2="3"/><polygon points="0,0 1,0 1,1"/>
               <rect width="0" height="3"/></svg>"#,
        )
        .unwrap();
        let d: Vec<String> =
            doc.root.children.iter().map(|e| write_path_data(e.path_data.as_ref().unwrap())).collect();
        assert_eq!(d.len(), 5);
        assert_eq!(d[0], "M 1 2 L 4 2 L 4 6 L 1 6 Z");
        assert!(d[1].starts_with("M 2 0 L 8 0 A 2 2 0 0 1 10 2"));
        assert_eq!(d[2], "M 7 5 A 2 2 0 0 1 3 5 A 2 2 0 0 1 7 5 Z");
        assert_eq!(d[3], "M 1 1 L 2 3");
        assert_eq!(d[4], "M 0 0 L 1 0 L 1 1 Z");
        assert_eq!(doc.root.children[2].attributes, vec![("fill".to_string(), "#ff0000".to_string())]);
    }

    #[test]
    fn templates_are_not_filled() {
        let doc = clean(
            r##"<svg viewBox="0 0 10 10"><defs><path id="p" d="M0 0h1"/></defs><use href="#p" fill="red"/></svg>"##,
        )
        .unwrap();
        assert_eq!(doc.root.children[0].children[0].attr("fill"), None);
        assert_eq!(doc.root.children[1].attr("fill"), Some("#ff0000"));
    }

    #[test]
    fn color_forms() {
        assert_eq!(normalize_color("rgb(255, 0, 0)", None), "#ff0000");
        assert_eq!(normalize_color("#FFF", None), "#ffffff");
        assert_eq!(normalize_color("none", None), "none");
        assert_eq!(normalize_color("url(#g)", None), "url(#g)");
        assert_eq!(normalize_color("currentColor", Some("blue")), "#0000ff");
        assert_eq!(normalize_color("currentColor", None), DEFAULT_FILL);
        assert_eq!(normalize_color("rgba(0,0,0,0.5)", None), "#00000080");
        assert_eq!(normalize_color("notacolor", None), DEFAULT_FILL);
    }
}
