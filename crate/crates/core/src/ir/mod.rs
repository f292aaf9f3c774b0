//! In-memory SVG document model.
//!
//! Documents are parsed with `roxmltree` into a small owned tree. Path `d`
//! attributes are parsed eagerly into [`PathCommand`] lists; the root
//! `viewBox` is lifted into [`SvgDocument::viewbox`]; namespace declarations
//! are dropped and regenerated by the serializer. Everything else is kept
//! verbatim in source order so the preprocess stage can decide policy.

mod parse;
mod path;
mod write;

pub use parse::parse_svg;
pub use path::{format_number, parse_path_data, write_path_data, ArcFlags, ArityError, CommandKind, PathCommand};
pub use write::serialize_svg;

pub const SVG_NS: &str = "http://www.w3.org/2000/svg";
pub const XLINK_NS: &str = "http://www.w3.org/1999/xlink";

/// Element names that have structure tokens, in vocabulary order.
pub const STRUCTURE_ELEMENTS: [&str; 21] = [
    "svg",
    "path",
    "g",
    "rect",
    "circle",
    "ellipse",
    "line",
    "polyline",
    "polygon",
    "defs",
    "use",
    "linearGradient",
    "radialGradient",
    "stop",
    "clipPath",
    "mask",
    "pattern",
    "symbol",
    "text",
    "title",
    "desc",
];

pub fn is_structure_element(tag: &str) -> bool {
    STRUCTURE_ELEMENTS.contains(&tag)
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("malformed markup: {0}")]
    MalformedMarkup(String),
    #[error("bad path data: {0}")]
    BadPathData(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ViewBox {
    pub min_x: f64,
    pub min_y: f64,
    pub width: f64,
    pub height: f64,
}

impl ViewBox {
    pub fn new(min_x: f64, min_y: f64, width: f64, height: f64) -> Self {
        Self { min_x, min_y, width, height }
    }

    pub fn square(size: f64) -> Self {
        Self::new(0.0, 0.0, size, size)
    }

    /// Width and height strictly positive. Parsing keeps degenerate boxes so
    /// normalization can report them.
    pub fn is_valid(&self) -> bool {
        self.width > 0.0 && self.height > 0.0
    }

    pub fn parse(s: &str) -> Option<Self> {
        let nums: Vec<f64> = s
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(|t| t.parse::<f64>().ok().filter(|v| v.is_finite()))
            .collect::<Option<_>>()?;
        match nums[..] {
            [a, b, c, d] => Some(Self::new(a, b, c, d)),
            _ => None,
        }
    }
}

impl std::fmt::Display for ViewBox {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} {} {} {}",
            format_number(self.min_x),
            format_number(self.min_y),
            format_number(self.width),
            format_number(self.height)
        )
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Element {
    pub tag: String,
    pub attributes: Vec<(String, String)>,
    /// `Some` exactly when `tag == "path"`.
    pub path_data: Option<Vec<PathCommand>>,
    /// Character data directly inside the element, if any non-blank text.
    pub text: Option<String>,
    pub children: Vec<Element>,
}

impl Element {
    pub fn new(tag: impl Into<String>) -> Self {
        let tag = tag.into();
        let path_data = (tag == "path").then(Vec::new);
        Self { tag, path_data, ..Default::default() }
    }

    pub fn path(cmds: Vec<PathCommand>) -> Self {
        Self { tag: "path".into(), path_data: Some(cmds), ..Default::default() }
    }

    pub fn attr(&self, name: &str) -> Option<&str> {
        self.attributes.iter().find(|(k, _)| k == name).map(|(_, v)| v.as_str())
    }

    pub fn set_attr(&mut self, name: &str, value: impl Into<String>) {
        let value = value.into();
        match self.attributes.iter_mut().find(|(k, _)| k == name) {
            Some(slot) => slot.1 = value,
            None => self.attributes.push((name.to_string(), value)),
        }
    }

    pub fn remove_attr(&mut self, name: &str) -> Option<String> {
        let idx = self.attributes.iter().position(|(k, _)| k == name)?;
        Some(self.attributes.remove(idx).1)
    }

    pub fn is_supported(&self) -> bool {
        is_structure_element(&self.tag)
    }

    /// Pre-order traversal.
    pub fn walk(&self, f: &mut impl FnMut(&Element)) {
        f(self);
        for c in &self.children {
            c.walk(f);
        }
    }

    pub fn walk_mut(&mut self, f: &mut impl FnMut(&mut Element)) {
        f(self);
        for c in &mut self.children {
            c.walk_mut(f);
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvgDocument {
    pub viewbox: ViewBox,
    pub root: Element,
    /// Prefix → URI for namespaced names used in the tree (`xml` excluded).
    pub namespaces: Vec<(String, String)>,
}

impl SvgDocument {
    pub fn new(viewbox: ViewBox, root: Element) -> Self {
        Self { viewbox, root, namespaces: Vec::new() }
    }

    /// Tags outside the structure element set, in document order.
    pub fn unsupported_elements(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.root.walk(&mut |e| {
            if !e.is_supported() {
                out.push(e.tag.clone());
            }
        });
        out
    }

    pub fn path_count(&self) -> usize {
        let mut n = 0;
        self.root.walk(&mut |e| n += e.path_data.is_some() as usize);
        n
    }

    pub fn command_count(&self) -> usize {
        let mut n = 0;
        self.root.walk(&mut |e| n += e.path_data.as_ref().map_or(0, Vec::len));
        n
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_minimal() {
        let doc = parse_svg(r#"<svg viewBox="0 0 10 10"><path d="M 1 2 Z"/></svg>"#).unwrap();
        assert_eq!(doc.viewbox, ViewBox::new(0.0, 0.0, 10.0, 10.0));
        let path = &doc.root.children[0];
        let cmds = path.path_data.as_ref().unwrap();
        assert_eq!(cmds, &vec![PathCommand::move_to(false, 1.0, 2.0), PathCommand::close(false)]);
    }

    #[test]
    fn parse_implicit_lineto() {
        let doc = parse_svg(r#"<svg viewBox="0 0 10 10"><path d="M 0 0 L 1 1 2 2"/></svg>"#).unwrap();
        let cmds = doc.root.children[0].path_data.clone().unwrap();
        assert_eq!(
            cmds,
            vec![
                PathCommand::move_to(false, 0.0, 0.0),
                PathCommand::line_to(false, 1.0, 1.0),
                PathCommand::line_to(false, 2.0, 2.0)
            ]
        );
    }

    #[test]
    fn bad_path_data_is_reported() {
        let err = parse_svg(r#"<svg><path d="M 1"/></svg>"#).unwrap_err();
        assert!(matches!(err, ParseError::BadPathData(_)), "{err}");
    }

    #[test]
    fn malformed_markup() {
        for bad in ["<svg><g></svg>", "", "not xml", "<g viewBox='0 0 1 1'/>"] {
            assert!(matches!(parse_svg(bad), Err(ParseError::MalformedMarkup(_))), "{bad}");
        }
    }

    #[test]
    fn viewbox_fallback_from_size() {
        let doc = parse_svg(r#"<svg width="24px" height="12"><g/></svg>"#).unwrap();
        assert_eq!(doc.viewbox, ViewBox::new(0.0, 0.0, 24.0, 12.0));
        assert!(parse_svg("<svg><g/></svg>").is_err());
    }

    #[test]
    fn unknown_elements_are_kept() {
        let doc = parse_svg(
            r#"<svg viewBox="0 0 1 1"><script>alert(1)</script><foreignObject/><path d=""/></svg>"#,
        )
        .unwrap();
        assert_eq!(doc.unsupported_elements(), vec!["script", "foreignObject"]);
        assert_eq!(doc.root.children[0].text.as_deref(), Some("alert(1)"));
    }

    #[test]
    fn serialize_longhand() {
        let doc = parse_svg(r#"<svg viewBox="0 0 10 10"><path d="M1,2z"/></svg>"#).unwrap();
        let text = serialize_svg(&doc);
        assert!(text.contains(r#"d="M 1 2 z""#), "{text}");
        assert!(text.starts_with(r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 10 10">"#));
    }

    #[test]
    fn empty_elements_reparse_identically() {
        let a = parse_svg(r#"<svg viewBox="0 0 1 1"><g></g><defs/></svg>"#).unwrap();
        let b = parse_svg(r#"<svg viewBox="0 0 1 1"><g/><defs></defs></svg>"#).unwrap();
        assert_eq!(a, b);
        assert_eq!(parse_svg(&serialize_svg(&a)).unwrap(), a);
    }

    #[test]
    fn round_trip_keeps_namespaces_and_escapes() {
        let src = r##"<svg xmlns="http://www.w3.org/2000/svg" xmlns:xlink="http://www.w3.org/1999/xlink"
            xmlns:inkscape="http://www.inkscape.org/namespaces/inkscape" viewBox="-1 -2 30.5 40">
            <defs><path id="a" d="M0 0h1"/></defs>
            <use xlink:href="#a" inkscape:label="x &amp; &lt;y&gt;" x="2"/>
            <text x="1">a &quot;b&quot; &amp; c</text>
        </svg>"##;
        let doc = parse_svg(src).unwrap();
        assert_eq!(doc.root.children[1].attr("xlink:href"), Some("#a"));
        assert_eq!(doc.root.children[1].attr("inkscape:label"), Some("x & <y>"));
        let again = parse_svg(&serialize_svg(&doc)).unwrap();
        assert_eq!(again, doc);
    }
}
