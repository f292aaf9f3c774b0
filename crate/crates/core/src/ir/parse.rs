use roxmltree::{Node, ParsingOptions};

use super::{parse_path_data, Element, ParseError, SvgDocument, ViewBox, SVG_NS, XLINK_NS};

const XML_NS: &str = "http://www.w3.org/XML/1998/namespace";

/// Parses SVG text into a document tree.
///
/// Unknown elements and attributes are retained; see
/// [`SvgDocument::unsupported_elements`].
pub fn parse_svg(text: &str) -> Result<SvgDocument, ParseError> {
    if text.trim().is_empty() {
        return Err(ParseError::MalformedMarkup("empty input".into()));
    }
    let opts = ParsingOptions { allow_dtd: true, ..ParsingOptions::default() };
    let xml = roxmltree::Document::parse_with_options(text, opts)
        .map_err(|e| ParseError::MalformedMarkup(e.to_string()))?;
    let root_node = xml.root_element();
    let ns = root_node.tag_name().namespace();
    if root_node.tag_name().name() != "svg" || !(ns.is_none() || ns == Some(SVG_NS)) {
        return Err(ParseError::MalformedMarkup(format!(
            "root element is <{}>, expected <svg>",
            root_node.tag_name().name()
        )));
    }

    let mut namespaces = Vec::new();
    let mut root = convert(root_node, &mut namespaces)?;

    let viewbox = match root.remove_attr("viewBox") {
        Some(v) => ViewBox::parse(&v)
            .ok_or_else(|| ParseError::MalformedMarkup(format!("bad viewBox {v:?}")))?,
        None => {
            let w = root.attr("width").and_then(parse_length);
            let h = root.attr("height").and_then(parse_length);
            match (w, h) {
                (Some(w), Some(h)) => ViewBox::new(0.0, 0.0, w, h),
                _ => return Err(ParseError::MalformedMarkup("missing viewBox and width/height".into())),
            }
        }
    };

    namespaces.sort();
    namespaces.dedup();
    Ok(SvgDocument { viewbox, root, namespaces })
}

fn parse_length(s: &str) -> Option<f64> {
    let s = s.trim();
    let s = s.strip_suffix("px").unwrap_or(s);
    s.parse::<f64>().ok().filter(|v| v.is_finite())
}

fn qualified(node: Node, ns: Option<&str>, local: &str, namespaces: &mut Vec<(String, String)>) -> String {
    match ns {
        None | Some(SVG_NS) => local.to_string(),
        Some(XML_NS) => format!("xml:{local}"),
        Some(uri) => {
            let prefix = match node.lookup_prefix(uri) {
                Some(p) if !p.is_empty() => p.to_string(),
                _ if uri == XLINK_NS => "xlink".to_string(),
                _ => return local.to_string(),
            };
            namespaces.push((prefix.clone(), uri.to_string()));
            format!("{prefix}:{local}")
        }
    }
}

fn convert(node: Node, namespaces: &mut Vec<(String, String)>) -> Result<Element, ParseError> {
    let tag = qualified(node, node.tag_name().namespace(), node.tag_name().name(), namespaces);
    let mut el = Element::new(tag);

    for a in node.attributes() {
        let name = qualified(node, a.namespace(), a.name(), namespaces);
        if el.path_data.is_some() && name == "d" {
            el.path_data = Some(parse_path_data(a.value())?);
        } else {
            el.attributes.push((name, a.value().to_string()));
        }
    }

    let mut text = String::new();
    for child in node.children() {
        if child.is_element() {
            el.children.push(convert(child, namespaces)?);
        } else if child.is_text() {
            text.push_str(child.text().unwrap_or_default());
        }
    }
    if !text.trim().is_empty() {
        el.text = Some(text);
    }
    Ok(el)
}
