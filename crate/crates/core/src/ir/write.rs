use std::fmt::Write;

use super::{write_path_data, Element, SvgDocument, SVG_NS, XLINK_NS};

/// Serializes a document to compact SVG markup.
///
/// Path data is always written in longhand form. Namespace declarations are
/// regenerated on the root element.
pub fn serialize_svg(doc: &SvgDocument) -> String {
    let mut out = String::with_capacity(256);
    let mut decls: Vec<(String, String)> = doc.namespaces.clone();
    let mut prefixes = Vec::new();
    doc.root.walk(&mut |e| {
        collect_prefix(&e.tag, &mut prefixes);
        for (k, _) in &e.attributes {
            collect_prefix(k, &mut prefixes);
        }
    });
    for p in prefixes {
        if !decls.iter().any(|(q, _)| *q == p) {
            let uri = if p == "xlink" { XLINK_NS.to_string() } else { format!("urn:svgtok:{p}") };
            decls.push((p, uri));
        }
    }
    decls.sort();

    write!(out, "<svg xmlns=\"{SVG_NS}\"").unwrap();
    for (p, uri) in &decls {
        write!(out, " xmlns:{p}=\"{}\"", escape_attr(uri)).unwrap();
    }
    write!(out, " viewBox=\"{}\"", doc.viewbox).unwrap();
    write_rest(&doc.root, &mut out);
    out
}

fn collect_prefix(name: &str, out: &mut Vec<String>) {
    if let Some((p, _)) = name.split_once(':') {
        if p != "xml" && !out.iter().any(|q| q == p) {
            out.push(p.to_string());
        }
    }
}

/// Writes attributes, content, and the closing tag; the opening `<tag` is
/// already in `out`.
fn write_rest(el: &Element, out: &mut String) {
    for (k, v) in &el.attributes {
        write!(out, " {k}=\"{}\"", escape_attr(v)).unwrap();
    }
    if let Some(cmds) = &el.path_data {
        write!(out, " d=\"{}\"", write_path_data(cmds)).unwrap();
    }
    if el.text.is_none() && el.children.is_empty() {
        out.push_str("/>");
        return;
    }
    out.push('>');
    if let Some(t) = &el.text {
        out.push_str(&escape_text(t));
    }
    for c in &el.children {
        write!(out, "<{}", c.tag).unwrap();
        write_rest(c, out);
    }
    write!(out, "</{}>", el.tag).unwrap();
}

fn escape_attr(v: &str) -> String {
    let mut s = String::with_capacity(v.len());
    for ch in v.chars() {
        match ch {
            '&' => s.push_str("&amp;"),
            '<' => s.push_str("&lt;"),
            '>' => s.push_str("&gt;"),
            '"' => s.push_str("&quot;"),
            '\n' => s.push_str("&#10;"),
            '\r' => s.push_str("&#13;"),
            '\t' => s.push_str("&#9;"),
            c => s.push(c),
        }
    }
    s
}

fn escape_text(v: &str) -> String {
    let mut s = String::with_capacity(v.len());
    for ch in v.chars() {
        match ch {
            '&' => s.push_str("&amp;"),
            '<' => s.push_str("&lt;"),
            '>' => s.push_str("&gt;"),
            '\r' => s.push_str("&#13;"),
            c => s.push(c),
        }
    }
    s
}
