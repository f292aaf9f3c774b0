use crate::ir::{ArcFlags, CommandKind, Element, PathCommand, SvgDocument, ViewBox};

use super::vocab::{AtomicToken, FlagKind};
use super::{AtomicError, AtomicVocab, TokenItem, TokenSeq, TEXT_KEY};

/// Escapes a literal value so it cannot be confused with token markup, the
/// `=` separator or a line break.
pub fn escape_literal(value: &str) -> String {
    let mut out = String::with_capacity(value.len());
    for ch in value.chars() {
        match ch {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '=' => out.push_str("&#61;"),
            '\n' => out.push_str("&#10;"),
            '\r' => out.push_str("&#13;"),
            c => out.push(c),
        }
    }
    out
}

pub fn unescape_literal(value: &str) -> Result<String, AtomicError> {
    let mut out = String::with_capacity(value.len());
    let mut rest = value;
    while let Some(pos) = rest.find('&') {
        out.push_str(&rest[..pos]);
        rest = &rest[pos..];
        let (ch, len) = [("&amp;", '&'), ("&lt;", '<'), ("&gt;", '>'), ("&#61;", '='), ("&#10;", '\n'), ("&#13;", '\r')]
            .iter()
            .find(|(e, _)| rest.starts_with(e))
            .map(|(e, c)| (*c, e.len()))
            .ok_or_else(|| AtomicError::MalformedLiteral(format!("bad escape in {value:?}")))?;
        out.push(ch);
        rest = &rest[len..];
    }
    out.push_str(rest);
    Ok(out)
}

/// Builds the literal span for one attribute.
pub fn literal(name: &str, value: &str) -> String {
    format!("{name}={}", escape_literal(value))
}

/// Splits a literal span back into `(name, unescaped value)`.
pub fn split_literal(span: &str) -> Result<(String, String), AtomicError> {
    let (name, value) = span
        .split_once('=')
        .ok_or_else(|| AtomicError::MalformedLiteral(format!("no '=' in {span:?}")))?;
    if name.is_empty() || name.contains(|c: char| c.is_whitespace() || c == '<' || c == '>' || c == '&') {
        return Err(AtomicError::MalformedLiteral(format!("bad attribute name {name:?}")));
    }
    if value.contains(['=', '<', '>', '\n']) {
        return Err(AtomicError::MalformedLiteral(format!("unescaped markup in {span:?}")));
    }
    Ok((name.to_string(), unescape_literal(value)?))
}

/// Encodes a preprocessed document.
///
/// Each element becomes its open token, one literal per attribute (the root
/// starts with `viewBox`), an optional `#text` literal, its path commands,
/// its children and its close token. The first command of every path must
/// be an absolute moveto; all later commands must be relative with integer
/// parameters inside the vocabulary range.
pub fn encode_atomic(doc: &SvgDocument, vocab: &AtomicVocab) -> Result<TokenSeq, AtomicError> {
    if doc.root.tag != "svg" {
        return Err(AtomicError::UnsupportedTag(doc.root.tag.clone()));
    }
    let mut out = Vec::new();
    encode_element(&doc.root, Some(&doc.viewbox), vocab, &mut out)?;
    Ok(TokenSeq::new(out))
}

fn encode_element(
    el: &Element,
    viewbox: Option<&ViewBox>,
    vocab: &AtomicVocab,
    out: &mut Vec<TokenItem>,
) -> Result<(), AtomicError> {
    out.push(TokenItem::Tok(vocab.open_id(&el.tag)?));
    if let Some(vb) = viewbox {
        out.push(TokenItem::Lit(literal("viewBox", &vb.to_string())));
    }
    for (k, v) in &el.attributes {
        out.push(TokenItem::Lit(literal(k, v)));
    }
    if let Some(t) = &el.text {
        out.push(TokenItem::Lit(literal(TEXT_KEY, t)));
    }
    if let Some(cmds) = &el.path_data {
        encode_path(cmds, vocab, out)?;
    }
    for c in &el.children {
        encode_element(c, None, vocab, out)?;
    }
    out.push(TokenItem::Tok(vocab.close_id(&el.tag)?));
    Ok(())
}

fn as_int(v: f64) -> Result<i64, AtomicError> {
    if v.is_finite() && v.fract() == 0.0 && v.abs() < 1e15 {
        Ok(v as i64)
    } else {
        Err(AtomicError::OutOfRange(format!("non-integer coordinate {v}")))
    }
}

fn encode_path(cmds: &[PathCommand], vocab: &AtomicVocab, out: &mut Vec<TokenItem>) -> Result<(), AtomicError> {
    for (i, c) in cmds.iter().enumerate() {
        let leading = i == 0;
        if leading && (c.kind() != CommandKind::MoveTo || c.is_relative()) {
            return Err(AtomicError::OutOfRange(format!("path starts with {c}, not an absolute moveto")));
        }
        if !leading && !c.is_relative() {
            return Err(AtomicError::OutOfRange(format!("absolute command {c} after the leading moveto")));
        }
        out.push(TokenItem::Tok(vocab.cmd_id(c.kind(), c.is_relative())));
        let coord = |v: f64| -> Result<TokenItem, AtomicError> {
            let n = as_int(v)?;
            Ok(TokenItem::Tok(if leading { vocab.abs_id(n)? } else { vocab.rel_id(n)? }))
        };
        for (j, &v) in c.params().iter().enumerate() {
            if j == 3 {
                if let Some(f) = c.flags() {
                    out.push(TokenItem::Tok(vocab.flag_id(FlagKind::Large, f.large_arc)));
                    out.push(TokenItem::Tok(vocab.flag_id(FlagKind::Sweep, f.sweep)));
                }
            }
            out.push(coord(v)?);
        }
    }
    Ok(())
}

/// Rebuilds the document from an atomic sequence.
pub fn decode_atomic(seq: &TokenSeq, vocab: &AtomicVocab) -> Result<SvgDocument, AtomicError> {
    let items = &seq.items;
    let mut stack: Vec<Element> = Vec::new();
    let mut root: Option<Element> = None;
    let mut viewbox: Option<ViewBox> = None;
    let mut lit_ok = false;
    let mut i = 0;
    while i < items.len() {
        let item = &items[i];
        i += 1;
        let id = match item {
            TokenItem::Lit(span) => {
                let depth = stack.len();
                let top = match stack.last_mut() {
                    Some(t) if lit_ok => t,
                    _ => return Err(AtomicError::MalformedLiteral(format!("{span:?} does not follow an opening tag"))),
                };
                let (k, v) = split_literal(span)?;
                if k == TEXT_KEY {
                    top.text = Some(v);
                } else if k == "viewBox" && depth == 1 && viewbox.is_none() {
                    viewbox = Some(
                        ViewBox::parse(&v).ok_or_else(|| AtomicError::MalformedLiteral(format!("bad viewBox {v:?}")))?,
                    );
                } else {
                    top.attributes.push((k, v));
                }
                continue;
            }
            TokenItem::Tok(id) => *id,
        };
        lit_ok = false;
        let tok = vocab.decode_id(id).ok_or_else(|| AtomicError::UnknownToken(format!("id {id}")))?;
        match tok {
            AtomicToken::Open(e) => {
                let tag = &vocab.elements()[e];
                if root.is_some() {
                    return Err(AtomicError::UnbalancedStructure(format!("<{tag}> after the root closed")));
                }
                if stack.is_empty() && tag != "svg" {
                    return Err(AtomicError::UnbalancedStructure(format!("root is <{tag}>, not <svg>")));
                }
                stack.push(Element::new(tag.clone()));
                lit_ok = true;
            }
            AtomicToken::Close(e) => {
                let tag = &vocab.elements()[e];
                match stack.pop() {
                    Some(el) if &el.tag == tag => match stack.last_mut() {
                        Some(parent) => parent.children.push(el),
                        None => root = Some(el),
                    },
                    Some(el) => {
                        return Err(AtomicError::UnbalancedStructure(format!("</{tag}> closes <{}>", el.tag)));
                    }
                    None => return Err(AtomicError::UnbalancedStructure(format!("</{tag}> without an open tag"))),
                }
            }
            AtomicToken::Cmd { kind, relative } => {
                let path = match stack.last_mut() {
                    Some(el) if el.tag == "path" => el.path_data.get_or_insert_with(Vec::new),
                    _ => return Err(AtomicError::UnbalancedStructure("path command outside <path>".into())),
                };
                let leading = path.is_empty();
                let name = if relative { kind.letter().to_ascii_lowercase() } else { kind.letter() };
                if leading != (kind == CommandKind::MoveTo && !relative) || (!leading && !relative) {
                    return Err(AtomicError::ArityViolation(format!(
                        "<cmd_{name}> cannot appear at command {} of a path",
                        path.len()
                    )));
                }
                let arity = kind.token_arity();
                let mut params = Vec::with_capacity(kind.numeric_arity());
                let mut flags = ArcFlags { large_arc: false, sweep: false };
                for slot in 0..arity {
                    let next = match items.get(i) {
                        Some(TokenItem::Tok(t)) => vocab.decode_id(*t),
                        _ => None,
                    };
                    let is_flag_slot = kind == CommandKind::ArcTo && (slot == 3 || slot == 4);
                    match (next, is_flag_slot) {
                        (Some(AtomicToken::Flag { kind: FlagKind::Large, value }), true) if slot == 3 => {
                            flags.large_arc = value
                        }
                        (Some(AtomicToken::Flag { kind: FlagKind::Sweep, value }), true) if slot == 4 => flags.sweep = value,
                        (Some(AtomicToken::Abs(v)), false) if leading => params.push(v as f64),
                        (Some(AtomicToken::Rel(v)), false) if !leading => params.push(v as f64),
                        _ => {
                            return Err(AtomicError::ArityViolation(format!(
                                "<cmd_{name}> needs {arity} parameters, slot {slot} is missing or of the wrong kind"
                            )));
                        }
                    }
                    i += 1;
                }
                let flags = (kind == CommandKind::ArcTo).then_some(flags);
                path.push(PathCommand::with_params(kind, relative, params, flags));
            }
            AtomicToken::Flag { .. } | AtomicToken::Abs(_) | AtomicToken::Rel(_) => {
                let t = vocab.token(id).unwrap_or_default();
                return Err(AtomicError::ArityViolation(format!("{t} without a command")));
            }
        }
    }
    if let Some(open) = stack.last() {
        return Err(AtomicError::UnbalancedStructure(format!("<{}> never closed", open.tag)));
    }
    let root = root.ok_or_else(|| AtomicError::UnbalancedStructure("empty sequence".into()))?;
    let viewbox = viewbox.ok_or_else(|| AtomicError::MalformedLiteral("root has no viewBox literal".into()))?;
    Ok(SvgDocument::new(viewbox, root))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atomic::{from_text, to_text};
    use crate::ir::parse_svg;

    fn vocab() -> AtomicVocab {
        AtomicVocab::build(784, 10)
    }

    #[test]
    fn figure_style_stream() {
        let doc = parse_svg(r#"<svg viewBox="0 0 784 784"><path d="M 242 674 c 7 -195 1 2 3 4"/></svg>"#).unwrap();
        let seq = encode_atomic(&doc, &vocab()).unwrap();
        assert_eq!(
            to_text(&seq, &vocab()),
            "<svg>viewBox=0 0 784 784<path><cmd_M><P_242><P_674><cmd_c><d_7><d_-195><d_1><d_2><d_3><d_4></path></svg>"
        );
    }

    #[test]
    fn hand_enumerated_path() {
        let doc = parse_svg(r#"<svg viewBox="0 0 784 784"><path d="M 100 200 l 50 -30 z"/></svg>"#).unwrap();
        let text = to_text(&encode_atomic(&doc, &vocab()).unwrap(), &vocab());
        assert!(text.contains("<cmd_M><P_100><P_200><cmd_l><d_50><d_-30><cmd_z>"), "{text}");
    }

    #[test]
    fn out_of_range_and_non_canonical() {
        let v = vocab();
        let doc = parse_svg(r#"<svg viewBox="0 0 784 784"><path d="M 900 1"/></svg>"#).unwrap();
        assert!(matches!(encode_atomic(&doc, &v), Err(AtomicError::OutOfRange(_))));
        let doc = parse_svg(r#"<svg viewBox="0 0 784 784"><path d="M 1 1 L 2 2"/></svg>"#).unwrap();
        assert!(matches!(encode_atomic(&doc, &v), Err(AtomicError::OutOfRange(_))));
        let doc = parse_svg(r#"<svg viewBox="0 0 784 784"><path d="M 1.5 1"/></svg>"#).unwrap();
        assert!(matches!(encode_atomic(&doc, &v), Err(AtomicError::OutOfRange(_))));
        let doc = parse_svg(r#"<svg viewBox="0 0 784 784"><blink/></svg>"#).unwrap();
        assert_eq!(encode_atomic(&doc, &v), Err(AtomicError::UnsupportedTag("blink".into())));
    }

    #[test]
    fn round_trip_with_attributes_arcs_and_text() {
        let v = vocab();
        let doc = parse_svg(
            r##"<svg viewBox="0 0 784 784"><g fill="#ff0000" font-family="a=b &amp; c">
                <path d="M 10 10 a 5 6 30 1 0 7 -8 h 3 v -2 s 1 2 3 4 q 1 1 2 2 t 3 3 z m 1 1" stroke-width="2"/>
                <text x="1">hi &lt;there&gt;
multi</text><path/></g></svg>"##,
        )
        .unwrap();
        let seq = encode_atomic(&doc, &v).unwrap();
        assert_eq!(decode_atomic(&seq, &v).unwrap(), doc);
        let text = to_text(&seq, &v);
        assert!(!text.contains('\n'));
        assert_eq!(from_text(&text, &v).unwrap(), seq);
    }

    #[test]
    fn decode_errors() {
        let v = vocab();
        let parse = |s: &str| from_text(s, &v).unwrap();
        let err = |s: &str| decode_atomic(&parse(s), &v).unwrap_err();
        assert!(matches!(
            err("<svg>viewBox=0 0 784 784<path><cmd_M><P_1><P_1><cmd_l><d_5></path></svg>"),
            AtomicError::ArityViolation(_)
        ));
        assert!(matches!(err("<svg>viewBox=0 0 784 784</path><path></svg>"), AtomicError::UnbalancedStructure(_)));
        assert!(matches!(err("<svg>viewBox=0 0 784 784<path>"), AtomicError::UnbalancedStructure(_)));
        assert!(matches!(err("<svg>viewBox=0 0 784 784<d_3></svg>"), AtomicError::ArityViolation(_)));
        assert!(matches!(
            err("<svg>viewBox=0 0 784 784<path><cmd_M><P_1><P_1><cmd_L><d_1><d_1></path></svg>"),
            AtomicError::ArityViolation(_)
        ));
        assert!(matches!(
            err("<svg>viewBox=0 0 784 784<path><cmd_M><P_1><P_1><cmd_a><d_1><d_1><d_0><sweep_0><large_0><d_1><d_1></path></svg>"),
            AtomicError::ArityViolation(_)
        ));
        assert!(matches!(err("<svg><path></path></svg>"), AtomicError::MalformedLiteral(_)));
        let seq = TokenSeq::new(vec![TokenItem::Tok(0), TokenItem::Tok(99_999)]);
        assert!(matches!(decode_atomic(&seq, &v), Err(AtomicError::UnknownToken(_))));
        assert!(matches!(from_text("<svg><P_9999></svg>", &v), Err(AtomicError::UnknownToken(_))));
    }

    #[test]
    fn literal_escaping() {
        for s in ["", "plain", "a=b", "<x>&amp;", "line\nbreak\r", "&#61;"] {
            let lit = literal("k", s);
            assert_eq!(split_literal(&lit).unwrap(), ("k".to_string(), s.to_string()));
        }
        assert!(split_literal("novalue").is_err());
        assert!(split_literal("k=a&bogus;").is_err());
    }
}
