//! Text and id serializations of token sequences.
//!
//! Text: token strings concatenated without separators, literal spans
//! inline; two adjacent literal spans are separated by a single space. One
//! sequence per line.
//!
//! Ids: one item per line, a decimal id or a JSON string for a literal span.
//! Sequences in a batch are separated by an empty line.

use super::{AtomicError, AtomicVocab, TokenItem, TokenSeq};

pub fn to_text(seq: &TokenSeq, vocab: &AtomicVocab) -> String {
    to_text_with(seq, |id| vocab.token(id).map(String::from))
}

/// Text form with a custom id-to-string mapping (used for vocabularies that
/// extend the atomic one). Unknown ids are written as `<#id>`.
pub fn to_text_with(seq: &TokenSeq, name: impl Fn(u32) -> Option<String>) -> String {
    let mut out = String::new();
    let mut prev_lit = false;
    for item in &seq.items {
        match item {
            TokenItem::Tok(id) => {
                match name(*id) {
                    Some(t) => out.push_str(&t),
                    None => out.push_str(&format!("<#{id}>")),
                }
                prev_lit = false;
            }
            TokenItem::Lit(s) => {
                if prev_lit {
                    out.push(' ');
                }
                out.push_str(s);
                prev_lit = true;
            }
        }
    }
    out
}

pub fn from_text(text: &str, vocab: &AtomicVocab) -> Result<TokenSeq, AtomicError> {
    from_text_with(text, |t| vocab.id(t))
}

pub fn from_text_with(text: &str, resolve: impl Fn(&str) -> Option<u32>) -> Result<TokenSeq, AtomicError> {
    let mut items = Vec::new();
    let mut rest = text.trim_end_matches(['\n', '\r']);
    while !rest.is_empty() {
        if rest.starts_with('<') {
            let end = rest
                .find('>')
                .ok_or_else(|| AtomicError::UnknownToken(format!("unterminated token {rest:?}")))?;
            let tok = &rest[..=end];
            let id = resolve(tok).ok_or_else(|| AtomicError::UnknownToken(tok.to_string()))?;
            items.push(TokenItem::Tok(id));
            rest = &rest[end + 1..];
        } else {
            let end = rest.find('<').unwrap_or(rest.len());
            split_literal_run(&rest[..end], &mut items)?;
            rest = &rest[end..];
        }
    }
    Ok(TokenSeq::new(items))
}

/// Splits `name=value name=value ...` into spans. Values never contain a raw
/// `=`, so every `=` ends a name, and the name starts after the last
/// whitespace before it.
fn split_literal_run(run: &str, out: &mut Vec<TokenItem>) -> Result<(), AtomicError> {
    if run.trim().is_empty() {
        return Ok(());
    }
    let mut starts = Vec::new();
    for (eq, _) in run.match_indices('=') {
        let key_start = run[..eq].rfind(char::is_whitespace).map(|p| p + 1).unwrap_or(0);
        if key_start == eq || starts.last().is_some_and(|&s| s >= key_start) {
            return Err(AtomicError::MalformedLiteral(format!("cannot split {run:?}")));
        }
        starts.push(key_start);
    }
    if starts.first() != Some(&0) {
        return Err(AtomicError::MalformedLiteral(format!("text outside a literal span: {run:?}")));
    }
    for (k, &s) in starts.iter().enumerate() {
        let end = match starts.get(k + 1) {
            Some(&next) => next - 1,
            None => run.len(),
        };
        out.push(TokenItem::Lit(run[s..end].to_string()));
    }
    Ok(())
}

pub fn to_ids(seq: &TokenSeq) -> String {
    let mut out = String::new();
    for item in &seq.items {
        match item {
            TokenItem::Tok(id) => out.push_str(&id.to_string()),
            TokenItem::Lit(s) => out.push_str(&serde_json::to_string(s).expect("string serializes")),
        }
        out.push('\n');
    }
    out
}

pub fn from_ids(text: &str) -> Result<TokenSeq, AtomicError> {
    let mut items = Vec::new();
    for line in text.lines() {
        let line = line.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        if line.starts_with('"') {
            let s: String = serde_json::from_str(line)
                .map_err(|e| AtomicError::MalformedLiteral(format!("{line}: {e}")))?;
            items.push(TokenItem::Lit(s));
        } else {
            let id = line.trim().parse::<u32>().map_err(|_| AtomicError::UnknownToken(line.to_string()))?;
            items.push(TokenItem::Tok(id));
        }
    }
    Ok(TokenSeq::new(items))
}

pub fn write_id_batches(seqs: &[TokenSeq]) -> String {
    seqs.iter().map(to_ids).collect::<Vec<_>>().join("\n")
}

pub fn read_id_batches(text: &str) -> Result<Vec<TokenSeq>, AtomicError> {
    let mut out = Vec::new();
    let mut block = String::new();
    for line in text.lines() {
        if line.trim().is_empty() {
            if !block.is_empty() {
                out.push(from_ids(&block)?);
                block.clear();
            }
        } else {
            block.push_str(line);
            block.push('\n');
        }
    }
    if !block.is_empty() {
        out.push(from_ids(&block)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn literal_runs_split_on_names() {
        let v = AtomicVocab::build(784, 10);
        let seq = from_text("<svg>viewBox=0 0 784 784 fill=#ff0000 font-family=Open Sans  stroke=none<g></g></svg>", &v).unwrap();
        let lits: Vec<_> = seq
            .items
            .iter()
            .filter_map(|i| match i {
                TokenItem::Lit(s) => Some(s.as_str()),
                _ => None,
            })
            .collect();
        assert_eq!(lits, ["viewBox=0 0 784 784", "fill=#ff0000", "font-family=Open Sans ", "stroke=none"]);
        assert_eq!(to_text(&seq, &v), "<svg>viewBox=0 0 784 784 fill=#ff0000 font-family=Open Sans  stroke=none<g></g></svg>");
        assert!(from_text("<svg>junk<g></g></svg>", &v).is_err());
        assert!(from_text("<svg> =x</svg>", &v).is_err());
    }

    #[test]
    fn id_batches_round_trip() {
        let a = TokenSeq::new(vec![TokenItem::Tok(0), TokenItem::Lit("viewBox=0 0 1 1".into()), TokenItem::Tok(1)]);
        let b = TokenSeq::new(vec![TokenItem::Tok(0), TokenItem::Lit("#text=\"q\"\\".into()), TokenItem::Tok(1)]);
        let text = write_id_batches(&[a.clone(), b.clone()]);
        assert_eq!(read_id_batches(&text).unwrap(), vec![a.clone(), b]);
        assert_eq!(from_ids(&to_ids(&a)).unwrap(), a);
        assert!(from_ids("12\nx\n").is_err());
    }
}
