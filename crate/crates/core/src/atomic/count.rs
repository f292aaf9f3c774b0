use super::{AtomicToken, AtomicVocab, TokenItem, TokenSeq};

/// How literal spans contribute to a token count.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum LitMode {
    /// Each span counts as one item.
    #[default]
    Items,
    /// Each span counts as its number of characters.
    Chars,
}

/// Sequence length with vocabulary tokens counted once each and literal
/// spans counted per `mode`.
pub fn count_tokens(seq: &TokenSeq, mode: LitMode) -> usize {
    count_tokens_with(seq, |s| match mode {
        LitMode::Items => 1,
        LitMode::Chars => s.chars().count(),
    })
}

/// Sequence length with literal spans measured by an external counter, e.g.
/// the host language model's tokenizer.
pub fn count_tokens_with(seq: &TokenSeq, lit_len: impl Fn(&str) -> usize) -> usize {
    seq.items
        .iter()
        .map(|i| match i {
            TokenItem::Tok(_) => 1,
            TokenItem::Lit(s) => lit_len(s),
        })
        .sum()
}

/// Number of `<path>` elements.
pub fn count_paths(seq: &TokenSeq, vocab: &AtomicVocab) -> usize {
    let open = vocab.open_id("path").ok();
    seq.ids().filter(|&id| Some(id) == open).count()
}

/// Number of path command tokens.
pub fn count_commands(seq: &TokenSeq, vocab: &AtomicVocab) -> usize {
    seq.ids().filter(|&id| matches!(vocab.decode_id(id), Some(AtomicToken::Cmd { .. }))).count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atomic::from_text;

    #[test]
    fn counters() {
        let v = AtomicVocab::build(784, 10);
        let seq = from_text("<cmd_M><P_1><P_2><cmd_z>", &v).unwrap();
        assert_eq!(count_commands(&seq, &v), 2);
        assert_eq!(count_tokens(&seq, LitMode::Items), 4);

        let seq = from_text(
            "<svg>viewBox=0 0 784 784<path><cmd_M><P_1><P_2></path><g><path></path><path>fill=none</path></g></svg>",
            &v,
        )
        .unwrap();
        assert_eq!(count_paths(&seq, &v), 3);
        assert_eq!(count_tokens(&seq, LitMode::Items), 15);
        assert_eq!(count_tokens(&seq, LitMode::Chars), 13 + 19 + 9);
        assert_eq!(count_tokens_with(&seq, |_| 3), 13 + 6);
    }
}
