use proptest::prelude::*;
use svgtok_core::atomic::{from_ids, from_text, literal, to_ids, to_text, AtomicVocab, TokenItem, TokenSeq};
use svgtok_core::hmn::{numeric_direction, HmnParams};
use svgtok_core::metrics::{assign_stage, Stage};
use svgtok_core::segment::{encode_segments, expand_segments, TrainParams};
use svgtok_core::{preprocess, serialize_svg, PreprocessConfig, Tokenizer};

fn segment() -> impl Strategy<Value = String> {
    let d = || -20i64..=20;
    prop_oneof![
        (d(), d()).prop_map(|(x, y)| format!("<cmd_l><d_{x}><d_{y}>")),
        d().prop_map(|x| format!("<cmd_h><d_{x}>")),
        d().prop_map(|y| format!("<cmd_v><d_{y}>")),
        prop::collection::vec(d(), 6).prop_map(|v| format!("<cmd_c>{}", v.iter().map(|x| format!("<d_{x}>")).collect::<String>())),
        (0i64..=9, any::<bool>(), any::<bool>(), d(), d())
            .prop_map(|(r, l, s, x, y)| format!("<cmd_a><d_{r}><d_{r}><d_0><large_{}><sweep_{}><d_{x}><d_{y}>", l as u8, s as u8)),
        Just("<cmd_z>".to_string()),
    ]
}

fn document() -> impl Strategy<Value = String> {
    let path = (0u32..=784, 0u32..=784, prop::collection::vec(segment(), 0..12), "[ -~\n]{0,12}")
        .prop_map(|(x, y, segs, fill)| format!("<path>{}<cmd_M><P_{x}><P_{y}>{}</path>", literal("fill", &fill), segs.concat()));
    prop::collection::vec(path, 1..4).prop_map(|paths| format!("<svg>viewBox=0 0 784 784{}</svg>", paths.concat()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn text_and_id_formats_round_trip(doc in document()) {
        let v = AtomicVocab::build(784, 10);
        let seq = from_text(&doc, &v).unwrap();
        prop_assert_eq!(to_text(&seq, &v), doc);
        prop_assert_eq!(from_ids(&to_ids(&seq)).unwrap(), seq);
    }

    #[test]
    fn literals_never_break_tokenization(value in "\\PC{0,20}") {
        let v = AtomicVocab::build(784, 10);
        let seq = TokenSeq::new(vec![TokenItem::Tok(0), TokenItem::Lit(literal("fill", &value)), TokenItem::Tok(1)]);
        prop_assert_eq!(from_text(&to_text(&seq, &v), &v).unwrap(), seq);
    }

    #[test]
    fn segment_encoding_expands_back(docs in prop::collection::vec(document(), 1..20), merges in 0usize..40, min_freq in 1u64..3) {
        let t = Tokenizer::new(PreprocessConfig::default(), None).unwrap();
        let corpus: Vec<TokenSeq> = docs.iter().map(|d| t.from_text(d).unwrap()).collect();
        let sv = t.train(&corpus, TrainParams { merges, min_freq }).unwrap();
        prop_assert!(sv.len() <= merges);
        for seq in &corpus {
            let enc = encode_segments(seq, &sv, t.atomic()).unwrap();
            prop_assert!(enc.len() <= seq.len());
            prop_assert_eq!(&expand_segments(&enc, &sv).unwrap(), seq);
        }
    }

    #[test]
    fn preprocessing_is_idempotent(pts in prop::collection::vec((0.0f64..48.0, 0.0f64..48.0), 2..8), rot in -90.0f64..90.0) {
        let d: String = pts.iter().enumerate().map(|(i, p)| format!("{}{:.2} {:.2} ", if i == 0 { 'M' } else { 'L' }, p.0, p.1)).collect();
        let svg = format!(r#"<svg viewBox="0 0 48 48"><g transform="rotate({rot:.1} 24 24)"><path d="{}"/></g></svg>"#, d.trim());
        let cfg = PreprocessConfig::default();
        if let Ok(once) = preprocess(&svg, &cfg) {
            prop_assert_eq!(preprocess(&serialize_svg(&once), &cfg).unwrap(), once);
        }
    }

    #[test]
    fn numeric_direction_has_unit_norm(v in 0.0f64..=1.0, seed in any::<u64>()) {
        let d = numeric_direction(v, &HmnParams { seed, ..Default::default() }, 32).unwrap();
        prop_assert!((d.iter().map(|x| x * x).sum::<f64>().sqrt() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn stages_are_monotone(a in 0usize..1500, b in 0usize..1500) {
        let rank = |s: Stage| match s { Stage::S1 => 1, Stage::S2 => 2, Stage::S3 => 3, Stage::Discard => 0 };
        let (lo, hi) = (a.min(b), a.max(b));
        let (x, y) = (assign_stage(lo), assign_stage(hi));
        if x != Stage::Discard && y != Stage::Discard {
            prop_assert!(rank(x) <= rank(y));
        }
        prop_assert_eq!(assign_stage(a) == Stage::Discard, !(30..=1000).contains(&a));
    }
}
