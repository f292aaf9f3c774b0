use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use svgtok_core::atomic::{from_ids, to_ids, LitMode};
use svgtok_core::hmn::{
    atomic_metas, segment_metas, DescriptionManifest, EmbeddingTable, HmnInit, HmnParams, InitManifest,
};
use svgtok_core::metrics::{compression_report, noise_table, partition_by_length, CorpusSample, FnCounter, TokenCounter};
use svgtok_core::segment::{segment_stats, NoiseReport, SegmentStats, TrainParams};
use svgtok_core::{serialize_svg, AtomicVocab, PreprocessConfig, SegmentVocab, TokenSeq, Tokenizer};

use crate::io::{expand_inputs, process_ordered, read_text, write_atomic, Input, OutputTarget, Tally};
use crate::{Baseline, Cli, Command, Format, InitArgs, IoArgs, LitArg, TableFormat, UsageError};

const SVG: &[&str] = &["svg"];
const TOKENS: &[&str] = &["tok", "ids"];

pub fn run(cli: Cli) -> Result<()> {
    if let Some(j) = cli.jobs {
        if j == 0 {
            return Err(UsageError("--jobs must be at least 1".into()).into());
        }
        rayon::ThreadPoolBuilder::new().num_threads(j).build_global().context("starting worker pool")?;
    }
    let config = PreprocessConfig::with_canvas(cli.canvas, cli.tolerance);
    config.validate().map_err(UsageError)?;
    match cli.command {
        Command::Preprocess(io) => preprocess(&config, &io),
        Command::BuildVocab { output } => build_vocab(&config, output.as_deref()),
        Command::TrainSegments { inputs, merges, min_freq, output } => {
            if min_freq == 0 {
                return Err(UsageError("--min-freq must be at least 1".into()).into());
            }
            train_segments(&config, &inputs, TrainParams { merges, min_freq }, &output)
        }
        Command::Encode { io, segments, format } => encode(&tokenizer(&config, segments.as_deref())?, &io, format),
        Command::Decode { io, segments, format } => decode(&tokenizer(&config, segments.as_deref())?, &io, format),
        Command::Stats { inputs, segments, baseline, lit_mode, output } => {
            stats(&tokenizer(&config, segments.as_deref())?, &inputs, baseline, lit_mode.into(), output.as_deref())
        }
        Command::Partition { inputs, lit_mode, output } => {
            partition(&tokenizer(&config, None)?, &inputs, lit_mode.into(), output.as_deref())
        }
        Command::InitEmbeddings(args) => init_embeddings(&config, &args),
    }
}

impl From<LitArg> for LitMode {
    fn from(a: LitArg) -> Self {
        match a {
            LitArg::Items => LitMode::Items,
            LitArg::Chars => LitMode::Chars,
        }
    }
}

fn tokenizer(config: &PreprocessConfig, segments: Option<&Path>) -> Result<Tokenizer> {
    let sv = match segments {
        Some(p) => {
            let atomic = AtomicVocab::build(config.canvas, config.overflow_tolerance);
            Some(SegmentVocab::load(p, &atomic).with_context(|| format!("loading {}", p.display()))?)
        }
        None => None,
    };
    Ok(Tokenizer::new(config.clone(), sv)?)
}

fn summary(verb: &str, t: &Tally) {
    println!("{verb} {} samples, {} failed", t.ok, t.failed);
}

fn preprocess(config: &PreprocessConfig, io: &IoArgs) -> Result<()> {
    let t = Tokenizer::new(config.clone(), None)?;
    let inputs = expand_inputs(&io.inputs, SVG)?;
    let target = OutputTarget::new(&io.inputs, &inputs, &io.output, SVG);
    let mut tally = Tally::default();
    process_ordered(
        &inputs,
        |i| Ok(serialize_svg(&t.canonical(&read_text(&i.path)?)?) + "\n"),
        |i, r| {
            if let Some(svg) = tally.record(i, r) {
                write_atomic(&target.path_for(i, "svg"), svg.as_bytes())?;
            }
            Ok(())
        },
    )?;
    summary("preprocessed", &tally);
    tally.require_some()
}

fn build_vocab(config: &PreprocessConfig, output: Option<&Path>) -> Result<()> {
    let v = AtomicVocab::build(config.canvas, config.overflow_tolerance);
    if let Some(p) = output {
        write_atomic(p, v.to_json().as_bytes())?;
    }
    println!("{} tokens", v.len());
    Ok(())
}

/// Cleaned atomic sequences for every sample that survives preprocessing.
fn load_corpus(t: &Tokenizer, inputs: &[Input], tally: &mut Tally) -> Result<Vec<(PathBuf, String, TokenSeq, NoiseReport)>> {
    let mut out = Vec::new();
    process_ordered(
        inputs,
        |i| {
            let raw = read_text(&i.path)?;
            let (seq, report) = t.encode_atomic(&raw)?;
            Ok((raw, seq, report))
        },
        |i, r| {
            if let Some((raw, seq, report)) = tally.record(i, r) {
                out.push((i.path.clone(), raw, seq, report));
            }
            Ok(())
        },
    )?;
    tally.require_some()?;
    Ok(out)
}

fn train_segments(config: &PreprocessConfig, inputs: &[PathBuf], params: TrainParams, output: &Path) -> Result<()> {
    let t = Tokenizer::new(config.clone(), None)?;
    let inputs = expand_inputs(inputs, SVG)?;
    let mut tally = Tally::default();
    let corpus: Vec<TokenSeq> = load_corpus(&t, &inputs, &mut tally)?.into_iter().map(|(_, _, s, _)| s).collect();
    let sv = t.train(&corpus, params)?;
    write_atomic(output, sv.to_json(t.atomic()).as_bytes())?;
    println!("learned {} merges from {} samples, {} failed", sv.len(), tally.ok, tally.failed);
    Ok(())
}

fn encode(t: &Tokenizer, io: &IoArgs, format: Format) -> Result<()> {
    let inputs = expand_inputs(&io.inputs, SVG)?;
    let target = OutputTarget::new(&io.inputs, &inputs, &io.output, SVG);
    let ext = match format {
        Format::Text => "tok",
        Format::Ids => "ids",
    };
    let mut tally = Tally::default();
    let mut tokens = 0usize;
    process_ordered(
        &inputs,
        |i| {
            let seq = t.encode(&read_text(&i.path)?)?;
            let body = match format {
                Format::Text => t.to_text(&seq) + "\n",
                Format::Ids => to_ids(&seq),
            };
            Ok((seq.len(), body))
        },
        |i, r| {
            if let Some((n, body)) = tally.record(i, r) {
                tokens += n;
                write_atomic(&target.path_for(i, ext), body.as_bytes())?;
            }
            Ok(())
        },
    )?;
    println!("encoded {} samples into {tokens} tokens, {} failed", tally.ok, tally.failed);
    tally.require_some()
}

fn decode(t: &Tokenizer, io: &IoArgs, format: Option<Format>) -> Result<()> {
    let inputs = expand_inputs(&io.inputs, TOKENS)?;
    let target = OutputTarget::new(&io.inputs, &inputs, &io.output, TOKENS);
    let mut tally = Tally::default();
    process_ordered(
        &inputs,
        |i| {
            let text = read_text(&i.path)?;
            let ids = format.map_or_else(|| i.path.extension().is_some_and(|e| e == "ids"), |f| f == Format::Ids);
            let seq = if ids { from_ids(&text)? } else { t.from_text(text.trim_end_matches(['\n', '\r']))? };
            Ok(t.decode_to_svg(&seq)? + "\n")
        },
        |i, r| {
            if let Some(svg) = tally.record(i, r) {
                write_atomic(&target.path_for(i, "svg"), svg.as_bytes())?;
            }
            Ok(())
        },
    )?;
    summary("decoded", &tally);
    tally.require_some()
}

fn baseline_counter(b: Baseline) -> Result<Box<dyn TokenCounter>> {
    Ok(match b {
        Baseline::Cl100k => {
            let bpe = tiktoken_rs::cl100k_base().context("loading cl100k_base")?;
            Box::new(FnCounter::new("cl100k_base", move |s: &str| bpe.encode_ordinary(s).len()))
        }
        Baseline::O200k => {
            let bpe = tiktoken_rs::o200k_base().context("loading o200k_base")?;
            Box::new(FnCounter::new("o200k_base", move |s: &str| bpe.encode_ordinary(s).len()))
        }
        Baseline::Bytes => Box::new(FnCounter::new("utf8_bytes", |s: &str| s.len())),
    })
}

#[derive(Serialize)]
struct StatsReport {
    failed: usize,
    compression: svgtok_core::metrics::CompressionReport,
    cleaning: NoiseReport,
    partition: BTreeMap<String, usize>,
    segments: Option<SegmentStats>,
}

fn stats(t: &Tokenizer, inputs: &[PathBuf], baseline: Baseline, lit: LitMode, output: Option<&Path>) -> Result<()> {
    let counter = baseline_counter(baseline)?;
    let inputs = expand_inputs(inputs, SVG)?;
    let mut tally = Tally::default();
    let corpus = load_corpus(t, &inputs, &mut tally)?;
    let mut cleaning = NoiseReport::default();
    corpus.iter().for_each(|(_, _, _, r)| cleaning.merge(r));
    let samples: Vec<CorpusSample> =
        corpus.into_iter().map(|(_, raw, atomic, _)| CorpusSample { raw, atomic }).collect();
    let compression = compression_report(&samples, t.atomic(), t.segments(), counter.as_ref(), lit)?;
    let seqs: Vec<TokenSeq> = samples.into_iter().map(|s| s.atomic).collect();
    let buckets = partition_by_length(&seqs, lit);
    let segments = if t.segments().is_empty() { None } else { Some(segment_stats(t.segments(), &seqs, t.atomic())?) };

    print!("{}", compression.to_table());
    print!("{}", noise_table(&cleaning));
    print!("{}", buckets.to_table());
    if let Some(s) = &segments {
        for b in &s.buckets {
            println!("{:<8} {:>4} composites, {:>7} uses, median length {:.1}", b.name, b.composites, b.uses, b.atomic_length.median);
        }
    }
    let report = StatsReport {
        failed: tally.failed,
        compression,
        cleaning,
        partition: buckets.counts.iter().map(|(k, v)| (k.name().to_string(), *v)).collect(),
        segments,
    };
    if let Some(p) = output {
        write_atomic(p, (serde_json::to_string_pretty(&report)? + "\n").as_bytes())?;
    }
    println!("stats over {} samples, {} failed", tally.ok, tally.failed);
    Ok(())
}

#[derive(Serialize)]
struct PartitionRow {
    path: String,
    length: usize,
    stage: &'static str,
}

fn partition(t: &Tokenizer, inputs: &[PathBuf], lit: LitMode, output: Option<&Path>) -> Result<()> {
    let inputs = expand_inputs(inputs, SVG)?;
    let mut tally = Tally::default();
    let corpus = load_corpus(t, &inputs, &mut tally)?;
    let seqs: Vec<TokenSeq> = corpus.iter().map(|(_, _, s, _)| s.clone()).collect();
    let b = partition_by_length(&seqs, lit);
    if let Some(p) = output {
        let rows: Vec<PartitionRow> = corpus
            .iter()
            .zip(b.lengths.iter().zip(&b.assignment))
            .map(|((path, ..), (&length, stage))| PartitionRow {
                path: path.display().to_string(),
                length,
                stage: stage.name(),
            })
            .collect();
        let mut body = String::new();
        for r in rows {
            body.push_str(&serde_json::to_string(&r)?);
            body.push('\n');
        }
        write_atomic(p, body.as_bytes())?;
    }
    let counts: Vec<String> = b.counts.iter().map(|(k, v)| format!("{}={v}", k.name())).collect();
    println!("partitioned {} samples: {}, {} failed", tally.ok, counts.join(" "), tally.failed);
    Ok(())
}

fn init_embeddings(config: &PreprocessConfig, a: &InitArgs) -> Result<()> {
    let params = HmnParams {
        lambda_mu: a.lambda_mu,
        lambda_n: a.lambda_n,
        w_sem: a.w_sem,
        w_num: a.w_num,
        k: a.rbf_k,
        poly_degree: a.poly_degree,
        rbf_width: a.rbf_width,
        seed: a.seed,
    };
    params.validate().map_err(|e| UsageError(e.to_string()))?;
    let base = EmbeddingTable::load(&a.base).with_context(|| format!("loading {}", a.base.display()))?;
    let atomic = AtomicVocab::build(config.canvas, config.overflow_tolerance);
    let manifest = match &a.descriptions {
        Some(p) => DescriptionManifest::load(p).with_context(|| format!("loading {}", p.display()))?,
        None => DescriptionManifest::default(),
    };
    let mut metas = atomic_metas(&atomic, base.rows(), &manifest);
    if let Some(p) = &a.segments {
        let sv = SegmentVocab::load(p, &atomic).with_context(|| format!("loading {}", p.display()))?;
        metas.extend(segment_metas(&sv, &atomic, base.rows(), &manifest));
    }
    let table = HmnInit::new(&base, params)?.vocab(&metas)?;
    let bytes = match a.table_format {
        TableFormat::Binary => table.to_bytes(),
        TableFormat::Json => table.to_json().into_bytes(),
    };
    write_atomic(&a.output, &bytes)?;
    let man = InitManifest::new(params, &base, metas.into_iter().map(|m| m.token).collect());
    let mut man_path = a.output.clone().into_os_string();
    man_path.push(".manifest.json");
    write_atomic(Path::new(&man_path), (serde_json::to_string_pretty(&man)? + "\n").as_bytes())?;
    println!("initialized {} tokens with {} dimensions", table.rows(), table.cols());
    Ok(())
}
