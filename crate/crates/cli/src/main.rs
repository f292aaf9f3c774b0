use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod io;

#[derive(Parser, Debug)]
#[command(name = "svgtok", version, about = "Hierarchical SVG tokenizer")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "SVGTOK_JOBS")]
    jobs: Option<usize>,
    /// Side of the square target canvas.
    #[arg(long, global = true, default_value_t = 784)]
    canvas: u32,
    /// Coordinate overflow allowed past the canvas edge.
    #[arg(long, global = true, default_value_t = 10)]
    tolerance: u32,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Normalize SVG files onto the canvas and drop geometry-free commands.
    Preprocess(IoArgs),
    /// Build the atomic vocabulary.
    BuildVocab {
        /// Write the vocabulary as JSON.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Learn segment merges from a corpus.
    TrainSegments {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long, default_value_t = 500)]
        merges: usize,
        #[arg(long, default_value_t = 2)]
        min_freq: u64,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Tokenize SVG files.
    Encode {
        #[command(flatten)]
        io: IoArgs,
        /// Segment vocabulary; atomic tokens only when absent.
        #[arg(long)]
        segments: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Turn token files back into SVG.
    Decode {
        #[command(flatten)]
        io: IoArgs,
        #[arg(long)]
        segments: Option<PathBuf>,
        /// Input format; by default `.ids` files are ids and anything else text.
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
    /// Compression, cleaning and length statistics.
    Stats {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long)]
        segments: Option<PathBuf>,
        /// Raw-text token counter.
        #[arg(long, value_enum, default_value_t = Baseline::Cl100k)]
        baseline: Baseline,
        #[arg(long, value_enum, default_value_t = LitArg::Items)]
        lit_mode: LitArg,
        /// Write the full report as JSON.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Assign samples to curriculum stages by atomic length.
    Partition {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long, value_enum, default_value_t = LitArg::Items)]
        lit_mode: LitArg,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Initialize embeddings for the new tokens.
    InitEmbeddings(InitArgs),
}

#[derive(Args, Debug)]
struct IoArgs {
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    /// Output file (single input) or directory.
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args, Debug)]
struct InitArgs {
    /// Pretrained embedding table (binary or JSON).
    #[arg(long)]
    base: PathBuf,
    /// Segment vocabulary; composites get rows after the atomic tokens.
    #[arg(long)]
    segments: Option<PathBuf>,
    /// JSON map from token string to base-vocabulary ids.
    #[arg(long)]
    descriptions: Option<PathBuf>,
    #[arg(long, env = "SVGTOK_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.8)]
    lambda_mu: f64,
    #[arg(long, default_value_t = 0.02)]
    lambda_n: f64,
    #[arg(long, default_value_t = 0.1)]
    w_sem: f64,
    #[arg(long, default_value_t = 0.08)]
    w_num: f64,
    /// Number of RBF centers.
    #[arg(long, default_value_t = 16)]
    rbf_k: usize,
    #[arg(long, default_value_t = 1.0)]
    rbf_width: f64,
    #[arg(long, default_value_t = 3)]
    poly_degree: usize,
    #[arg(long, value_enum, default_value_t = TableFormat::Binary)]
    table_format: TableFormat,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Text,
    Ids,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum TableFormat {
    Binary,
    Json,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Baseline {
    /// cl100k_base subword tokenizer.
    Cl100k,
    /// o200k_base subword tokenizer.
    O200k,
    /// UTF-8 bytes.
    Bytes,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum LitArg {
    Items,
    Chars,
}

/// Bad flag combinations; reported with exit code 2 before any work.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
struct UsageError(String);

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(if e.is::<UsageError>() { 2 } else { 1 })
        }
    }
}
