//! Hierarchical SVG tokenization.
//!
//! The pipeline runs in layers:
//!
//! 1. [`ir`] parses SVG text into an owned tree with parsed path data.
//! 2. [`preprocess`] cleans the tree, inlines `<use>`, bakes transforms,
//!    normalizes the viewBox to a square canvas, quantizes coordinates and
//!    rewrites paths in relative form.
//! 3. [`atomic`] maps a preprocessed document onto a closed vocabulary of
//!    structure, command, coordinate and arc-flag tokens, and back.
//! 4. [`segment`] learns merges over whole command+parameter segments and
//!    applies them to atomic sequences.
//! 5. [`hmn`] builds initialization vectors for the new tokens.
//! 6. [`metrics`] computes corpus-level compression, cleaning and
//!    length-partition statistics.
//!
//! [`pipeline::Tokenizer`] wires the stages together for callers that only
//! want `svg text -> tokens -> svg text`.

pub mod atomic;
pub mod hmn;
pub mod ir;
pub mod metrics;
pub mod pipeline;
pub mod preprocess;
pub mod segment;

pub use atomic::{AtomicVocab, TokenItem, TokenSeq};
pub use ir::{parse_svg, serialize_svg, SvgDocument};
pub use pipeline::{PipelineError, Tokenizer};
pub use preprocess::{preprocess, PreprocessConfig};
pub use segment::SegmentVocab;
