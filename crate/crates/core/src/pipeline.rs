//! End-to-end tokenizer: SVG text to segment tokens and back.

use crate::atomic::{
    decode_atomic, encode_atomic, from_text_with, to_text_with, AtomicError, AtomicVocab, TokenSeq,
};
use crate::ir::{serialize_svg, SvgDocument};
use crate::preprocess::{preprocess, PreprocessConfig, PreprocessError};
use crate::segment::{
    clean_sequence, encode_segments, expand_segments, train, NoiseReport, SegmentError, SegmentVocab, TrainParams,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Preprocess(#[from] PreprocessError),
    #[error("[atomic] {0}")]
    Atomic(#[from] AtomicError),
    #[error("[segment] {0}")]
    Segment(#[from] SegmentError),
    #[error("[config] {0}")]
    Config(String),
}

impl PipelineError {
    pub fn name(&self) -> &'static str {
        match self {
            PipelineError::Preprocess(e) => e.name(),
            PipelineError::Atomic(e) => e.name(),
            PipelineError::Segment(e) => e.name(),
            PipelineError::Config(_) => "InvalidConfig",
        }
    }

    /// Pipeline stage the error came from.
    pub fn stage(&self) -> String {
        match self {
            PipelineError::Preprocess(e) => e.stage().to_string(),
            PipelineError::Atomic(_) => "atomic".into(),
            PipelineError::Segment(_) => "segment".into(),
            PipelineError::Config(_) => "config".into(),
        }
    }
}

/// Immutable preprocessing config plus both vocabularies.
///
/// Encoding runs `preprocess -> encode_atomic -> clean -> encode_segments`;
/// decoding runs `expand_segments -> decode_atomic`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tokenizer {
    config: PreprocessConfig,
    atomic: AtomicVocab,
    segments: SegmentVocab,
}

impl Tokenizer {
    pub fn new(config: PreprocessConfig, segments: Option<SegmentVocab>) -> Result<Self, PipelineError> {
        config.validate().map_err(PipelineError::Config)?;
        let atomic = AtomicVocab::build(config.canvas, config.overflow_tolerance);
        let segments = match segments {
            Some(sv) => {
                if sv.canvas() != (config.canvas, config.overflow_tolerance) || sv.atomic_size() as usize != atomic.len() {
                    return Err(PipelineError::Config(format!(
                        "segment vocab built for canvas {:?}, config has ({}, {})",
                        sv.canvas(),
                        config.canvas,
                        config.overflow_tolerance
                    )));
                }
                sv
            }
            None => SegmentVocab::empty(&atomic),
        };
        Ok(Self { config, atomic, segments })
    }

    pub fn config(&self) -> &PreprocessConfig {
        &self.config
    }

    pub fn atomic(&self) -> &AtomicVocab {
        &self.atomic
    }

    pub fn segments(&self) -> &SegmentVocab {
        &self.segments
    }

    pub fn with_segments(mut self, segments: SegmentVocab) -> Result<Self, PipelineError> {
        let t = Self::new(self.config.clone(), Some(segments))?;
        self.segments = t.segments;
        Ok(self)
    }

    pub fn preprocess(&self, svg: &str) -> Result<SvgDocument, PipelineError> {
        Ok(preprocess(svg, &self.config)?)
    }

    /// The document the tokens describe: preprocessed, then with
    /// geometry-free commands removed. `decode(encode(x))` equals this.
    pub fn canonical(&self, svg: &str) -> Result<SvgDocument, PipelineError> {
        let (seq, _) = self.encode_atomic(svg)?;
        Ok(decode_atomic(&seq, &self.atomic)?)
    }

    /// Cleaned atomic sequence plus its cleaning report.
    pub fn encode_atomic(&self, svg: &str) -> Result<(TokenSeq, NoiseReport), PipelineError> {
        let doc = self.preprocess(svg)?;
        let seq = encode_atomic(&doc, &self.atomic)?;
        Ok(clean_sequence(&seq, &self.atomic)?)
    }

    pub fn encode(&self, svg: &str) -> Result<TokenSeq, PipelineError> {
        let (seq, _) = self.encode_atomic(svg)?;
        Ok(encode_segments(&seq, &self.segments, &self.atomic)?)
    }

    /// Accepts atomic or segment-encoded sequences.
    pub fn decode(&self, seq: &TokenSeq) -> Result<SvgDocument, PipelineError> {
        let flat = expand_segments(seq, &self.segments)?;
        Ok(decode_atomic(&flat, &self.atomic)?)
    }

    pub fn decode_to_svg(&self, seq: &TokenSeq) -> Result<String, PipelineError> {
        Ok(serialize_svg(&self.decode(seq)?))
    }

    pub fn token_name(&self, id: u32) -> Option<String> {
        self.segments.token_name(id, &self.atomic)
    }

    pub fn token_id(&self, token: &str) -> Option<u32> {
        self.segments.token_id(token, &self.atomic)
    }

    pub fn to_text(&self, seq: &TokenSeq) -> String {
        to_text_with(seq, |id| self.token_name(id))
    }

    pub fn from_text(&self, text: &str) -> Result<TokenSeq, PipelineError> {
        Ok(from_text_with(text, |t| self.token_id(t))?)
    }

    /// Learns segment merges from cleaned atomic sequences produced by this
    /// tokenizer.
    pub fn train(&self, corpus: &[TokenSeq], params: TrainParams) -> Result<SegmentVocab, PipelineError> {
        Ok(train(corpus, &self.atomic, params)?)
    }
}
