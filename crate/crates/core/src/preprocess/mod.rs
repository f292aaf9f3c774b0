//! Corpus preprocessing: cleaning, coordinate transformation, quantization.
//!
//! [`preprocess`] runs the stages in a fixed order:
//!
//! ```text
//! parse -> clean -> expand_use -> bake_transforms -> normalize_viewbox -> quantize_and_relativize
//! ```
//!
//! Transforms are baked only after `<use>` inlining so a transformed `<use>`
//! contributes its transform exactly once, and quantization happens only once
//! the document is in canvas units.

mod bake;
mod clean;
mod geometry;
mod matrix;
mod quantize;
mod use_expand;
mod viewbox;

use std::collections::BTreeSet;
use std::fmt;

use crate::ir::{parse_svg, Element, ParseError, PathCommand, SvgDocument};

pub use bake::bake_transforms;
pub use clean::{clean_document, DEFAULT_FILL};
pub use geometry::{absolutize, endpoints, transform_arc};
pub use matrix::{parse_transform_list, TransformMatrix};
pub use quantize::quantize_and_relativize;
pub use use_expand::expand_use;
pub use viewbox::normalize_viewbox;

#[derive(Debug, Clone, PartialEq)]
pub struct PreprocessConfig {
    /// Side of the square target canvas.
    pub canvas: u32,
    /// Overflow allowed past the canvas edge before clamping.
    pub overflow_tolerance: u32,
    /// Elements that cause the whole document to be rejected.
    pub reject_tags: BTreeSet<String>,
    /// Elements removed together with their subtree.
    pub drop_tags: BTreeSet<String>,
    /// Insert a full-canvas dark rectangle behind the content.
    pub dark_background: bool,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        Self {
            canvas: 784,
            overflow_tolerance: 10,
            reject_tags: ["script", "image"].into_iter().map(String::from).collect(),
            drop_tags: ["foreignObject"].into_iter().map(String::from).collect(),
            dark_background: false,
        }
    }
}

impl PreprocessConfig {
    pub fn with_canvas(canvas: u32, overflow_tolerance: u32) -> Self {
        Self { canvas, overflow_tolerance, ..Self::default() }
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.canvas == 0 {
            return Err("canvas must be at least 1".into());
        }
        Ok(())
    }

    /// Largest representable absolute coordinate.
    pub fn max_coord(&self) -> i64 {
        self.canvas as i64 + self.overflow_tolerance as i64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Parse,
    Clean,
    ExpandUse,
    BakeTransforms,
    NormalizeViewBox,
    Quantize,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Parse => "parse",
            Stage::Clean => "clean",
            Stage::ExpandUse => "expand_use",
            Stage::BakeTransforms => "bake_transforms",
            Stage::NormalizeViewBox => "normalize_viewbox",
            Stage::Quantize => "quantize",
        })
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PreprocessError {
    #[error("[parse] {0}")]
    Parse(#[from] ParseError),
    #[error("[clean] rejected content: <{0}>")]
    RejectedContent(String),
    #[error("[expand_use] dangling reference #{0}")]
    DanglingReference(String),
    #[error("[expand_use] cyclic reference through #{0}")]
    CyclicReference(String),
    #[error("[bake_transforms] unparsable transform {0:?}")]
    BadTransform(String),
    #[error("[bake_transforms] singular transform (determinant {0})")]
    SingularTransform(f64),
    #[error("[normalize_viewbox] degenerate viewBox {width}x{height}")]
    DegenerateViewBox { width: f64, height: f64 },
    #[error("[quantize] unstable sample: no geometry left after clipping")]
    UnstableSample,
}

impl PreprocessError {
    pub fn stage(&self) -> Stage {
        match self {
            PreprocessError::Parse(_) => Stage::Parse,
            PreprocessError::RejectedContent(_) => Stage::Clean,
            PreprocessError::DanglingReference(_) | PreprocessError::CyclicReference(_) => Stage::ExpandUse,
            PreprocessError::BadTransform(_) | PreprocessError::SingularTransform(_) => Stage::BakeTransforms,
            PreprocessError::DegenerateViewBox { .. } => Stage::NormalizeViewBox,
            PreprocessError::UnstableSample => Stage::Quantize,
        }
    }

    /// Stable variant name, used in diagnostics and foreign bindings.
    pub fn name(&self) -> &'static str {
        match self {
            PreprocessError::Parse(ParseError::MalformedMarkup(_)) => "MalformedMarkup",
            PreprocessError::Parse(ParseError::BadPathData(_)) => "BadPathData",
            PreprocessError::RejectedContent(_) => "RejectedContent",
            PreprocessError::DanglingReference(_) => "DanglingReference",
            PreprocessError::CyclicReference(_) => "CyclicReference",
            PreprocessError::BadTransform(_) => "BadTransform",
            PreprocessError::SingularTransform(_) => "SingularTransform",
            PreprocessError::DegenerateViewBox { .. } => "DegenerateViewBox",
            PreprocessError::UnstableSample => "UnstableSample",
        }
    }
}

/// Full preprocessing pipeline from raw SVG text.
pub fn preprocess(text: &str, cfg: &PreprocessConfig) -> Result<SvgDocument, PreprocessError> {
    let doc = parse_svg(text)?;
    preprocess_document(doc, cfg)
}

/// Pipeline starting from an already parsed document.
pub fn preprocess_document(doc: SvgDocument, cfg: &PreprocessConfig) -> Result<SvgDocument, PreprocessError> {
    let doc = clean_document(doc, cfg)?;
    let doc = expand_use(doc)?;
    let doc = bake_transforms(doc)?;
    let mut doc = normalize_viewbox(doc, cfg)?;
    if cfg.dark_background {
        insert_dark_background(&mut doc, cfg.canvas as f64);
    }
    quantize_and_relativize(doc, cfg)
}

pub const DARK_BACKGROUND_FILL: &str = "#000000";

fn insert_dark_background(doc: &mut SvgDocument, canvas: f64) {
    let mut bg = Element::path(vec![
        PathCommand::move_to(false, 0.0, 0.0),
        PathCommand::line_to(false, canvas, 0.0),
        PathCommand::line_to(false, canvas, canvas),
        PathCommand::line_to(false, 0.0, canvas),
        PathCommand::close(false),
    ]);
    bg.set_attr("fill", DARK_BACKGROUND_FILL);
    doc.root.children.insert(0, bg);
}

/// Parses a plain number attribute, tolerating a `px` suffix.
pub(crate) fn parse_number_attr(s: &str) -> Option<f64> {
    let s = s.trim();
    let s = s.strip_suffix("px").unwrap_or(s).trim();
    s.parse::<f64>().ok().filter(|v| v.is_finite())
}

/// Formats derived attribute values (stroke widths, font sizes) with at most
/// three decimals.
pub(crate) fn format_attr_number(v: f64) -> String {
    crate::ir::format_number((v * 1000.0).round() / 1000.0)
}
