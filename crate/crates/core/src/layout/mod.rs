//! Logical layout analysis: block labels, sentences, sections and the
//! metadata carried by running headers.

mod classify;
mod header;
mod sections;
mod sentences;

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

pub use classify::{classify_blocks, header_key, CollectionStats};
pub use header::{extract_header_metadata, HeaderMetadata};
pub use sections::{segment_labels, segment_sections, Section};
pub use sentences::{split_sentences, Sentence};

use crate::normalize::{BlockLocation, NormalizedToken};
use crate::span::Span;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockLabel {
    Title,
    Header,
    Paragraph,
    Other,
}

/// Which labelling rule fired for a block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LayoutRule {
    /// Recurring single line in the top band of the page.
    H1,
    /// Font markedly larger than the body text.
    T1Font,
    /// Short single uppercase line.
    T1Caps,
    /// Default for text blocks.
    P1,
    /// Nothing left after normalization.
    O1,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BlockRef {
    pub page_id: String,
    pub block_id: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogicalBlock {
    pub block_ref: BlockRef,
    pub location: BlockLocation,
    pub label: BlockLabel,
    pub rule: LayoutRule,
    pub text: String,
    pub tokens: Vec<NormalizedToken>,
    /// Where the block text sits in the document text, when emitted there.
    pub char_span: Option<Span>,
    /// Filled for paragraphs; spans are relative to `text`.
    pub sentences: Vec<Sentence>,
}

/// Abbreviations that never end a sentence. Entries are compared with any
/// trailing period removed, so `Mme` also covers `Mme.`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "Vec<String>", into = "Vec<String>")]
pub struct Abbreviations(HashSet<String>);

pub const DEFAULT_ABBREVIATIONS: &[&str] = &[
    "N.B.", "P.S.", "M.", "MM.", "Mme", "Mlle", "St", "Ste", "etc.", "art.", "fr.",
];

impl Default for Abbreviations {
    fn default() -> Self {
        Self::new(DEFAULT_ABBREVIATIONS.iter().copied())
    }
}

impl Abbreviations {
    pub fn new<I, S>(entries: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        Self(
            entries
                .into_iter()
                .map(|e| e.as_ref().trim().trim_end_matches('.').to_string())
                .filter(|e| !e.is_empty())
                .collect(),
        )
    }

    pub fn contains(&self, token: &str) -> bool {
        let bare = token
            .trim_start_matches(['«', '"', '(', '“'])
            .trim_end_matches(['»', '"', ')', '”', ','])
            .trim_end_matches('.');
        self.0.contains(bare)
    }
}

impl From<Vec<String>> for Abbreviations {
    fn from(v: Vec<String>) -> Self {
        Self::new(v)
    }
}

impl From<Abbreviations> for Vec<String> {
    fn from(a: Abbreviations) -> Self {
        let mut v: Vec<String> = a.0.into_iter().map(|e| format!("{e}.")).collect();
        v.sort();
        v
    }
}

/// Thresholds of the labelling rules.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LayoutConfig {
    /// Fraction of page height treated as the running-header band.
    pub header_band: f64,
    /// Fraction of the collection's pages a header text must recur on.
    pub header_recurrence: f64,
    /// Collections with fewer pages never produce headers.
    pub header_min_pages: usize,
    pub title_font_ratio: f64,
    pub title_max_tokens: usize,
    pub abbreviations: Abbreviations,
}

impl Default for LayoutConfig {
    fn default() -> Self {
        Self {
            header_band: 0.08,
            header_recurrence: 0.5,
            header_min_pages: 2,
            title_font_ratio: 1.3,
            title_max_tokens: 10,
            abbreviations: Abbreviations::default(),
        }
    }
}

impl LayoutConfig {
    /// Problems with thresholds outside their meaningful ranges.
    pub fn check(&self) -> Vec<String> {
        let mut problems = Vec::new();
        if !(0.0..=1.0).contains(&self.header_band) {
            problems.push(format!("header_band {} not in [0, 1]", self.header_band));
        }
        if !(0.0..=1.0).contains(&self.header_recurrence) || self.header_recurrence == 0.0 {
            problems.push(format!("header_recurrence {} not in (0, 1]", self.header_recurrence));
        }
        if self.title_font_ratio.is_nan() || self.title_font_ratio < 1.0 {
            problems.push(format!("title_font_ratio {} below 1", self.title_font_ratio));
        }
        if self.title_max_tokens == 0 {
            problems.push("title_max_tokens must be positive".to_string());
        }
        problems
    }
}
