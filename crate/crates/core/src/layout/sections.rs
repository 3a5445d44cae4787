use serde::{Deserialize, Serialize};

use super::{BlockLabel, LogicalBlock};
use crate::span::Span;

/// A run of titles and the paragraphs following it. A preamble section
/// (paragraphs before the first title) has no titles.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Section {
    pub section_id: usize,
    /// Indices into the document's block list.
    pub title_blocks: Vec<usize>,
    pub body_blocks: Vec<usize>,
    /// Span of the joined title group in the document text.
    pub title_span: Option<Span>,
}

/// Sections over a label sequence; headers and other blocks are skipped.
pub fn segment_labels(labels: &[BlockLabel]) -> Vec<Section> {
    let mut sections: Vec<Section> = Vec::new();
    let mut in_title_run = false;
    for (i, label) in labels.iter().enumerate() {
        match label {
            BlockLabel::Title => {
                if !in_title_run {
                    sections.push(Section {
                        section_id: sections.len(),
                        title_blocks: Vec::new(),
                        body_blocks: Vec::new(),
                        title_span: None,
                    });
                    in_title_run = true;
                }
                sections.last_mut().expect("just pushed").title_blocks.push(i);
            }
            BlockLabel::Paragraph => {
                in_title_run = false;
                if sections.is_empty() {
                    sections.push(Section {
                        section_id: 0,
                        title_blocks: Vec::new(),
                        body_blocks: Vec::new(),
                        title_span: None,
                    });
                }
                sections.last_mut().expect("non-empty").body_blocks.push(i);
            }
            BlockLabel::Header | BlockLabel::Other => {}
        }
    }
    sections
}

pub fn segment_sections(blocks: &[LogicalBlock]) -> Vec<Section> {
    let labels: Vec<BlockLabel> = blocks.iter().map(|b| b.label).collect();
    segment_labels(&labels)
}
