use std::collections::{HashMap, HashSet};

use super::{BlockLabel, BlockRef, LayoutConfig, LayoutRule, LogicalBlock};
use crate::alto::{AltoPage, TextBlock};
use crate::normalize::NormalizedBlock;

/// Collection-level statistics the labelling rules depend on.
///
/// Computed over the pages of one collection only, so labels in one
/// collection never depend on other documents of the batch.
#[derive(Debug, Clone, Default)]
pub struct CollectionStats {
    pub pages: usize,
    /// Header key -> number of pages with a top-band line carrying it.
    pub header_pages: HashMap<String, usize>,
    pub body_median_font: Option<f64>,
}

/// Comparison key for running headers: lowercase letters only, so page
/// numbers and punctuation do not break recurrence. Letterless lines share
/// the key `#`.
pub fn header_key(text: &str) -> String {
    let key = text
        .chars()
        .map(|c| if c.is_alphabetic() { c.to_lowercase().next().unwrap_or(c) } else { ' ' })
        .collect::<String>()
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ");
    if key.is_empty() {
        "#".to_string()
    } else {
        key
    }
}

fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let mid = values.len() / 2;
    Some(if values.len().is_multiple_of(2) {
        (values[mid - 1] + values[mid]) / 2.0
    } else {
        values[mid]
    })
}

fn block_fonts(page: &AltoPage, block: &TextBlock) -> Vec<f64> {
    block
        .lines
        .iter()
        .flat_map(|l| &l.tokens)
        .filter_map(|t| page.font_size(block, t))
        .collect()
}

fn in_header_band(page: &AltoPage, block: &TextBlock, config: &LayoutConfig) -> bool {
    block.lines.len() == 1
        && page.height > 0
        && block
            .bbox
            .is_some_and(|b| b.center_y() <= config.header_band * page.height as f64)
}

impl CollectionStats {
    pub fn compute(pages: &[AltoPage], blocks: &[NormalizedBlock], config: &LayoutConfig) -> Self {
        let mut header_pages: HashMap<String, usize> = HashMap::new();
        let mut per_page: Vec<HashSet<String>> = vec![HashSet::new(); pages.len()];
        for nb in blocks {
            let (pi, bi) = nb.location;
            let page = &pages[pi];
            if !nb.is_empty() && in_header_band(page, &page.blocks[bi], config) {
                per_page[pi].insert(header_key(&nb.text()));
            }
        }
        for keys in per_page {
            for key in keys {
                *header_pages.entry(key).or_insert(0) += 1;
            }
        }
        let mut fonts: Vec<f64> = pages
            .iter()
            .flat_map(|p| p.blocks.iter().flat_map(move |b| block_fonts(p, b)))
            .collect();
        Self {
            pages: pages.len(),
            header_pages,
            body_median_font: median(&mut fonts),
        }
    }

    fn recurs(&self, key: &str, config: &LayoutConfig) -> bool {
        if self.pages < config.header_min_pages.max(1) {
            return false;
        }
        let seen = self.header_pages.get(key).copied().unwrap_or(0);
        seen as f64 >= config.header_recurrence * self.pages as f64
    }
}

fn is_caps_line(text: &str, token_count: usize, max_tokens: usize) -> bool {
    let mut letters = text.chars().filter(|c| c.is_alphabetic()).peekable();
    letters.peek().is_some() && letters.all(char::is_uppercase) && token_count <= max_tokens
}

/// Labels every block with the first matching rule: O1 (empty), H1, T1, P1.
pub fn classify_blocks(
    pages: &[AltoPage],
    blocks: &[NormalizedBlock],
    stats: &CollectionStats,
    config: &LayoutConfig,
) -> Vec<LogicalBlock> {
    blocks
        .iter()
        .map(|nb| {
            let (pi, bi) = nb.location;
            let page = &pages[pi];
            let physical = &page.blocks[bi];
            let text = nb.text();
            let token_count = nb.kept().count();
            let (label, rule) = if nb.is_empty() {
                (BlockLabel::Other, LayoutRule::O1)
            } else if in_header_band(page, physical, config) && stats.recurs(&header_key(&text), config) {
                (BlockLabel::Header, LayoutRule::H1)
            } else if median(&mut block_fonts(page, physical))
                .zip(stats.body_median_font)
                .is_some_and(|(block, body)| block >= config.title_font_ratio * body)
            {
                (BlockLabel::Title, LayoutRule::T1Font)
            } else if physical.lines.len() == 1 && is_caps_line(&text, token_count, config.title_max_tokens) {
                (BlockLabel::Title, LayoutRule::T1Caps)
            } else {
                (BlockLabel::Paragraph, LayoutRule::P1)
            };
            LogicalBlock {
                block_ref: BlockRef {
                    page_id: nb.page_id.clone(),
                    block_id: nb.block_id.clone(),
                },
                location: nb.location,
                label,
                rule,
                text,
                tokens: nb.tokens.clone(),
                char_span: None,
                sentences: Vec::new(),
            }
        })
        .collect()
}
