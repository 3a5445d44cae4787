use serde::{Deserialize, Serialize};

use crate::alto::{AltoPage, BBox};

/// Position of a source token inside the physical layout.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TokenRef {
    pub page: String,
    pub block: String,
    pub line: String,
    pub token: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TokenSource {
    pub at: TokenRef,
    pub bbox: Option<BBox>,
}

/// Index of the block a stream token belongs to: `(page index, block index)`.
pub type BlockLocation = (usize, usize);

#[derive(Debug, Clone, PartialEq)]
pub struct StreamToken {
    pub text: String,
    pub original: String,
    pub sources: Vec<TokenSource>,
    pub block: BlockLocation,
    pub dehyphenated: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum NormalizeWarning {
    /// A hyphenated line had no following line to join; the fragment is kept.
    DanglingHyphen { at: TokenRef },
}

#[derive(Debug, Clone, Default)]
pub struct Dehyphenated {
    pub tokens: Vec<StreamToken>,
    pub merges: usize,
    pub warnings: Vec<NormalizeWarning>,
}

const HYPHENS: &[char] = &['-', '\u{2010}', '\u{00AD}', '¬', '⸗'];

fn strip_hyphen(text: &str) -> &str {
    match text.strip_suffix(HYPHENS) {
        Some(rest) if !rest.is_empty() => rest,
        _ => text,
    }
}

/// Rejoins words split by end-of-line `HYP` marks across the given pages,
/// read in order. Lines without tokens are stepped over; a mark on the final
/// line with nothing after it leaves the fragment (hyphen included) as is.
pub fn dehyphenate(pages: &[AltoPage]) -> Dehyphenated {
    let mut out = Dehyphenated::default();
    let mut pending: Option<StreamToken> = None;

    for (page_index, page) in pages.iter().enumerate() {
        for (block_index, block) in page.blocks.iter().enumerate() {
            for line in &block.lines {
                if line.tokens.is_empty() {
                    continue;
                }
                let mut line_tokens: Vec<StreamToken> = line
                    .tokens
                    .iter()
                    .enumerate()
                    .map(|(i, t)| StreamToken {
                        text: t.content.clone(),
                        original: t.content.clone(),
                        sources: vec![TokenSource {
                            at: TokenRef {
                                page: page.page_id.clone(),
                                block: block.block_id.clone(),
                                line: line.line_id.clone(),
                                token: i,
                            },
                            bbox: t.bbox,
                        }],
                        block: (page_index, block_index),
                        dehyphenated: false,
                    })
                    .collect();

                if let Some(mut left) = pending.take() {
                    let right = line_tokens.remove(0);
                    left.text = format!("{}{}", strip_hyphen(&left.text), right.text);
                    left.original.push_str(&right.original);
                    left.sources.extend(right.sources);
                    left.dehyphenated = true;
                    out.merges += 1;
                    line_tokens.insert(0, left);
                }
                if line.trailing_hyphen {
                    pending = line_tokens.pop();
                }
                out.tokens.extend(line_tokens);
            }
        }
    }
    if let Some(last) = pending {
        out.warnings.push(NormalizeWarning::DanglingHyphen {
            at: last.sources.last().map(|s| s.at.clone()).expect("token has a source"),
        });
        out.tokens.push(last);
    }
    out
}
