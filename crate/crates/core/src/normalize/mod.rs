//! OCR cleanup chain: dehyphenation, garbage removal, repeat squeezing and
//! dictionary correction, plus language identification.

mod dehyphen;
mod distance;
mod language;
mod lexicon;
mod rules;
mod spell;

use serde::{Deserialize, Serialize};

pub use dehyphen::{
    dehyphenate, BlockLocation, Dehyphenated, NormalizeWarning, StreamToken, TokenRef, TokenSource,
};
pub use distance::{edit_distance, within_one_edit};
pub use language::{
    detect_language, Detection, LanguageError, LanguageProfile, MAX_NGRAM, MIN_TEXT_CHARS, PROFILE_SIZE,
};
pub use lexicon::{Lexicon, LexiconError};
pub use rules::{squeeze_repeats, strip_garbage, SingleLetterExceptions, Verdict};
pub use spell::{best_candidate, spell_correct, SpellOutcome, SpellStatus};

use crate::alto::AltoPage;
use crate::layout::Abbreviations;
use crate::span::Span;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Correction {
    None,
    Dehyphenated,
    Squeezed,
    SpellCorrected,
    Removed,
}

/// A token after cleanup, tied back to the source tokens it came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizedToken {
    /// Empty when `correction` is `Removed`.
    pub text: String,
    pub original: String,
    pub sources: Vec<TokenSource>,
    pub correction: Correction,
    /// Set once the token is placed in the document text.
    pub char_span: Option<Span>,
    /// Spell checking found neither the word nor a close neighbour.
    pub unknown: bool,
}

impl NormalizedToken {
    pub fn is_removed(&self) -> bool {
        self.correction == Correction::Removed
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizedBlock {
    pub location: BlockLocation,
    pub page_id: String,
    pub block_id: String,
    pub tokens: Vec<NormalizedToken>,
}

impl NormalizedBlock {
    pub fn kept(&self) -> impl Iterator<Item = &NormalizedToken> {
        self.tokens.iter().filter(|t| !t.is_removed())
    }

    /// Kept tokens joined by single spaces.
    pub fn text(&self) -> String {
        let mut out = String::new();
        for t in self.kept() {
            if !out.is_empty() {
                out.push(' ');
            }
            out.push_str(&t.text);
        }
        out
    }

    pub fn is_empty(&self) -> bool {
        self.kept().next().is_none()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormalizeStats {
    /// Tokens entering the cleanup rules, after dehyphenation.
    pub tokens_in: usize,
    pub tokens_kept: usize,
    pub tokens_removed: usize,
    pub tokens_squeezed: usize,
    pub tokens_corrected: usize,
    pub tokens_unknown: usize,
    pub merges: usize,
}

#[derive(Debug, Clone, Default)]
pub struct NormalizeConfig {
    pub exceptions: SingleLetterExceptions,
    pub abbreviations: Abbreviations,
}

#[derive(Debug, Clone, Default)]
pub struct NormalizedPages {
    /// One entry per physical block, in reading order.
    pub blocks: Vec<NormalizedBlock>,
    pub stats: NormalizeStats,
    pub warnings: Vec<NormalizeWarning>,
}

const SENTENCE_END: &[char] = &['.', '!', '?', '…'];
const CLOSERS: &[char] = &['»', '"', '\'', ')', ']', '”', '’'];

fn split_edges(token: &str) -> (&str, &str, &str) {
    let start = token
        .char_indices()
        .find(|(_, c)| c.is_alphanumeric())
        .map(|(i, _)| i)
        .unwrap_or(token.len());
    let end = token
        .char_indices()
        .rev()
        .find(|(_, c)| c.is_alphanumeric())
        .map(|(i, c)| i + c.len_utf8())
        .unwrap_or(start);
    (&token[..start], &token[start..end], &token[end..])
}

fn ends_sentence(token: &str, abbreviations: &Abbreviations) -> bool {
    token.trim_end_matches(CLOSERS).ends_with(SENTENCE_END) && !abbreviations.contains(token)
}

/// Applies the cleanup rules to one token. Returns the new text, the
/// correction applied and whether spell checking flagged it unknown.
pub fn clean_token(
    token: &StreamToken,
    lexicon: &Lexicon,
    exceptions: &SingleLetterExceptions,
    sentence_initial: bool,
) -> NormalizedToken {
    let make = |text: String, correction, unknown| NormalizedToken {
        text,
        original: token.original.clone(),
        sources: token.sources.clone(),
        correction,
        char_span: None,
        unknown,
    };
    if strip_garbage(&token.text, exceptions) == Verdict::Remove {
        return make(String::new(), Correction::Removed, false);
    }
    let squeezed = squeeze_repeats(&token.text, lexicon);
    let was_squeezed = squeezed != token.text;
    let (lead, core, trail) = split_edges(&squeezed);
    let spell = spell_correct(core, lexicon, sentence_initial);
    let corrected = spell.status == SpellStatus::Corrected;
    let text = if corrected {
        format!("{lead}{}{trail}", spell.text)
    } else {
        squeezed.into_owned()
    };
    let correction = if corrected {
        Correction::SpellCorrected
    } else if was_squeezed {
        Correction::Squeezed
    } else if token.dehyphenated {
        Correction::Dehyphenated
    } else {
        Correction::None
    };
    make(text, correction, spell.status == SpellStatus::Unknown)
}

/// Runs the whole cleanup chain over the pages of one document.
pub fn normalize_pages(pages: &[AltoPage], lexicon: &Lexicon, config: &NormalizeConfig) -> NormalizedPages {
    let stream = dehyphenate(pages);
    let mut blocks: Vec<NormalizedBlock> = pages
        .iter()
        .enumerate()
        .flat_map(|(pi, page)| {
            page.blocks.iter().enumerate().map(move |(bi, block)| NormalizedBlock {
                location: (pi, bi),
                page_id: page.page_id.clone(),
                block_id: block.block_id.clone(),
                tokens: Vec::new(),
            })
        })
        .collect();
    let mut offsets = Vec::with_capacity(pages.len());
    let mut acc = 0;
    for page in pages {
        offsets.push(acc);
        acc += page.blocks.len();
    }

    let mut stats = NormalizeStats {
        tokens_in: stream.tokens.len(),
        merges: stream.merges,
        ..Default::default()
    };
    let mut current_block = None;
    let mut sentence_initial = true;
    for token in &stream.tokens {
        if current_block != Some(token.block) {
            current_block = Some(token.block);
            sentence_initial = true;
        }
        let cleaned = clean_token(token, lexicon, &config.exceptions, sentence_initial);
        match cleaned.correction {
            Correction::Removed => stats.tokens_removed += 1,
            Correction::Squeezed => stats.tokens_squeezed += 1,
            Correction::SpellCorrected => stats.tokens_corrected += 1,
            _ => {}
        }
        if cleaned.unknown {
            stats.tokens_unknown += 1;
        }
        if !cleaned.is_removed() {
            sentence_initial = ends_sentence(&cleaned.text, &config.abbreviations);
        }
        let (pi, bi) = token.block;
        blocks[offsets[pi] + bi].tokens.push(cleaned);
    }
    stats.tokens_kept = stats.tokens_in - stats.tokens_removed;
    NormalizedPages {
        blocks,
        stats,
        warnings: stream.warnings,
    }
}
