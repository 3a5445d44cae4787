use serde::{Deserialize, Serialize};

use super::Abbreviations;
use crate::span::Span;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sentence {
    pub sentence_id: usize,
    /// Character span inside the paragraph text.
    pub span: Span,
    pub text: String,
}

const TERMINATORS: &[char] = &['.', '?', '!', '…'];
const CLOSERS: &[char] = &['»', '"', ')', ']', '”', '’', '\''];
const OPENERS: &[char] = &['«', '"', '(', '[', '“', '‘', '\'', '—', '-'];

fn opens_sentence(token: &str) -> bool {
    token
        .trim_start_matches(OPENERS)
        .trim_start()
        .chars()
        .next()
        .is_some_and(|c| c.is_uppercase() || c.is_numeric())
}

/// Splits a paragraph at `.`, `?` or `!` followed by whitespace and an
/// uppercase letter or digit, unless the token carrying the punctuation is a
/// known abbreviation. Trailing text without a terminator ends the last
/// sentence.
pub fn split_sentences(text: &str, abbreviations: &Abbreviations) -> Vec<Sentence> {
    // (char start, char end, token) for each whitespace-separated token
    let mut tokens: Vec<(usize, usize, &str)> = Vec::new();
    let mut char_pos = 0;
    let mut current: Option<(usize, usize)> = None; // (char start, byte start)
    for (byte, c) in text.char_indices() {
        if c.is_whitespace() {
            if let Some((cs, bs)) = current.take() {
                tokens.push((cs, char_pos, &text[bs..byte]));
            }
        } else if current.is_none() {
            current = Some((char_pos, byte));
        }
        char_pos += 1;
    }
    if let Some((cs, bs)) = current {
        tokens.push((cs, char_pos, &text[bs..]));
    }

    let mut byte_of = Vec::with_capacity(char_pos + 1);
    byte_of.extend(text.char_indices().map(|(b, _)| b));
    byte_of.push(text.len());

    let mut sentences = Vec::new();
    let mut start: Option<usize> = None;
    for (i, &(cs, ce, token)) in tokens.iter().enumerate() {
        let first = *start.get_or_insert(cs);
        let boundary = match tokens.get(i + 1) {
            None => true,
            Some(_) => {
                // a detached opening quote defers to the word after it
                let next = tokens[i + 1..]
                    .iter()
                    .map(|t| t.2)
                    .find(|t| !t.trim_start_matches(OPENERS).is_empty());
                token.trim_end_matches(CLOSERS).ends_with(TERMINATORS)
                    && !abbreviations.contains(token)
                    && next.is_some_and(opens_sentence)
            }
        };
        if boundary {
            let span = Span::new(first, ce);
            sentences.push(Sentence {
                sentence_id: sentences.len(),
                span,
                text: text[byte_of[span.start]..byte_of[span.end]].to_string(),
            });
            start = None;
        }
    }
    sentences
}
