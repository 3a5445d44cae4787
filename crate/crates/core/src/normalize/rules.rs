//! Rule-based OCR cleanup: garbage removal and repeated-letter squeezing.

use std::borrow::Cow;
use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::lexicon::Lexicon;

/// Runs beyond this count are all collapsed to one letter without lexicon arbitration.
const MAX_ARBITRATED_RUNS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Keep,
    Remove,
}

/// Single-character tokens that survive garbage removal (digits always do).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SingleLetterExceptions(HashSet<char>);

impl Default for SingleLetterExceptions {
    fn default() -> Self {
        Self(['a', 'à', 'y', 'ô'].into_iter().collect())
    }
}

impl SingleLetterExceptions {
    pub fn new(letters: impl IntoIterator<Item = char>) -> Self {
        Self(letters.into_iter().flat_map(char::to_lowercase).collect())
    }

    pub fn contains(&self, c: char) -> bool {
        c.is_numeric() || c.to_lowercase().all(|l| self.0.contains(&l))
    }
}

/// Removes tokens without any alphanumeric character, and single-character
/// tokens other than digits and the configured exception letters.
pub fn strip_garbage(token: &str, exceptions: &SingleLetterExceptions) -> Verdict {
    if !token.chars().any(char::is_alphanumeric) {
        return Verdict::Remove;
    }
    let mut chars = token.chars();
    match (chars.next(), chars.next()) {
        (Some(c), None) if !exceptions.contains(c) => Verdict::Remove,
        _ => Verdict::Keep,
    }
}

fn letter_runs(chars: &[char]) -> Vec<(usize, usize)> {
    let mut runs = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let mut j = i + 1;
        while j < chars.len() && chars[j] == chars[i] {
            j += 1;
        }
        if j - i >= 3 && chars[i].is_alphabetic() {
            runs.push((i, j));
        }
        i = j;
    }
    runs
}

fn collapse(chars: &[char], runs: &[(usize, usize)], keep_two: u32) -> String {
    let mut out = String::with_capacity(chars.len());
    let mut cursor = 0;
    for (k, &(start, end)) in runs.iter().enumerate() {
        out.extend(&chars[cursor..start]);
        let keep = if k < 32 && keep_two & (1 << k) != 0 { 2 } else { 1 };
        out.extend(std::iter::repeat_n(chars[start], keep));
        cursor = end;
    }
    out.extend(&chars[cursor..]);
    out
}

/// Collapses every run of three or more identical letters.
///
/// Each run may shrink to one or two letters; candidates are tried with the
/// all-single collapse first and the first one found in the lexicon wins.
/// Without a lexicon hit every run becomes a single letter. Digit runs are
/// left alone so numbers such as `1000` survive.
pub fn squeeze_repeats<'a>(token: &'a str, lexicon: &Lexicon) -> Cow<'a, str> {
    let chars: Vec<char> = token.chars().collect();
    let runs = letter_runs(&chars);
    if runs.is_empty() {
        return Cow::Borrowed(token);
    }
    if runs.len() <= MAX_ARBITRATED_RUNS {
        for mask in 0..(1u32 << runs.len()) {
            let candidate = collapse(&chars, &runs, mask);
            if lexicon.contains(&candidate) {
                return Cow::Owned(candidate);
            }
        }
    }
    Cow::Owned(collapse(&chars, &runs, 0))
}
