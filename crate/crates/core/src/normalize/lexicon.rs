use std::collections::{HashMap, HashSet};
use std::path::Path;

use thiserror::Error;

use super::distance::within_one_edit;

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("cannot read lexicon: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: expected \"word<TAB>frequency\", got {text:?}")]
    BadLine { line: usize, text: String },
}

/// Lowercase word forms with frequencies and a symmetric-delete index.
///
/// The deletion index maps every entry and each of its single-character
/// deletion variants to the entries producing it. Two words within one edit
/// of each other always share a key, so looking up the query and its own
/// deletions yields every distance-1 candidate.
#[derive(Debug, Clone, Default)]
pub struct Lexicon {
    words: Vec<String>,
    frequencies: HashMap<String, u64>,
    deletion_index: HashMap<String, Vec<u32>>,
}

/// Every string obtained by deleting exactly one character.
pub(crate) fn single_deletions(word: &str) -> Vec<String> {
    let chars: Vec<(usize, char)> = word.char_indices().collect();
    let mut out = Vec::with_capacity(chars.len());
    for &(i, c) in &chars {
        let mut s = String::with_capacity(word.len());
        s.push_str(&word[..i]);
        s.push_str(&word[i + c.len_utf8()..]);
        out.push(s);
    }
    out
}

impl Lexicon {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_entries<I, S>(entries: I) -> Self
    where
        I: IntoIterator<Item = (S, u64)>,
        S: AsRef<str>,
    {
        let mut lexicon = Self::new();
        for (word, freq) in entries {
            lexicon.insert(word.as_ref(), freq);
        }
        lexicon
    }

    /// Adds a word (lowercased). Re-inserting keeps the larger frequency.
    pub fn insert(&mut self, word: &str, frequency: u64) {
        let word = word.to_lowercase();
        if word.is_empty() {
            return;
        }
        if let Some(f) = self.frequencies.get_mut(&word) {
            *f = (*f).max(frequency);
            return;
        }
        let id = self.words.len() as u32;
        let mut keys = single_deletions(&word);
        keys.push(word.clone());
        let mut seen = HashSet::with_capacity(keys.len());
        for key in keys {
            if seen.insert(key.clone()) {
                self.deletion_index.entry(key).or_default().push(id);
            }
        }
        self.frequencies.insert(word.clone(), frequency);
        self.words.push(word);
    }

    /// Parses `word<TAB>frequency` lines; blank lines and `#` comments skipped.
    pub fn parse(text: &str) -> Result<Self, LexiconError> {
        let mut lexicon = Self::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = || LexiconError::BadLine {
                line: i + 1,
                text: line.to_string(),
            };
            let (word, freq) = line.split_once('\t').ok_or_else(bad)?;
            let freq: u64 = freq.trim().parse().map_err(|_| bad())?;
            if word.trim().is_empty() {
                return Err(bad());
            }
            lexicon.insert(word.trim(), freq);
        }
        Ok(lexicon)
    }

    pub fn load(path: &Path) -> Result<Self, LexiconError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Case-insensitive membership.
    pub fn contains(&self, word: &str) -> bool {
        if self.frequencies.contains_key(word) {
            return true;
        }
        let lower = word.to_lowercase();
        lower != word && self.frequencies.contains_key(&lower)
    }

    pub fn frequency(&self, word: &str) -> Option<u64> {
        self.frequencies.get(word).copied()
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.words.iter().map(String::as_str)
    }

    /// Entries within edit distance 1 of `word` (already lowercase), unordered.
    pub fn candidates_within_one(&self, word: &str) -> Vec<&str> {
        let mut keys = single_deletions(word);
        keys.push(word.to_string());
        let mut ids: Vec<u32> = keys
            .iter()
            .filter_map(|k| self.deletion_index.get(k))
            .flatten()
            .copied()
            .collect();
        ids.sort_unstable();
        ids.dedup();
        ids.into_iter()
            .map(|id| self.words[id as usize].as_str())
            .filter(|cand| within_one_edit(word, cand))
            .collect()
    }
}
