//! Character n-gram language identification with the rank-order
//! ("out-of-place") distance between frequency profiles.

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const PROFILE_SIZE: usize = 400;
pub const MAX_NGRAM: usize = 4;
pub const MIN_TEXT_CHARS: usize = 40;

#[derive(Debug, Error)]
pub enum LanguageError {
    #[error("no language profiles loaded")]
    NoProfiles,
    #[error("cannot read profile {path}: {message}")]
    Load { path: String, message: String },
}

/// Top-ranked n-grams of one language, most frequent first (rank = index + 1).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LanguageProfile {
    pub language: String,
    pub ngrams: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Detection {
    Detected { language: String, confidence: f64 },
    Unknown,
}

fn ranked_ngrams(text: &str, size: usize) -> Vec<String> {
    let mut counts: HashMap<String, usize> = HashMap::new();
    let lower = text.to_lowercase();
    for word in lower.split(|c: char| !c.is_alphabetic()).filter(|w| !w.is_empty()) {
        let padded: Vec<char> = std::iter::once('_')
            .chain(word.chars())
            .chain(std::iter::once('_'))
            .collect();
        for n in 1..=MAX_NGRAM {
            for window in padded.windows(n) {
                if n == 1 && window[0] == '_' {
                    continue;
                }
                *counts.entry(window.iter().collect()).or_insert(0) += 1;
            }
        }
    }
    let mut ranked: Vec<(String, usize)> = counts.into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    ranked.truncate(size);
    ranked.into_iter().map(|(g, _)| g).collect()
}

impl LanguageProfile {
    pub fn from_text(language: impl Into<String>, sample: &str) -> Self {
        Self {
            language: language.into(),
            ngrams: ranked_ngrams(sample, PROFILE_SIZE),
        }
    }

    pub fn from_json(bytes: &[u8]) -> Result<Self, serde_json::Error> {
        serde_json::from_slice(bytes)
    }

    /// Loads one profile file, or every `*.json` file of a directory.
    pub fn load_all(path: &Path) -> Result<Vec<Self>, LanguageError> {
        let err = |p: &Path, e: &dyn std::fmt::Display| LanguageError::Load {
            path: p.display().to_string(),
            message: e.to_string(),
        };
        let files = if path.is_dir() {
            let mut files: Vec<_> = std::fs::read_dir(path)
                .map_err(|e| err(path, &e))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|x| x == "json"))
                .collect();
            files.sort();
            files
        } else {
            vec![path.to_path_buf()]
        };
        files
            .iter()
            .map(|f| {
                let bytes = std::fs::read(f).map_err(|e| err(f, &e))?;
                Self::from_json(&bytes).map_err(|e| err(f, &e))
            })
            .collect()
    }

    fn out_of_place(&self, text_ngrams: &[String]) -> usize {
        let ranks: HashMap<&str, usize> = self
            .ngrams
            .iter()
            .enumerate()
            .map(|(i, g)| (g.as_str(), i))
            .collect();
        text_ngrams
            .iter()
            .enumerate()
            .map(|(i, g)| match ranks.get(g.as_str()) {
                Some(&r) => r.abs_diff(i),
                None => PROFILE_SIZE,
            })
            .sum()
    }
}

/// Nearest profile by out-of-place distance. Confidence is the relative
/// margin over the runner-up (or over the worst possible distance when only
/// one profile is loaded). Texts shorter than [`MIN_TEXT_CHARS`] are `Unknown`.
pub fn detect_language(text: &str, profiles: &[LanguageProfile]) -> Result<Detection, LanguageError> {
    if profiles.is_empty() {
        return Err(LanguageError::NoProfiles);
    }
    if text.trim().chars().count() < MIN_TEXT_CHARS {
        return Ok(Detection::Unknown);
    }
    let grams = ranked_ngrams(text, PROFILE_SIZE);
    if grams.is_empty() {
        return Ok(Detection::Unknown);
    }
    let mut scored: Vec<(usize, &LanguageProfile)> =
        profiles.iter().map(|p| (p.out_of_place(&grams), p)).collect();
    scored.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.language.cmp(&b.1.language)));
    let best = scored[0].0 as f64;
    let reference = match scored.get(1) {
        Some(&(second, _)) => second as f64,
        None => (grams.len() * PROFILE_SIZE) as f64,
    };
    let confidence = if reference > 0.0 {
        ((reference - best) / reference).clamp(0.0, 1.0)
    } else {
        0.0
    };
    Ok(Detection::Detected {
        language: scored[0].1.language.clone(),
        confidence,
    })
}
