use serde::{Deserialize, Serialize};

use super::lexicon::Lexicon;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpellStatus {
    Known,
    ProperNoun,
    Corrected,
    Unknown,
    /// Not a purely alphabetic word; left untouched.
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpellOutcome {
    pub text: String,
    pub status: SpellStatus,
}

/// Best lexicon entry within one edit: highest frequency, then lexicographic.
pub fn best_candidate<'a>(word: &str, lexicon: &'a Lexicon) -> Option<&'a str> {
    lexicon
        .candidates_within_one(word)
        .into_iter()
        .max_by(|a, b| {
            let fa = lexicon.frequency(a).unwrap_or(0);
            let fb = lexicon.frequency(b).unwrap_or(0);
            fa.cmp(&fb).then_with(|| b.cmp(a))
        })
}

fn restore_case(template: &str, word: &str) -> String {
    let mut letters = template.chars().filter(|c| c.is_alphabetic());
    let first_upper = letters.next().is_some_and(char::is_uppercase);
    let all_upper = first_upper && template.chars().count() > 1 && letters.all(char::is_uppercase);
    if all_upper {
        word.to_uppercase()
    } else if first_upper {
        let mut chars = word.chars();
        chars
            .next()
            .map(|c| c.to_uppercase().chain(chars).collect())
            .unwrap_or_default()
    } else {
        word.to_string()
    }
}

/// Dictionary correction restricted to edit distance 1.
///
/// Known words and presumed proper nouns (capitalized, not sentence-initial)
/// are kept. Otherwise the best distance-1 candidate replaces the token, with
/// its capitalization pattern carried over.
pub fn spell_correct(token: &str, lexicon: &Lexicon, sentence_initial: bool) -> SpellOutcome {
    let keep = |status| SpellOutcome {
        text: token.to_string(),
        status,
    };
    if token.is_empty() || !token.chars().all(char::is_alphabetic) {
        return keep(SpellStatus::Skipped);
    }
    if lexicon.contains(token) {
        return keep(SpellStatus::Known);
    }
    let capitalized = token.chars().next().is_some_and(char::is_uppercase);
    if capitalized && !sentence_initial {
        return keep(SpellStatus::ProperNoun);
    }
    let lower = token.to_lowercase();
    match best_candidate(&lower, lexicon) {
        Some(best) => SpellOutcome {
            text: restore_case(token, best),
            status: SpellStatus::Corrected,
        },
        None => keep(SpellStatus::Unknown),
    }
}
