//! Gazetteer lookup and honorific trigger rule for persons and places.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{AnnotationKind, Mention};
use crate::span::Span;

pub const DEFAULT_HONORIFICS: &[&str] = &["M.", "MM.", "Mme", "Mlle"];

#[derive(Debug, Error)]
pub enum GazetteerError {
    #[error("cannot read gazetteer {path}: {message}")]
    Load { path: String, message: String },
    #[error("gazetteer kind must be person or place, got {0:?}")]
    BadKind(AnnotationKind),
    #[error("variant {variant:?} maps to both {first:?} and {second:?}")]
    AmbiguousVariant {
        variant: String,
        first: String,
        second: String,
    },
}

/// Canonical names with their surface variants (the canonical form is
/// always a variant of itself).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Gazetteer {
    pub kind: AnnotationKind,
    pub entries: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    pub trigger_prefixes: Vec<String>,
}

impl Gazetteer {
    pub fn from_json(bytes: &[u8]) -> Result<Self, GazetteerError> {
        let g: Gazetteer = serde_json::from_slice(bytes).map_err(|e| GazetteerError::Load {
            path: "<memory>".into(),
            message: e.to_string(),
        })?;
        g.check()?;
        Ok(g)
    }

    pub fn load(path: &Path) -> Result<Self, GazetteerError> {
        let bytes = std::fs::read(path).map_err(|e| GazetteerError::Load {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::from_json(&bytes).map_err(|e| match e {
            GazetteerError::Load { message, .. } => GazetteerError::Load {
                path: path.display().to_string(),
                message,
            },
            other => other,
        })
    }

    /// Every variant must resolve to exactly one canonical entry.
    pub fn check(&self) -> Result<(), GazetteerError> {
        if !matches!(self.kind, AnnotationKind::Person | AnnotationKind::Place) {
            return Err(GazetteerError::BadKind(self.kind));
        }
        let mut owner: HashMap<String, &str> = HashMap::new();
        for (canonical, variants) in &self.entries {
            for v in std::iter::once(canonical).chain(variants) {
                let key = words(v).into_iter().map(|w| w.2).collect::<Vec<_>>().join(" ");
                if let Some(first) = owner.insert(key, canonical) {
                    if first != canonical {
                        return Err(GazetteerError::AmbiguousVariant {
                            variant: v.clone(),
                            first: first.to_string(),
                            second: canonical.clone(),
                        });
                    }
                }
            }
        }
        Ok(())
    }
}

/// Word tokens with byte offsets: alphanumeric runs, joined across single
/// inner hyphens (`Franche-Comté` is one word). Third field is lowercased.
fn words(text: &str) -> Vec<(usize, usize, String)> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        if !chars[i].1.is_alphanumeric() {
            i += 1;
            continue;
        }
        let start = i;
        let mut j = i;
        loop {
            while j < chars.len() && chars[j].1.is_alphanumeric() {
                j += 1;
            }
            if j + 1 < chars.len() && chars[j].1 == '-' && chars[j + 1].1.is_alphanumeric() {
                j += 1;
                continue;
            }
            break;
        }
        let bs = chars[start].0;
        let be = chars.get(j).map(|c| c.0).unwrap_or(text.len());
        out.push((bs, be, text[bs..be].to_lowercase()));
        i = j;
    }
    out
}

/// Separator between two words with whitespace runs collapsed to one space.
fn gap_key(gap: &str) -> String {
    let mut out = String::with_capacity(gap.len());
    for c in gap.chars() {
        if c.is_whitespace() {
            if !out.ends_with(' ') {
                out.push(' ');
            }
        } else {
            out.push(c);
        }
    }
    out
}

#[derive(Debug, Clone)]
struct Variant {
    words: Vec<String>,
    gaps: Vec<String>,
    kind: AnnotationKind,
    canonical: String,
}

/// Longest-match tagger over a set of gazetteers.
#[derive(Debug, Clone, Default)]
pub struct EntityTagger {
    by_first_word: HashMap<String, Vec<Variant>>,
    honorifics: Vec<String>,
    person_lookup: HashMap<String, String>,
}

impl EntityTagger {
    pub fn new(gazetteers: &[Gazetteer]) -> Result<Self, GazetteerError> {
        let mut tagger = EntityTagger {
            honorifics: DEFAULT_HONORIFICS.iter().map(|s| s.to_string()).collect(),
            ..Default::default()
        };
        for g in gazetteers {
            g.check()?;
            if g.kind == AnnotationKind::Person {
                for p in &g.trigger_prefixes {
                    if !tagger.honorifics.contains(p) {
                        tagger.honorifics.push(p.clone());
                    }
                }
            }
            for (canonical, variants) in &g.entries {
                for v in std::iter::once(canonical).chain(variants) {
                    let w = words(v);
                    if w.is_empty() {
                        continue;
                    }
                    let gaps = w.windows(2).map(|p| gap_key(&v[p[0].1..p[1].0])).collect();
                    let lw: Vec<String> = w.into_iter().map(|x| x.2).collect();
                    if g.kind == AnnotationKind::Person {
                        tagger.person_lookup.insert(lw.join(" "), canonical.clone());
                    }
                    tagger.by_first_word.entry(lw[0].clone()).or_default().push(Variant {
                        words: lw,
                        gaps,
                        kind: g.kind,
                        canonical: canonical.clone(),
                    });
                }
            }
        }
        for list in tagger.by_first_word.values_mut() {
            list.sort_by(|a, b| b.words.len().cmp(&a.words.len()).then(a.canonical.cmp(&b.canonical)));
        }
        Ok(tagger)
    }

    fn is_honorific(&self, text: &str, word: &(usize, usize, String)) -> bool {
        let surface = &text[word.0..word.1];
        self.honorifics.iter().any(|h| match h.strip_suffix('.') {
            Some(bare) => surface == bare && text[word.1..].starts_with('.'),
            None => surface == h,
        })
    }

    /// Person and place mentions in one sentence. Overlaps are resolved
    /// longest span first, ties to the leftmost.
    pub fn tag(&self, text: &str) -> Vec<Mention> {
        let ws = words(text);
        // (byte start, byte end, kind, normalized, rule)
        let mut cands: Vec<(usize, usize, AnnotationKind, String, &'static str)> = Vec::new();
        for i in 0..ws.len() {
            if let Some(variants) = self.by_first_word.get(&ws[i].2) {
                let mut best_per_kind: Vec<AnnotationKind> = Vec::new();
                for v in variants {
                    if best_per_kind.contains(&v.kind) || i + v.words.len() > ws.len() {
                        continue;
                    }
                    let window = &ws[i..i + v.words.len()];
                    let same_words = window.iter().zip(&v.words).all(|(a, b)| &a.2 == b);
                    let same_gaps = window
                        .windows(2)
                        .zip(&v.gaps)
                        .all(|(p, g)| &gap_key(&text[p[0].1..p[1].0]) == g);
                    if same_words && same_gaps {
                        best_per_kind.push(v.kind);
                        let rule = match v.kind {
                            AnnotationKind::Person => "gazetteer:person",
                            _ => "gazetteer:place",
                        };
                        cands.push((window[0].0, window[window.len() - 1].1, v.kind, v.canonical.clone(), rule));
                    }
                }
            }
            if self.is_honorific(text, &ws[i]) {
                let mut j = i + 1;
                let mut end = None;
                while j < ws.len() {
                    let gap = &text[ws[j - 1].1..ws[j].0];
                    let gap_ok = if j == i + 1 {
                        gap.trim_start_matches('.').chars().all(char::is_whitespace) && !gap.is_empty()
                    } else {
                        !gap.is_empty() && gap.chars().all(char::is_whitespace)
                    };
                    let capitalized = text[ws[j].0..].chars().next().is_some_and(char::is_uppercase);
                    if !gap_ok || !capitalized || self.is_honorific(text, &ws[j]) {
                        break;
                    }
                    end = Some(j);
                    j += 1;
                }
                if let Some(last) = end {
                    let (bs, be) = (ws[i + 1].0, ws[last].1);
                    let key = ws[i + 1..=last].iter().map(|w| w.2.as_str()).collect::<Vec<_>>().join(" ");
                    let normalized = self
                        .person_lookup
                        .get(&key)
                        .cloned()
                        .unwrap_or_else(|| text[bs..be].to_string());
                    cands.push((bs, be, AnnotationKind::Person, normalized, "person:honorific"));
                }
            }
        }
        let char_len = |a: usize, b: usize| text[a..b].chars().count();
        cands.sort_by(|a, b| char_len(b.0, b.1).cmp(&char_len(a.0, a.1)).then(a.0.cmp(&b.0)));
        let mut taken: Vec<(usize, usize, AnnotationKind, String, &'static str)> = Vec::new();
        for c in cands {
            if taken.iter().all(|t| c.1 <= t.0 || t.1 <= c.0) {
                taken.push(c);
            }
        }
        taken.sort_by_key(|c| c.0);
        taken
            .into_iter()
            .map(|(bs, be, kind, normalized, rule)| {
                let start = text[..bs].chars().count();
                let surface = text[bs..be].to_string();
                Mention {
                    span: Span::new(start, start + surface.chars().count()),
                    kind,
                    surface,
                    normalized: Some(normalized),
                    rule_id: rule.to_string(),
                }
            })
            .collect()
    }
}

/// Convenience wrapper building a tagger per call; prefer [`EntityTagger`]
/// when tagging many sentences.
pub fn tag_entities(sentence: &str, gazetteers: &[Gazetteer]) -> Result<Vec<Mention>, GazetteerError> {
    Ok(EntityTagger::new(gazetteers)?.tag(sentence))
}
