use std::sync::LazyLock;

use chrono::NaiveDate;
use regex::Regex;
use serde::{Deserialize, Serialize};

use super::{BlockLabel, LogicalBlock};
use crate::annotate::detect_temporal;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeaderMetadata {
    pub masthead: Option<String>,
    pub issue_date: Option<NaiveDate>,
    pub issue_number: Option<String>,
}

static ISSUE_NUMBER: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"(?i)(?:\bn\s?[°ºo]\.?|\bnuméro|\bnumero)\s*(?P<num>\d+)\b").expect("valid regex")
});
static SEPARATORS: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"\s*[—–|·]\s*|\s+-\s+").expect("valid regex"));

/// Text before the first date or issue number of a header segment.
fn leading_name(segment: &str) -> &str {
    let date_at = detect_temporal(segment, None).first().map(|m| {
        segment
            .char_indices()
            .nth(m.span.start)
            .map_or(segment.len(), |(b, _)| b)
    });
    let number_at = ISSUE_NUMBER.find(segment).map(|m| m.start());
    let cut = date_at.into_iter().chain(number_at).min().unwrap_or(segment.len());
    segment[..cut].trim().trim_matches(|c: char| c.is_ascii_punctuation()).trim()
}

fn masthead_of(text: &str) -> Option<String> {
    SEPARATORS
        .split(text)
        .map(leading_name)
        .find(|s| s.chars().any(char::is_alphabetic))
        .map(str::to_string)
}

fn date_of(text: &str) -> Option<NaiveDate> {
    detect_temporal(text, None)
        .into_iter()
        .filter_map(|m| m.normalized)
        .find_map(|n| NaiveDate::parse_from_str(&n, "%Y-%m-%d").ok())
}

/// Most frequent value; ties go to the value seen first.
fn plurality<T: PartialEq + Clone>(values: impl IntoIterator<Item = T>) -> Option<T> {
    let mut counts: Vec<(T, usize)> = Vec::new();
    for v in values {
        match counts.iter_mut().find(|(x, _)| *x == v) {
            Some((_, n)) => *n += 1,
            None => counts.push((v, 1)),
        }
    }
    let best = counts.iter().map(|(_, n)| *n).max()?;
    counts.into_iter().find(|(_, n)| *n == best).map(|(v, _)| v)
}

/// Masthead, issue date and issue number voted over the running headers.
/// Blocks not labelled `Header` are ignored.
pub fn extract_header_metadata<'a>(blocks: impl IntoIterator<Item = &'a LogicalBlock>) -> HeaderMetadata {
    let texts: Vec<&str> = blocks
        .into_iter()
        .filter(|b| b.label == BlockLabel::Header)
        .map(|b| b.text.as_str())
        .collect();
    HeaderMetadata {
        masthead: plurality(texts.iter().filter_map(|t| masthead_of(t))),
        issue_date: plurality(texts.iter().filter_map(|t| date_of(t))),
        issue_number: plurality(
            texts
                .iter()
                .filter_map(|t| ISSUE_NUMBER.captures(t).map(|c| c["num"].to_string())),
        ),
    }
}
