//! French temporal expressions: full dates, month-year, bare years and a
//! closed set of relative day expressions.

use std::sync::LazyLock;

use chrono::{Duration, NaiveDate};
use regex::Regex;

use super::{AnnotationKind, Mention};
use crate::span::Span;

const MONTHS: &str = "janvier|février|fevrier|mars|avril|mai|juin|juillet|août|aout|septembre|octobre|novembre|décembre|decembre";
const WEEKDAYS: &str = "lundi|mardi|mercredi|jeudi|vendredi|samedi|dimanche";

static FULL_DATE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(&format!(
        r"(?i)\b(?:(?:{WEEKDAYS}),?\s+)?(?P<day>1er|[0-3]?\d)\s+(?P<month>{MONTHS})\s+(?P<year>\d{{4}})\b"
    ))
    .expect("valid regex")
});
static MONTH_YEAR: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(&format!(r"(?i)\b(?P<month>{MONTHS})\s+(?P<year>\d{{4}})\b")).expect("valid regex")
});
static YEAR: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"\b(?P<year>1\d{3}|20\d{2})\b").expect("valid regex"));
static RELATIVE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"(?i)\b(?:avant-hier|après-demain|aujourd['’]hui|hier|demain)\b").expect("valid regex")
});

/// Month number for a French month name (case-insensitive, accents optional).
pub fn month_number(name: &str) -> Option<u32> {
    Some(match name.to_lowercase().as_str() {
        "janvier" => 1,
        "février" | "fevrier" => 2,
        "mars" => 3,
        "avril" => 4,
        "mai" => 5,
        "juin" => 6,
        "juillet" => 7,
        "août" | "aout" => 8,
        "septembre" => 9,
        "octobre" => 10,
        "novembre" => 11,
        "décembre" | "decembre" => 12,
        _ => return None,
    })
}

/// Day offset of a relative expression.
pub fn relative_offset(surface: &str) -> Option<i64> {
    Some(match surface.to_lowercase().replace('’', "'").as_str() {
        "avant-hier" => -2,
        "hier" => -1,
        "aujourd'hui" => 0,
        "demain" => 1,
        "après-demain" => 2,
        _ => return None,
    })
}

struct Candidate {
    bytes: (usize, usize),
    normalized: Option<String>,
    rule: &'static str,
}

fn candidates(text: &str, anchor: Option<NaiveDate>) -> Vec<Candidate> {
    let mut out = Vec::new();
    for caps in FULL_DATE.captures_iter(text) {
        let whole = caps.get(0).expect("group 0");
        let day = match &caps["day"] {
            d if d.eq_ignore_ascii_case("1er") => 1,
            d => d.parse().unwrap_or(0),
        };
        let month = month_number(&caps["month"]).unwrap_or(0);
        let year: i32 = caps["year"].parse().unwrap_or(0);
        if let Some(date) = NaiveDate::from_ymd_opt(year, month, day) {
            out.push(Candidate {
                bytes: (whole.start(), whole.end()),
                normalized: Some(date.format("%Y-%m-%d").to_string()),
                rule: "temporal:date",
            });
        }
    }
    for caps in MONTH_YEAR.captures_iter(text) {
        let whole = caps.get(0).expect("group 0");
        let month = month_number(&caps["month"]).unwrap_or(0);
        out.push(Candidate {
            bytes: (whole.start(), whole.end()),
            normalized: Some(format!("{}-{:02}", &caps["year"], month)),
            rule: "temporal:month-year",
        });
    }
    for m in YEAR.find_iter(text) {
        out.push(Candidate {
            bytes: (m.start(), m.end()),
            normalized: Some(m.as_str().to_string()),
            rule: "temporal:year",
        });
    }
    for m in RELATIVE.find_iter(text) {
        let normalized = anchor
            .zip(relative_offset(m.as_str()))
            .map(|(d, off)| (d + Duration::days(off)).format("%Y-%m-%d").to_string());
        out.push(Candidate {
            bytes: (m.start(), m.end()),
            normalized,
            rule: "temporal:relative",
        });
    }
    out
}

/// Temporal expressions of one sentence, longest match first, no overlaps.
///
/// Explicit dates normalize to ISO-8601 at their precision; relative ones
/// are resolved against `anchor` (publication date) or left unnormalized.
pub fn detect_temporal(text: &str, anchor: Option<NaiveDate>) -> Vec<Mention> {
    let mut cands = candidates(text, anchor);
    cands.sort_by(|a, b| {
        (b.bytes.1 - b.bytes.0)
            .cmp(&(a.bytes.1 - a.bytes.0))
            .then(a.bytes.0.cmp(&b.bytes.0))
    });
    let mut taken: Vec<Candidate> = Vec::new();
    for c in cands {
        if taken.iter().all(|t| c.bytes.1 <= t.bytes.0 || t.bytes.1 <= c.bytes.0) {
            taken.push(c);
        }
    }
    taken.sort_by_key(|c| c.bytes.0);
    taken
        .into_iter()
        .map(|c| {
            let start = text[..c.bytes.0].chars().count();
            let surface = &text[c.bytes.0..c.bytes.1];
            Mention {
                span: Span::new(start, start + surface.chars().count()),
                kind: AnnotationKind::TemporalExpr,
                surface: surface.to_string(),
                normalized: c.normalized,
                rule_id: c.rule.to_string(),
            }
        })
        .collect()
}
