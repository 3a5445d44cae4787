use archive_lens_core::emit::{DocbookContent, UnitKind, UNIT_SEPARATOR};
use archive_lens_core::Span;

/// Index form of a surface token: lowercased, edge punctuation trimmed.
/// Returns `None` when nothing alphanumeric is left.
pub fn index_term(surface: &str) -> Option<String> {
    let core = surface.trim_matches(|c: char| !c.is_alphanumeric());
    (!core.is_empty()).then(|| core.to_lowercase())
}

/// One indexable token of a document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DocToken {
    pub term: String,
    /// Characters of the whitespace-delimited surface token.
    pub span: Span,
    pub in_title: bool,
}

/// Indexable tokens of the text rebuilt from DocBook, in order. Spans refer
/// to `content.normalized_text()`.
pub fn tokenize(content: &DocbookContent) -> Vec<DocToken> {
    let sep = UNIT_SEPARATOR.chars().count();
    let mut out = Vec::new();
    let mut offset = 0;
    for (k, (kind, unit)) in content.units().into_iter().enumerate() {
        if k > 0 {
            offset += sep;
        }
        let in_title = kind == UnitKind::Title;
        let mut start: Option<(usize, usize)> = None;
        let mut pos = offset;
        for (byte, c) in unit.char_indices() {
            if c.is_whitespace() {
                if let Some((cs, bs)) = start.take() {
                    push(&mut out, &unit[bs..byte], Span::new(cs, pos), in_title);
                }
            } else if start.is_none() {
                start = Some((pos, byte));
            }
            pos += 1;
        }
        if let Some((cs, bs)) = start {
            push(&mut out, &unit[bs..], Span::new(cs, pos), in_title);
        }
        offset = pos;
    }
    out
}

fn push(out: &mut Vec<DocToken>, surface: &str, span: Span, in_title: bool) {
    if let Some(term) = index_term(surface) {
        out.push(DocToken { term, span, in_title });
    }
}

/// Terms of a query string, split on whitespace.
pub fn query_terms(text: &str) -> Vec<String> {
    text.split_whitespace().filter_map(index_term).collect()
}
