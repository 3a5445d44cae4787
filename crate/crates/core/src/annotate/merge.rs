use std::collections::HashMap;

use thiserror::Error;

use super::{Annotation, AnnotationKind, Mention};
use crate::normalize::TokenRef;
use crate::span::{CharIndex, Span};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MergeError {
    #[error("annotation {surface:?} at {span:?} does not match the document text")]
    SpanOutOfRange { surface: String, span: Span },
    #[error("annotation {surface:?} at {span:?} covers no source token")]
    NoAnchor { surface: String, span: Span },
    #[error("{kind:?} annotations overlap at {span:?}")]
    Overlap { kind: AnnotationKind, span: Span },
}

/// Mentions of one sentence (or title) with the sentence's document offset.
#[derive(Debug, Clone, Default)]
pub struct AnnotationUnit {
    pub offset: usize,
    pub mentions: Vec<Mention>,
}

/// Rebases sentence-level mentions into document character space, checks
/// them against the text, anchors them on source tokens and numbers them in
/// document order.
///
/// `tokens` lists the document's placed tokens (span, sources), sorted by span.
pub fn merge_annotations(
    doc_id: &str,
    doc_text: &str,
    units: Vec<AnnotationUnit>,
    tokens: &[(Span, Vec<TokenRef>)],
) -> Result<Vec<Annotation>, MergeError> {
    let index = CharIndex::new(doc_text);
    let mut rebased: Vec<(Span, Mention)> = units
        .into_iter()
        .flat_map(|u| {
            let offset = u.offset;
            u.mentions.into_iter().map(move |m| (m.span.shift(offset), m))
        })
        .collect();
    rebased.sort_by(|a, b| {
        (a.0.start, a.0.end, a.1.kind).cmp(&(b.0.start, b.0.end, b.1.kind))
    });

    let mut last_end: HashMap<AnnotationKind, usize> = HashMap::new();
    let mut out = Vec::with_capacity(rebased.len());
    for (span, m) in rebased {
        if index.slice(span) != Some(m.surface.as_str()) {
            return Err(MergeError::SpanOutOfRange { surface: m.surface, span });
        }
        let end = last_end.entry(m.kind).or_insert(0);
        if span.start < *end {
            return Err(MergeError::Overlap { kind: m.kind, span });
        }
        *end = span.end;

        let first = tokens.partition_point(|(t, _)| t.end <= span.start);
        let anchors: Vec<TokenRef> = tokens[first..]
            .iter()
            .take_while(|(t, _)| t.start < span.end)
            .filter(|(t, _)| t.overlaps(&span))
            .flat_map(|(_, refs)| refs.iter().cloned())
            .collect();
        if anchors.is_empty() {
            return Err(MergeError::NoAnchor { surface: m.surface, span });
        }
        out.push(Annotation {
            annotation_id: format!("{doc_id}-a{}", out.len() + 1),
            doc_id: doc_id.to_string(),
            span,
            kind: m.kind,
            surface: m.surface,
            normalized: m.normalized,
            rule_id: m.rule_id,
            anchors,
        });
    }
    Ok(out)
}
