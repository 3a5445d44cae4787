//! Stand-off semantic annotation: temporal expressions and named entities.

mod entities;
mod merge;
mod temporal;

use serde::{Deserialize, Serialize};

pub use entities::{tag_entities, EntityTagger, Gazetteer, GazetteerError, DEFAULT_HONORIFICS};
pub use merge::{merge_annotations, AnnotationUnit, MergeError};
pub use temporal::{detect_temporal, month_number, relative_offset};

use crate::normalize::TokenRef;
use crate::span::Span;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnnotationKind {
    Person,
    Place,
    TemporalExpr,
}

impl AnnotationKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            AnnotationKind::Person => "person",
            AnnotationKind::Place => "place",
            AnnotationKind::TemporalExpr => "temporal_expr",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "person" => Some(Self::Person),
            "place" => Some(Self::Place),
            "temporal_expr" | "temporal" => Some(Self::TemporalExpr),
            _ => None,
        }
    }
}

/// A match inside one sentence, before it is anchored in the document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mention {
    /// Character span relative to the sentence.
    pub span: Span,
    pub kind: AnnotationKind,
    pub surface: String,
    pub normalized: Option<String>,
    pub rule_id: String,
}

/// Document-level stand-off annotation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Annotation {
    pub annotation_id: String,
    pub doc_id: String,
    pub span: Span,
    pub kind: AnnotationKind,
    pub surface: String,
    pub normalized: Option<String>,
    pub rule_id: String,
    pub anchors: Vec<TokenRef>,
}

impl Annotation {
    /// Canonical value used for indexing: the normalized form when present.
    pub fn value(&self) -> &str {
        self.normalized.as_deref().unwrap_or(&self.surface)
    }
}
