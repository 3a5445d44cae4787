use serde::{Deserialize, Serialize};

use super::StructuredDocument;
use crate::alto::BBox;
use crate::annotate::{Annotation, AnnotationKind};
use crate::normalize::TokenRef;
use crate::span::Span;

/// One image rectangle on a page, in ALTO measurement units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PageBox {
    pub page: String,
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

impl PageBox {
    pub fn new(page: impl Into<String>, bbox: &BBox) -> Self {
        Self {
            page: page.into(),
            x: bbox.x,
            y: bbox.y,
            w: bbox.w,
            h: bbox.h,
        }
    }
}

/// Span of one kept token and the boxes it was read from. A dehyphenated
/// token has one box per line fragment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OffsetEntry {
    pub span: Span,
    pub boxes: Vec<PageBox>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OffsetsFile {
    pub doc_id: String,
    pub map: Vec<OffsetEntry>,
}

impl OffsetsFile {
    /// Boxes of every token overlapping `span`, in text order.
    pub fn boxes_for(&self, span: Span) -> Vec<&PageBox> {
        let first = self.map.partition_point(|e| e.span.end <= span.start);
        self.map[first..]
            .iter()
            .take_while(|e| e.span.start < span.end)
            .filter(|e| e.span.overlaps(&span))
            .flat_map(|e| e.boxes.iter())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationRecord {
    pub id: String,
    pub kind: AnnotationKind,
    pub span: Span,
    pub surface: String,
    pub normalized: Option<String>,
    pub rule_id: String,
    pub anchors: Vec<TokenRef>,
}

impl AnnotationRecord {
    pub fn value(&self) -> &str {
        self.normalized.as_deref().unwrap_or(&self.surface)
    }
}

impl From<&Annotation> for AnnotationRecord {
    fn from(a: &Annotation) -> Self {
        Self {
            id: a.annotation_id.clone(),
            kind: a.kind,
            span: a.span,
            surface: a.surface.clone(),
            normalized: a.normalized.clone(),
            rule_id: a.rule_id.clone(),
            anchors: a.anchors.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationsFile {
    pub doc_id: String,
    pub annotations: Vec<AnnotationRecord>,
}

/// Serializes the annotation sidecar and the offset map, in that order.
pub fn emit_standoff(doc: &StructuredDocument) -> (Vec<u8>, Vec<u8>) {
    let annotations = AnnotationsFile {
        doc_id: doc.doc_id.clone(),
        annotations: doc.annotations.iter().map(AnnotationRecord::from).collect(),
    };
    let offsets = OffsetsFile {
        doc_id: doc.doc_id.clone(),
        map: doc.offset_map.clone(),
    };
    (
        serde_json::to_vec_pretty(&annotations).expect("annotations serialize"),
        serde_json::to_vec(&offsets).expect("offsets serialize"),
    )
}
