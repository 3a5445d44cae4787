use std::collections::{BTreeMap, BTreeSet};

use archive_lens_core::annotate::AnnotationKind;
use archive_lens_core::emit::{AnnotationRecord, DocbookContent, DocbookSection, LoadedBundle, OffsetEntry};
use archive_lens_core::span::char_slice;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::query::Field;
use crate::text::{tokenize, DocToken};

#[derive(Debug, Error)]
pub enum IndexError {
    #[error("duplicate document id {0}")]
    DuplicateDocId(String),
    #[error("bundle {doc_id} is corrupt: {reason}")]
    CorruptBundle { doc_id: String, reason: String },
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("snapshot {path} is corrupt: {reason}")]
    CorruptSnapshot { path: String, reason: String },
    #[error("no snapshot under {0}")]
    NoSnapshot(String),
}

/// What the index keeps of each document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoredDocument {
    pub doc_id: String,
    pub collection_id: Option<String>,
    pub title: Option<String>,
    pub date: Option<String>,
    pub language: Option<String>,
    pub sections: Vec<DocbookSection>,
    pub annotations: Vec<AnnotationRecord>,
    pub offsets: Vec<OffsetEntry>,
    pub offsets_path: Option<String>,
}

impl StoredDocument {
    pub fn content(&self) -> DocbookContent {
        DocbookContent {
            doc_id: Some(self.doc_id.clone()),
            collection_id: self.collection_id.clone(),
            language: self.language.clone(),
            title: self.title.clone(),
            date: self.date.clone(),
            sections: self.sections.clone(),
        }
    }

    pub fn year(&self) -> Option<i32> {
        let d = self.date.as_deref()?;
        d.get(..4).filter(|y| y.chars().all(|c| c.is_ascii_digit()))?.parse().ok()
    }

    /// Facet values of one keyword field with their occurrence counts.
    pub fn keyword_values(&self, field: Field) -> BTreeMap<String, (String, u32)> {
        let mut out: BTreeMap<String, (String, u32)> = BTreeMap::new();
        let mut add = |value: &str| {
            let e = out.entry(value.to_lowercase()).or_insert_with(|| (value.to_string(), 0));
            e.1 += 1;
        };
        match field {
            Field::Collection => self.collection_id.iter().for_each(|c| add(c)),
            Field::Year => self.year().iter().for_each(|y| add(&y.to_string())),
            Field::Person | Field::Place => {
                let kind = if field == Field::Person {
                    AnnotationKind::Person
                } else {
                    AnnotationKind::Place
                };
                self.annotations.iter().filter(|a| a.kind == kind).for_each(|a| add(a.value()));
            }
            Field::Temporal => self
                .annotations
                .iter()
                .filter(|a| a.kind == AnnotationKind::TemporalExpr)
                .filter_map(|a| temporal_year(a.normalized.as_deref()?))
                .for_each(|y| add(&y)),
            Field::Body | Field::Title => {}
        }
        out
    }
}

/// Year of an ISO date, month or year value.
pub fn temporal_year(normalized: &str) -> Option<String> {
    let y = normalized.get(..4)?;
    (y.chars().all(|c| c.is_ascii_digit()) && normalized.len() >= 4).then(|| y.to_string())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Posting {
    pub doc: u32,
    pub positions: Vec<u32>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TextField {
    pub terms: BTreeMap<String, Vec<Posting>>,
    pub doc_len: Vec<u32>,
    pub total_len: u64,
}

impl TextField {
    pub fn avg_len(&self) -> f64 {
        if self.doc_len.is_empty() {
            0.0
        } else {
            self.total_len as f64 / self.doc_len.len() as f64
        }
    }

    pub fn postings(&self, term: &str) -> &[Posting] {
        self.terms.get(term).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn tf(&self, term: &str, doc: u32) -> u32 {
        let p = self.postings(term);
        p.binary_search_by_key(&doc, |p| p.doc)
            .map(|i| p[i].positions.len() as u32)
            .unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeywordEntry {
    /// Display form: the first spelling met in doc-id order.
    pub value: String,
    /// (document, occurrences), sorted by document.
    pub postings: Vec<(u32, u32)>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct KeywordField {
    /// Keyed by lowercased value.
    pub values: BTreeMap<String, KeywordEntry>,
}

/// Per-document data derived at load time.
#[derive(Debug, Clone)]
pub(crate) struct Prepared {
    pub text: String,
    pub tokens: Vec<DocToken>,
    /// Body position of each title position.
    pub title_positions: Vec<u32>,
    /// Lowercased keyword values per field, deduplicated.
    pub keywords: BTreeMap<Field, BTreeSet<String>>,
}

impl Prepared {
    fn of(doc: &StoredDocument) -> Self {
        let content = doc.content();
        let text = content.normalized_text();
        let tokens = tokenize(&content);
        let title_positions = tokens
            .iter()
            .enumerate()
            .filter(|(_, t)| t.in_title)
            .map(|(i, _)| i as u32)
            .collect();
        let keywords = Field::KEYWORD
            .iter()
            .map(|&f| (f, doc.keyword_values(f).into_keys().collect()))
            .collect();
        Self {
            text,
            tokens,
            title_positions,
            keywords,
        }
    }
}

/// An immutable, searchable snapshot.
#[derive(Debug, Clone)]
pub struct Index {
    pub(crate) docs: Vec<StoredDocument>,
    pub(crate) prepared: Vec<Prepared>,
    pub(crate) body: TextField,
    pub(crate) title: TextField,
    pub(crate) keywords: BTreeMap<Field, KeywordField>,
}

fn corrupt(doc_id: &str, reason: impl Into<String>) -> IndexError {
    IndexError::CorruptBundle {
        doc_id: doc_id.to_string(),
        reason: reason.into(),
    }
}

fn validate(bundle: &LoadedBundle) -> Result<(), IndexError> {
    let id = bundle.doc_id.as_str();
    if let Some(db) = &bundle.docbook.doc_id {
        if db != id {
            return Err(corrupt(id, format!("DocBook names document {db}")));
        }
    }
    let text = bundle.docbook.normalized_text();
    let len = text.chars().count();
    for a in &bundle.annotations.annotations {
        if char_slice(&text, a.span) != Some(a.surface.as_str()) {
            return Err(corrupt(id, format!("annotation {} does not match the text", a.id)));
        }
    }
    for e in &bundle.offsets.map {
        if e.span.end > len || e.span.is_empty() {
            return Err(corrupt(id, format!("offset span {:?} outside the text", e.span)));
        }
    }
    if bundle.offsets.map.windows(2).any(|w| w[0].span.end > w[1].span.start) {
        return Err(corrupt(id, "offset map is not sorted"));
    }
    Ok(())
}

impl Index {
    /// Builds an index over validated bundles. Documents are ordered by id.
    pub fn build(bundles: Vec<LoadedBundle>) -> Result<Self, IndexError> {
        let mut seen = BTreeSet::new();
        for b in &bundles {
            if !seen.insert(b.doc_id.clone()) {
                return Err(IndexError::DuplicateDocId(b.doc_id.clone()));
            }
            validate(b)?;
        }
        let mut docs: Vec<StoredDocument> = bundles
            .into_iter()
            .map(|b| StoredDocument {
                doc_id: b.doc_id,
                collection_id: b.docbook.collection_id,
                title: b.docbook.title,
                date: b.docbook.date,
                language: b.docbook.language,
                sections: b.docbook.sections,
                annotations: b.annotations.annotations,
                offsets: b.offsets.map,
                offsets_path: b.offsets_path.map(|p| p.display().to_string()),
            })
            .collect();
        docs.sort_by(|a, b| a.doc_id.cmp(&b.doc_id));
        Ok(Self::from_documents(docs))
    }

    pub(crate) fn from_documents(docs: Vec<StoredDocument>) -> Self {
        let prepared: Vec<Prepared> = docs.iter().map(Prepared::of).collect();
        let mut body = TextField::default();
        let mut title = TextField::default();
        for (d, p) in prepared.iter().enumerate() {
            let d = d as u32;
            let add = |field: &mut TextField, pos: u32, term: &str| {
                let list = field.terms.entry(term.to_string()).or_default();
                match list.last_mut() {
                    Some(last) if last.doc == d => last.positions.push(pos),
                    _ => list.push(Posting {
                        doc: d,
                        positions: vec![pos],
                    }),
                }
            };
            for (pos, t) in p.tokens.iter().enumerate() {
                add(&mut body, pos as u32, &t.term);
            }
            for (pos, &bp) in p.title_positions.iter().enumerate() {
                add(&mut title, pos as u32, &p.tokens[bp as usize].term);
            }
            body.doc_len.push(p.tokens.len() as u32);
            title.doc_len.push(p.title_positions.len() as u32);
        }
        body.total_len = body.doc_len.iter().map(|&l| l as u64).sum();
        title.total_len = title.doc_len.iter().map(|&l| l as u64).sum();

        let mut keywords: BTreeMap<Field, KeywordField> = BTreeMap::new();
        for field in Field::KEYWORD {
            let kf = keywords.entry(field).or_default();
            for (d, doc) in docs.iter().enumerate() {
                for (key, (display, count)) in doc.keyword_values(field) {
                    kf.values
                        .entry(key)
                        .or_insert_with(|| KeywordEntry {
                            value: display,
                            postings: Vec::new(),
                        })
                        .postings
                        .push((d as u32, count));
                }
            }
        }
        Self {
            docs,
            prepared,
            body,
            title,
            keywords,
        }
    }

    pub(crate) fn from_parts(
        docs: Vec<StoredDocument>,
        body: TextField,
        title: TextField,
        keywords: BTreeMap<Field, KeywordField>,
    ) -> Self {
        let prepared = docs.iter().map(Prepared::of).collect();
        Self {
            docs,
            prepared,
            body,
            title,
            keywords,
        }
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    pub fn documents(&self) -> &[StoredDocument] {
        &self.docs
    }

    pub fn text_field(&self, field: Field) -> Option<&TextField> {
        match field {
            Field::Body => Some(&self.body),
            Field::Title => Some(&self.title),
            _ => None,
        }
    }

    pub fn keyword_field(&self, field: Field) -> Option<&KeywordField> {
        self.keywords.get(&field)
    }

    pub(crate) fn ordinal(&self, doc_id: &str) -> Option<usize> {
        self.docs.binary_search_by(|d| d.doc_id.as_str().cmp(doc_id)).ok()
    }

    /// Rebuilt document text of a stored document.
    pub fn text_of(&self, doc_id: &str) -> Option<&str> {
        self.ordinal(doc_id).map(|i| self.prepared[i].text.as_str())
    }
}
