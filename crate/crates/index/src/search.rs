use std::collections::BTreeMap;

use archive_lens_core::emit::{OffsetEntry, PageBox};
use archive_lens_core::span::char_slice;
use archive_lens_core::Span;
use serde::Serialize;
use thiserror::Error;

use crate::bm25::Bm25;
use crate::index::{Index, StoredDocument, TextField};
use crate::query::{parse_query, Field, Query, QueryError};
use crate::Score;

pub const DEFAULT_LIMIT: usize = 20;
pub const MAX_LIMIT: usize = 100;
pub const FACET_LIMIT: usize = 100;
pub const SNIPPET_WINDOW: usize = 8;
pub const MAX_HIGHLIGHTS: usize = 20;
pub const MAX_CONCORDANCE_WINDOW: usize = 50;
pub const COMENTION_LIMIT: usize = 50;

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize)]
pub enum LookupError {
    #[error("unknown entity kind {0:?}")]
    UnknownKind(String),
    #[error("no {kind} named {name:?}")]
    EntityNotFound { kind: String, name: String },
    #[error("unknown document {0:?}")]
    UnknownDocument(String),
    #[error("span {start}..{end} is outside a text of {len} characters")]
    InvalidSpan { start: usize, end: usize, len: usize },
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SearchRequest {
    pub q: String,
    /// (field, value) pairs, all of which must hold.
    pub filters: Vec<(String, String)>,
    pub facets: Vec<String>,
    pub offset: usize,
    pub limit: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Snippet {
    pub text: String,
    /// Where the snippet sits in the document text.
    pub span: Span,
    /// Matches relative to the snippet start.
    pub matches: Vec<Span>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Hit {
    pub doc_id: String,
    pub collection_id: Option<String>,
    pub title: Option<String>,
    pub date: Option<String>,
    pub score: Score,
    pub snippet: Snippet,
    pub highlights: Vec<PageBox>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FacetCount {
    pub value: String,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchResult {
    pub total_hits: usize,
    pub offset: usize,
    pub limit: usize,
    pub hits: Vec<Hit>,
    pub facet_counts: BTreeMap<String, Vec<FacetCount>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConcordanceRow {
    pub doc_id: String,
    pub left: Vec<String>,
    #[serde(rename = "match")]
    pub matched: String,
    pub right: Vec<String>,
    pub char_span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConcordanceResult {
    pub total_rows: usize,
    pub rows: Vec<ConcordanceRow>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TimelinePoint {
    pub year: i32,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Timeline {
    pub term: String,
    pub points: Vec<TimelinePoint>,
    /// Documents holding the term but carrying no year.
    pub undated_documents: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EntityDocument {
    pub doc_id: String,
    pub title: Option<String>,
    pub date: Option<String>,
    pub mentions: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CoMention {
    pub kind: Field,
    pub name: String,
    pub shared_documents: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EntityCard {
    pub kind: Field,
    pub name: String,
    pub mention_count: u64,
    pub document_count: usize,
    pub documents: Vec<EntityDocument>,
    pub top_comentions: Vec<CoMention>,
}

fn intersect(a: &[u32], b: &[u32]) -> Vec<u32> {
    let (mut i, mut j, mut out) = (0, 0, Vec::new());
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

fn union(a: &[u32], b: &[u32]) -> Vec<u32> {
    let mut out: Vec<u32> = a.iter().chain(b).copied().collect();
    out.sort_unstable();
    out.dedup();
    out
}

fn difference(a: &[u32], b: &[u32]) -> Vec<u32> {
    a.iter().copied().filter(|d| b.binary_search(d).is_err()).collect()
}

/// Start positions of `terms` appearing consecutively in one document.
fn phrase_starts(field: &TextField, terms: &[String], doc: u32) -> Vec<u32> {
    let lists: Option<Vec<&[u32]>> = terms
        .iter()
        .map(|t| {
            let p = field.postings(t);
            p.binary_search_by_key(&doc, |p| p.doc).ok().map(|i| p[i].positions.as_slice())
        })
        .collect();
    let Some(lists) = lists else { return Vec::new() };
    lists[0]
        .iter()
        .copied()
        .filter(|&start| {
            lists[1..]
                .iter()
                .enumerate()
                .all(|(k, l)| l.binary_search(&(start + k as u32 + 1)).is_ok())
        })
        .collect()
}

impl Index {
    fn all_docs(&self) -> Vec<u32> {
        (0..self.docs.len() as u32).collect()
    }

    fn field_of(&self, field: Field) -> &TextField {
        self.text_field(field).expect("text field")
    }

    /// Documents matching `q`, ascending.
    fn eval(&self, q: &Query) -> Vec<u32> {
        match q {
            Query::Term { field, value } if field.is_text() => {
                self.field_of(*field).postings(value).iter().map(|p| p.doc).collect()
            }
            Query::Term { field, value } => self
                .keyword_field(*field)
                .and_then(|kf| kf.values.get(&value.to_lowercase()))
                .map(|e| e.postings.iter().map(|&(d, _)| d).collect())
                .unwrap_or_default(),
            Query::Phrase { field, terms } => {
                let f = self.field_of(*field);
                let mut docs: Vec<u32> = f.postings(&terms[0]).iter().map(|p| p.doc).collect();
                for t in &terms[1..] {
                    let other: Vec<u32> = f.postings(t).iter().map(|p| p.doc).collect();
                    docs = intersect(&docs, &other);
                }
                docs.retain(|&d| !phrase_starts(f, terms, d).is_empty());
                docs
            }
            Query::And(parts) => {
                let (neg, pos): (Vec<&Query>, Vec<&Query>) = parts.iter().partition(|p| matches!(p, Query::Not(_)));
                let mut docs = match pos.split_first() {
                    Some((first, rest)) => rest.iter().fold(self.eval(first), |acc, p| intersect(&acc, &self.eval(p))),
                    None => self.all_docs(),
                };
                for n in neg {
                    if let Query::Not(inner) = n {
                        docs = difference(&docs, &self.eval(inner));
                    }
                }
                docs
            }
            Query::Or(parts) => parts.iter().fold(Vec::new(), |acc, p| union(&acc, &self.eval(p))),
            Query::Not(inner) => difference(&self.all_docs(), &self.eval(inner)),
        }
    }

    /// Body positions and token lengths of the positive text leaves in `doc`.
    fn leaf_matches(&self, q: &Query, doc: u32, out: &mut Vec<(u32, u32)>) {
        let to_body = |field: Field, pos: u32| match field {
            Field::Title => self.prepared[doc as usize].title_positions[pos as usize],
            _ => pos,
        };
        match q {
            Query::Term { field, value } if field.is_text() => {
                let f = self.field_of(*field);
                let p = f.postings(value);
                if let Ok(i) = p.binary_search_by_key(&doc, |p| p.doc) {
                    out.extend(p[i].positions.iter().map(|&pos| (to_body(*field, pos), 1)));
                }
            }
            Query::Phrase { field, terms } => {
                let f = self.field_of(*field);
                for start in phrase_starts(f, terms, doc) {
                    out.push((to_body(*field, start), terms.len() as u32));
                }
            }
            Query::And(parts) | Query::Or(parts) => parts.iter().for_each(|p| self.leaf_matches(p, doc, out)),
            _ => {}
        }
    }

    fn filtered(&self, q: Option<&Query>, filters: &[(String, String)]) -> Result<Vec<u32>, QueryError> {
        let mut docs = q.map_or_else(|| self.all_docs(), |q| self.eval(q));
        for (field, value) in filters {
            let leaf = Query::leaf(Field::parse(field)?, value)?;
            docs = intersect(&docs, &self.eval(&leaf));
        }
        Ok(docs)
    }

    fn score(&self, terms: &[(Field, String)], doc: u32) -> Score {
        let bm25 = Bm25::<Score>::default();
        let n = self.docs.len() as Score;
        terms
            .iter()
            .map(|(field, term)| {
                let f = self.field_of(*field);
                let tf = f.tf(term, doc) as Score;
                let df = f.postings(term).len() as Score;
                bm25.term_score(tf, f.doc_len[doc as usize] as Score, f.avg_len(), n, df)
            })
            .sum()
    }

    fn span_of(&self, doc: u32, start: u32, len: u32) -> Span {
        let toks = &self.prepared[doc as usize].tokens;
        Span::new(toks[start as usize].span.start, toks[(start + len - 1) as usize].span.end)
    }

    fn snippet(&self, doc: u32, matches: &[(u32, u32)]) -> Snippet {
        let p = &self.prepared[doc as usize];
        if p.tokens.is_empty() {
            return Snippet {
                text: String::new(),
                span: Span::new(0, 0),
                matches: Vec::new(),
            };
        }
        let last = p.tokens.len() - 1;
        let (lo, hi) = match matches.first() {
            Some(&(start, len)) => (
                (start as usize).saturating_sub(SNIPPET_WINDOW),
                (start as usize + len as usize - 1 + SNIPPET_WINDOW).min(last),
            ),
            None => (0, (2 * SNIPPET_WINDOW).min(last)),
        };
        let span = Span::new(p.tokens[lo].span.start, p.tokens[hi].span.end);
        let rel = matches
            .iter()
            .filter(|&&(s, l)| s as usize >= lo && (s + l - 1) as usize <= hi)
            .map(|&(s, l)| {
                let m = self.span_of(doc, s, l);
                Span::new(m.start - span.start, m.end - span.start)
            })
            .collect();
        Snippet {
            text: char_slice(&p.text, span).unwrap_or_default().to_string(),
            span,
            matches: rel,
        }
    }

    pub fn search(&self, req: &SearchRequest) -> Result<SearchResult, QueryError> {
        let query = parse_query(&req.q)?;
        let facet_fields: Vec<Field> = req
            .facets
            .iter()
            .map(|name| {
                let f = Field::parse(name)?;
                if f.is_text() {
                    Err(QueryError::NotFacetable(name.clone()))
                } else {
                    Ok(f)
                }
            })
            .collect::<Result<_, _>>()?;
        let docs = self.filtered(query.as_ref(), &req.filters)?;

        let terms = query.as_ref().map(Query::positive_text_terms).unwrap_or_default();
        let mut scored: Vec<(Score, u32)> = docs.iter().map(|&d| (self.score(&terms, d), d)).collect();
        scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));

        let limit = if req.limit == 0 { DEFAULT_LIMIT } else { req.limit.min(MAX_LIMIT) };
        let hits = scored
            .iter()
            .skip(req.offset)
            .take(limit)
            .map(|&(score, d)| {
                let mut matches = Vec::new();
                if let Some(q) = &query {
                    self.leaf_matches(q, d, &mut matches);
                }
                matches.sort_unstable();
                matches.dedup();
                let doc = &self.docs[d as usize];
                let highlights = matches
                    .iter()
                    .take(MAX_HIGHLIGHTS)
                    .flat_map(|&(s, l)| boxes_for(&doc.offsets, self.span_of(d, s, l)))
                    .collect();
                Hit {
                    doc_id: doc.doc_id.clone(),
                    collection_id: doc.collection_id.clone(),
                    title: doc.title.clone(),
                    date: doc.date.clone(),
                    score,
                    snippet: self.snippet(d, &matches),
                    highlights,
                }
            })
            .collect();

        let facet_counts = facet_fields
            .into_iter()
            .map(|f| (f.name().to_string(), self.facet(f, &docs)))
            .collect();
        Ok(SearchResult {
            total_hits: docs.len(),
            offset: req.offset,
            limit,
            hits,
            facet_counts,
        })
    }

    fn facet(&self, field: Field, docs: &[u32]) -> Vec<FacetCount> {
        let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
        for &d in docs {
            for key in &self.prepared[d as usize].keywords[&field] {
                *counts.entry(key).or_default() += 1;
            }
        }
        let kf = &self.keywords[&field];
        let mut out: Vec<FacetCount> = counts
            .into_iter()
            .map(|(k, count)| FacetCount {
                value: kf.values[k].value.clone(),
                count,
            })
            .collect();
        out.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.value.cmp(&b.value)));
        out.truncate(FACET_LIMIT);
        out
    }

    /// A single term or phrase over a text field.
    fn text_leaf(term: &str) -> Result<(Field, Vec<String>), QueryError> {
        match parse_query(term)? {
            Some(Query::Term { field, value }) if field.is_text() => Ok((field, vec![value])),
            Some(Query::Phrase { field, terms }) => Ok((field, terms)),
            Some(Query::Term { field, .. }) => Err(QueryError::UnknownField(field.name().to_string())),
            _ => Err(QueryError::MalformedQuery(format!("{term:?} is not a single text term or phrase"))),
        }
    }

    /// Keyword-in-context rows for every occurrence, by document id then
    /// position.
    pub fn concordance(
        &self,
        term: &str,
        window: usize,
        filters: &[(String, String)],
        offset: usize,
        limit: usize,
    ) -> Result<ConcordanceResult, QueryError> {
        if window == 0 {
            return Err(QueryError::MalformedQuery("window must be at least 1".into()));
        }
        let (field, terms) = Self::text_leaf(term)?;
        let leaf = if terms.len() == 1 {
            Query::Term {
                field,
                value: terms[0].clone(),
            }
        } else {
            Query::Phrase {
                field,
                terms: terms.clone(),
            }
        };
        let window = window.min(MAX_CONCORDANCE_WINDOW);
        let limit = if limit == 0 { DEFAULT_LIMIT } else { limit.min(MAX_LIMIT) };
        let docs = self.filtered(Some(&leaf), filters)?;
        let mut total = 0;
        let mut rows = Vec::new();
        for d in docs {
            let mut matches = Vec::new();
            self.leaf_matches(&leaf, d, &mut matches);
            matches.sort_unstable();
            for (start, len) in matches {
                total += 1;
                if total <= offset || rows.len() >= limit {
                    continue;
                }
                rows.push(self.row(d, start as usize, len as usize, window));
            }
        }
        Ok(ConcordanceResult { total_rows: total, rows })
    }

    fn row(&self, doc: u32, start: usize, len: usize, window: usize) -> ConcordanceRow {
        let p = &self.prepared[doc as usize];
        let surface = |i: usize| char_slice(&p.text, p.tokens[i].span).unwrap_or_default().to_string();
        let end = start + len;
        let char_span = self.span_of(doc, start as u32, len as u32);
        ConcordanceRow {
            doc_id: self.docs[doc as usize].doc_id.clone(),
            left: (start.saturating_sub(window)..start).map(surface).collect(),
            matched: char_slice(&p.text, char_span).unwrap_or_default().to_string(),
            right: (end..(end + window).min(p.tokens.len())).map(surface).collect(),
            char_span,
        }
    }

    /// Occurrences per publication year. Text terms count token matches,
    /// keyword values count mentions.
    pub fn term_timeline(&self, term: &str, filters: &[(String, String)]) -> Result<Timeline, QueryError> {
        let leaf = match parse_query(term)? {
            Some(q @ (Query::Term { .. } | Query::Phrase { .. })) => q,
            _ => return Err(QueryError::MalformedQuery(format!("{term:?} is not a single term or phrase"))),
        };
        let docs = self.filtered(Some(&leaf), filters)?;
        let mut years: BTreeMap<i32, u64> = BTreeMap::new();
        let mut undated = 0;
        for d in docs {
            let count = match &leaf {
                Query::Term { field, value } if !field.is_text() => {
                    let postings = &self.keywords[field].values[&value.to_lowercase()].postings;
                    postings
                        .binary_search_by_key(&d, |&(doc, _)| doc)
                        .map_or(0, |i| postings[i].1 as u64)
                }
                _ => {
                    let mut m = Vec::new();
                    self.leaf_matches(&leaf, d, &mut m);
                    m.len() as u64
                }
            };
            if count == 0 {
                continue;
            }
            match self.docs[d as usize].year() {
                Some(y) => *years.entry(y).or_default() += count,
                None => undated += 1,
            }
        }
        Ok(Timeline {
            term: term.to_string(),
            points: years.into_iter().map(|(year, count)| TimelinePoint { year, count }).collect(),
            undated_documents: undated,
        })
    }

    /// Summary of one person, place or temporal value. Documents are listed
    /// by id and paged with `offset`/`limit`.
    pub fn entity_card(&self, kind: &str, name: &str, offset: usize, limit: usize) -> Result<EntityCard, LookupError> {
        let field = match Field::parse(kind) {
            Ok(f @ (Field::Person | Field::Place | Field::Temporal)) => f,
            _ if kind == "temporal_expr" => Field::Temporal,
            _ => return Err(LookupError::UnknownKind(kind.to_string())),
        };
        let key = name.trim().to_lowercase();
        let entry = self.keywords[&field]
            .values
            .get(&key)
            .ok_or_else(|| LookupError::EntityNotFound {
                kind: field.name().to_string(),
                name: name.to_string(),
            })?;
        let limit = if limit == 0 { DEFAULT_LIMIT } else { limit.min(MAX_LIMIT) };
        let documents = entry
            .postings
            .iter()
            .skip(offset)
            .take(limit)
            .map(|&(d, mentions)| {
                let doc = &self.docs[d as usize];
                EntityDocument {
                    doc_id: doc.doc_id.clone(),
                    title: doc.title.clone(),
                    date: doc.date.clone(),
                    mentions,
                }
            })
            .collect();

        let mut shared: BTreeMap<(Field, &str), usize> = BTreeMap::new();
        for &(d, _) in &entry.postings {
            for f in [Field::Person, Field::Place] {
                for other in &self.prepared[d as usize].keywords[&f] {
                    if f == field && *other == key {
                        continue;
                    }
                    *shared.entry((f, other)).or_default() += 1;
                }
            }
        }
        let mut top: Vec<CoMention> = shared
            .into_iter()
            .map(|((f, k), n)| CoMention {
                kind: f,
                name: self.keywords[&f].values[k].value.clone(),
                shared_documents: n,
            })
            .collect();
        top.sort_by(|a, b| {
            b.shared_documents
                .cmp(&a.shared_documents)
                .then_with(|| a.name.cmp(&b.name))
                .then(a.kind.cmp(&b.kind))
        });
        top.truncate(COMENTION_LIMIT);

        Ok(EntityCard {
            kind: field,
            name: entry.value.clone(),
            mention_count: entry.postings.iter().map(|&(_, c)| c as u64).sum(),
            document_count: entry.postings.len(),
            documents,
            top_comentions: top,
        })
    }

    pub fn document(&self, doc_id: &str) -> Result<(&StoredDocument, &str), LookupError> {
        let i = self
            .ordinal(doc_id)
            .ok_or_else(|| LookupError::UnknownDocument(doc_id.to_string()))?;
        Ok((&self.docs[i], &self.prepared[i].text))
    }

    /// Page boxes of the tokens overlapping `span`.
    pub fn highlights(&self, doc_id: &str, span: Span) -> Result<Vec<PageBox>, LookupError> {
        let (doc, text) = self.document(doc_id)?;
        let len = text.chars().count();
        if span.start >= span.end || span.end > len {
            return Err(LookupError::InvalidSpan {
                start: span.start,
                end: span.end,
                len,
            });
        }
        Ok(boxes_for(&doc.offsets, span))
    }
}

fn boxes_for(map: &[OffsetEntry], span: Span) -> Vec<PageBox> {
    let first = map.partition_point(|e| e.span.end <= span.start);
    map[first..]
        .iter()
        .take_while(|e| e.span.start < span.end)
        .filter(|e| e.span.overlaps(&span))
        .flat_map(|e| e.boxes.iter().cloned())
        .collect()
}
