//! One document through every stage, from parsed pages to an emitted bundle.

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::alto::{parse_alto, AltoError, AltoPage, CollectionMeta};
use crate::annotate::{detect_temporal, merge_annotations, AnnotationUnit, EntityTagger, MergeError};
use crate::emit::{DocumentMeta, OffsetEntry, PageBox, StructuredDocument, TITLE_JOINER, UNIT_SEPARATOR};
use crate::layout::{
    classify_blocks, extract_header_metadata, segment_sections, split_sentences, BlockLabel, CollectionStats,
    LayoutConfig, LogicalBlock,
};
use crate::normalize::{
    detect_language, normalize_pages, Detection, LanguageProfile, Lexicon, NormalizeConfig, NormalizeStats,
    NormalizeWarning, TokenRef,
};
use crate::span::Span;

/// Read-only resources shared by every document of a run.
#[derive(Debug, Clone, Default)]
pub struct PipelineResources {
    pub lexicon: Lexicon,
    pub tagger: EntityTagger,
    pub profiles: Vec<LanguageProfile>,
    pub layout: LayoutConfig,
    pub normalize: NormalizeConfig,
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("document {0} has no readable page")]
    NoPages(String),
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("page {path}: {source}")]
    Page {
        path: PathBuf,
        #[source]
        source: AltoError,
    },
    #[error("annotation merge failed: {0}")]
    Merge(#[from] MergeError),
}

/// A page skipped without failing the document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PageIssue {
    pub path: String,
    pub message: String,
}

/// Raw inventory of the parsed pages, before any cleanup.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Inventory {
    pub pages: usize,
    pub lines: usize,
    pub words: usize,
}

impl Inventory {
    pub fn of(pages: &[AltoPage]) -> Self {
        Self {
            pages: pages.len(),
            lines: pages.iter().map(AltoPage::line_count).sum(),
            words: pages.iter().map(AltoPage::token_count).sum(),
        }
    }

    pub fn add(&mut self, other: &Inventory) {
        self.pages += other.pages;
        self.lines += other.lines;
        self.words += other.words;
    }
}

/// Parses every file of a document. Pages without a print space are
/// skipped and reported; unreadable files and malformed XML fail the
/// document.
pub fn load_pages(files: &[PathBuf], meta: &CollectionMeta) -> Result<(Vec<AltoPage>, Vec<PageIssue>), PipelineError> {
    let mut pages = Vec::with_capacity(files.len());
    let mut issues = Vec::new();
    for path in files {
        let bytes = std::fs::read(path).map_err(|source| PipelineError::Io {
            path: path.clone(),
            source,
        })?;
        match parse_alto(&bytes, meta) {
            Ok(page) => pages.push(page),
            Err(e @ (AltoError::MissingPrintSpace(_) | AltoError::MissingPage)) => issues.push(PageIssue {
                path: path.display().to_string(),
                message: e.to_string(),
            }),
            Err(source) => {
                return Err(PipelineError::Page {
                    path: path.clone(),
                    source,
                })
            }
        }
    }
    Ok((pages, issues))
}

/// Per-document counters.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DocumentReport {
    pub doc_id: String,
    pub collection_id: String,
    pub inventory: Inventory,
    pub normalize: NormalizeStats,
    pub blocks_per_label: BTreeMap<String, usize>,
    pub sections: usize,
    pub sentences: usize,
    pub annotations_per_kind: BTreeMap<String, usize>,
    pub language: Option<Detection>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct DocumentOutcome {
    pub document: StructuredDocument,
    pub report: DocumentReport,
}

fn label_name(label: BlockLabel) -> &'static str {
    match label {
        BlockLabel::Title => "title",
        BlockLabel::Header => "header",
        BlockLabel::Paragraph => "paragraph",
        BlockLabel::Other => "other",
    }
}

/// Lays out the sections as document text and places every block and token
/// in it. Returns the text.
fn assemble(blocks: &mut [LogicalBlock], sections: &mut [crate::layout::Section]) -> String {
    let mut text = String::new();
    let mut pos = 0usize;
    let mut first_unit = true;
    let mut start_unit = |text: &mut String, pos: &mut usize| {
        if !first_unit {
            text.push_str(UNIT_SEPARATOR);
            *pos += UNIT_SEPARATOR.chars().count();
        }
        first_unit = false;
    };
    let joiner_len = TITLE_JOINER.chars().count();

    let place = |block: &mut LogicalBlock, text: &mut String, pos: &mut usize| {
        let start = *pos;
        let mut first = true;
        for token in block.tokens.iter_mut().filter(|t| !t.is_removed()) {
            if !first {
                *pos += 1;
            }
            first = false;
            let len = token.text.chars().count();
            token.char_span = Some(Span::new(*pos, *pos + len));
            *pos += len;
        }
        text.push_str(&block.text);
        block.char_span = Some(Span::new(start, *pos));
    };

    for section in sections.iter_mut() {
        if !section.title_blocks.is_empty() {
            start_unit(&mut text, &mut pos);
            let start = pos;
            for (k, &i) in section.title_blocks.iter().enumerate() {
                if k > 0 {
                    text.push_str(TITLE_JOINER);
                    pos += joiner_len;
                }
                place(&mut blocks[i], &mut text, &mut pos);
            }
            section.title_span = Some(Span::new(start, pos));
        }
        for &i in &section.body_blocks {
            start_unit(&mut text, &mut pos);
            place(&mut blocks[i], &mut text, &mut pos);
        }
    }
    text
}

/// Runs cleanup, layout, annotation and offset mapping for one document.
pub fn process_document(
    doc_id: &str,
    meta: &CollectionMeta,
    pages: &[AltoPage],
    resources: &PipelineResources,
) -> Result<DocumentOutcome, PipelineError> {
    if pages.is_empty() {
        return Err(PipelineError::NoPages(doc_id.to_string()));
    }
    let normalized = normalize_pages(pages, &resources.lexicon, &resources.normalize);
    let stats = CollectionStats::compute(pages, &normalized.blocks, &resources.layout);
    let mut blocks = classify_blocks(pages, &normalized.blocks, &stats, &resources.layout);
    let mut sections = segment_sections(&blocks);
    let header = extract_header_metadata(&blocks);
    let text = assemble(&mut blocks, &mut sections);

    let anchor = meta.publication_date.or(header.issue_date);
    let mut units = Vec::new();
    let mut sentence_count = 0;
    for block in blocks.iter_mut() {
        let Some(span) = block.char_span else { continue };
        block.sentences = split_sentences(&block.text, &resources.layout.abbreviations);
        sentence_count += block.sentences.len();
        for s in &block.sentences {
            let mut mentions = detect_temporal(&s.text, anchor);
            mentions.extend(resources.tagger.tag(&s.text));
            if !mentions.is_empty() {
                units.push(AnnotationUnit {
                    offset: span.start + s.span.start,
                    mentions,
                });
            }
        }
    }

    let placed: Vec<(Span, Vec<TokenRef>)> = blocks
        .iter()
        .flat_map(|b| b.tokens.iter())
        .filter_map(|t| Some((t.char_span?, t.sources.iter().map(|s| s.at.clone()).collect())))
        .collect();
    let offset_map: Vec<OffsetEntry> = blocks
        .iter()
        .flat_map(|b| b.tokens.iter())
        .filter_map(|t| {
            let span = t.char_span?;
            let boxes: Vec<PageBox> = t
                .sources
                .iter()
                .filter_map(|s| Some(PageBox::new(s.at.page.clone(), s.bbox.as_ref()?)))
                .collect();
            (!boxes.is_empty()).then_some(OffsetEntry { span, boxes })
        })
        .collect();
    let annotations = merge_annotations(doc_id, &text, units, &placed)?;

    let detection = if resources.profiles.is_empty() {
        None
    } else {
        detect_language(&text, &resources.profiles).ok()
    };
    let language = match &detection {
        Some(Detection::Detected { language, .. }) => Some(language.clone()),
        _ => meta.language_hint.clone(),
    };

    let mut report = DocumentReport {
        doc_id: doc_id.to_string(),
        collection_id: meta.collection_id.clone(),
        inventory: Inventory::of(pages),
        normalize: normalized.stats.clone(),
        sections: sections.len(),
        sentences: sentence_count,
        language: detection,
        ..Default::default()
    };
    for b in &blocks {
        *report.blocks_per_label.entry(label_name(b.label).into()).or_default() += 1;
    }
    for a in &annotations {
        *report.annotations_per_kind.entry(a.kind.as_str().into()).or_default() += 1;
    }
    for w in &normalized.warnings {
        match w {
            NormalizeWarning::DanglingHyphen { at } => report
                .warnings
                .push(format!("dangling hyphen at {}/{}/{}#{}", at.page, at.block, at.line, at.token)),
        }
    }
    for page in pages {
        for w in &page.warnings {
            report.warnings.push(format!("{}: {w:?}", page.page_id));
        }
    }

    let document = StructuredDocument {
        doc_id: doc_id.to_string(),
        meta: DocumentMeta {
            collection: meta.clone(),
            header,
            language,
        },
        blocks,
        sections,
        normalized_text: text,
        offset_map,
        annotations,
    };
    Ok(DocumentOutcome { document, report })
}

/// Timing of the cleanup chain alone over a set of pages.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BenchResult {
    pub lines: usize,
    pub seconds: f64,
    pub lines_per_second: f64,
}

/// Runs the normalization chain `rounds` times on one thread.
pub fn bench_normalize(pages: &[AltoPage], resources: &PipelineResources, rounds: usize) -> BenchResult {
    let lines: usize = pages.iter().map(AltoPage::line_count).sum::<usize>() * rounds.max(1);
    let started = std::time::Instant::now();
    for _ in 0..rounds.max(1) {
        let out = normalize_pages(pages, &resources.lexicon, &resources.normalize);
        std::hint::black_box(out);
    }
    let seconds = started.elapsed().as_secs_f64();
    BenchResult {
        lines,
        seconds,
        lines_per_second: if seconds > 0.0 { lines as f64 / seconds } else { f64::INFINITY },
    }
}

/// Convenience for tests and tools: parse in-memory pages.
pub fn parse_pages<'a>(
    sources: impl IntoIterator<Item = &'a [u8]>,
    meta: &CollectionMeta,
) -> Result<Vec<AltoPage>, AltoError> {
    sources.into_iter().map(|b| parse_alto(b, meta)).collect()
}

