//! ALTO XML ingestion: physical page layout with token geometry.
//!
//! Only `Layout/Page/PrintSpace/TextBlock/TextLine/String/SP/HYP` and
//! `Styles/TextStyle` are consumed. Any other element found under `Layout` or
//! `Styles` is counted in an [`ParseWarning::IgnoredElements`] warning; page
//! margins are skipped as whole subtrees, containers inside the print space
//! (e.g. `ComposedBlock`) are looked through. ALTO 2.x and 4.x share the
//! `HPOS/VPOS/WIDTH/HEIGHT` geometry attributes, both are accepted.

use std::collections::{BTreeMap, HashSet};
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use quick_xml::events::{BytesStart, Event};
use quick_xml::Reader;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AltoError {
    #[error("malformed XML: {0}")]
    MalformedXml(String),
    #[error("no Page element in ALTO file")]
    MissingPage,
    #[error("page {0} has no PrintSpace")]
    MissingPrintSpace(String),
}

#[derive(Debug, Error)]
pub enum ManifestError {
    #[error("cannot read manifest {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid manifest JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("empty collection_id in manifest entry {0}")]
    EmptyCollectionId(usize),
    #[error("duplicate collection_id {0:?} in manifest")]
    DuplicateCollectionId(String),
}

/// Identity of the collection (one publication issue) a batch entry belongs to.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CollectionMeta {
    pub collection_id: String,
    pub title: String,
    #[serde(default)]
    pub publication_date: Option<NaiveDate>,
    #[serde(default)]
    pub language_hint: Option<String>,
    #[serde(default)]
    pub source_uri: String,
}

impl CollectionMeta {
    pub fn new(collection_id: impl Into<String>, title: impl Into<String>) -> Self {
        Self {
            collection_id: collection_id.into(),
            title: title.into(),
            publication_date: None,
            language_hint: None,
            source_uri: String::new(),
        }
    }
}

/// Axis-aligned box in page pixel coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BBox {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

impl BBox {
    pub fn new(x: f64, y: f64, w: f64, h: f64) -> Self {
        Self { x, y, w, h }
    }

    pub fn right(&self) -> f64 {
        self.x + self.w
    }

    pub fn bottom(&self) -> f64 {
        self.y + self.h
    }

    pub fn center_y(&self) -> f64 {
        self.y + self.h / 2.0
    }

    pub fn within(&self, width: f64, height: f64) -> bool {
        self.x >= 0.0 && self.y >= 0.0 && self.right() <= width && self.bottom() <= height
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StyleInfo {
    pub style_id: String,
    pub font_size: f64,
    pub bold: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TokenSpan {
    pub content: String,
    pub bbox: Option<BBox>,
    pub confidence: Option<f64>,
    pub style_ref: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TextLine {
    pub line_id: String,
    pub bbox: Option<BBox>,
    pub tokens: Vec<TokenSpan>,
    /// The last child of the line in the source was a `HYP` element.
    pub trailing_hyphen: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TextBlock {
    pub block_id: String,
    pub bbox: Option<BBox>,
    pub style_ref: Option<String>,
    pub lines: Vec<TextLine>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum ParseWarning {
    MissingGeometry { line_id: String, token_index: usize },
    EmptyToken { line_id: String },
    InvalidStyle { style_id: String },
    IgnoredElements { name: String, count: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AltoPage {
    pub page_id: String,
    pub page_number: u32,
    pub collection_id: String,
    pub width: u32,
    pub height: u32,
    pub styles: Vec<StyleInfo>,
    pub blocks: Vec<TextBlock>,
    #[serde(default)]
    pub warnings: Vec<ParseWarning>,
}

impl AltoPage {
    pub fn style(&self, style_id: &str) -> Option<&StyleInfo> {
        self.styles.iter().find(|s| s.style_id == style_id)
    }

    /// Font size in effect for a token, falling back to its block's style.
    pub fn font_size(&self, block: &TextBlock, token: &TokenSpan) -> Option<f64> {
        token
            .style_ref
            .as_deref()
            .and_then(|id| self.style(id))
            .or_else(|| block.style_ref.as_deref().and_then(|id| self.style(id)))
            .map(|s| s.font_size)
    }

    pub fn line_count(&self) -> usize {
        self.blocks.iter().map(|b| b.lines.len()).sum()
    }

    pub fn token_count(&self) -> usize {
        self.blocks
            .iter()
            .flat_map(|b| &b.lines)
            .map(|l| l.tokens.len())
            .sum()
    }

    pub fn hyphen_count(&self) -> usize {
        self.blocks
            .iter()
            .flat_map(|b| &b.lines)
            .filter(|l| l.trailing_hyphen)
            .count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Known {
    Layout,
    Page,
    PrintSpace,
    TextBlock,
    TextLine,
    String,
    Sp,
    Hyp,
    Styles,
    TextStyle,
}

fn classify(name: &str) -> Option<Known> {
    Some(match name {
        "Layout" => Known::Layout,
        "Page" => Known::Page,
        "PrintSpace" => Known::PrintSpace,
        "TextBlock" => Known::TextBlock,
        "TextLine" => Known::TextLine,
        "String" => Known::String,
        "SP" => Known::Sp,
        "HYP" => Known::Hyp,
        "Styles" => Known::Styles,
        "TextStyle" => Known::TextStyle,
        _ => return None,
    })
}

fn attrs(e: &BytesStart<'_>) -> Result<BTreeMap<String, String>, AltoError> {
    let mut out = BTreeMap::new();
    for attr in e.attributes() {
        let attr = attr.map_err(|err| AltoError::MalformedXml(err.to_string()))?;
        let key = attr.key.local_name().as_ref().to_string();
        let value = attr
            .normalized_value(quick_xml::XmlVersion::Implicit1_0)
            .map_err(|err| AltoError::MalformedXml(err.to_string()))?;
        out.insert(key, value.into_owned());
    }
    Ok(out)
}

fn number(attrs: &BTreeMap<String, String>, key: &str) -> Option<f64> {
    attrs
        .get(key)
        .and_then(|v| v.trim().parse::<f64>().ok())
        .filter(|v| v.is_finite())
}

fn geometry(attrs: &BTreeMap<String, String>) -> Option<BBox> {
    Some(BBox::new(
        number(attrs, "HPOS")?,
        number(attrs, "VPOS")?,
        number(attrs, "WIDTH")?,
        number(attrs, "HEIGHT")?,
    ))
}

fn first_ref(attrs: &BTreeMap<String, String>) -> Option<Vec<String>> {
    let refs: Vec<String> = attrs
        .get("STYLEREFS")
        .map(|v| v.split_whitespace().map(str::to_string).collect())
        .unwrap_or_default();
    if refs.is_empty() {
        None
    } else {
        Some(refs)
    }
}

#[derive(Default)]
struct PageBuilder {
    page_id: Option<String>,
    page_number: u32,
    width: Option<f64>,
    height: Option<f64>,
    print_space: Option<Option<BBox>>,
    blocks: Vec<(TextBlock, Option<Vec<String>>)>,
    token_refs: Vec<Vec<Vec<Option<Vec<String>>>>>,
}

/// Parses one ALTO page file.
pub fn parse_alto(bytes: &[u8], meta: &CollectionMeta) -> Result<AltoPage, AltoError> {
    let text = std::str::from_utf8(bytes).map_err(|e| AltoError::MalformedXml(e.to_string()))?;
    let mut reader = Reader::from_str(text);
    reader.config_mut().trim_text(true);

    let mut stack: Vec<Option<Known>> = Vec::new();
    let mut skip_depth: Option<usize> = None;
    let mut ignored: BTreeMap<String, usize> = BTreeMap::new();
    let mut warnings = Vec::new();
    let mut styles = Vec::new();
    let mut page: Option<PageBuilder> = None;
    let mut extra_pages = 0usize;
    let mut in_page = false;
    let mut in_print_space = false;
    let mut current_line_last_hyp = false;

    loop {
        let event = reader
            .read_event()
            .map_err(|e| AltoError::MalformedXml(format!("at byte {}: {e}", reader.error_position())))?;
        let (start, is_empty) = match &event {
            Event::Start(e) => (Some(e.clone()), false),
            Event::Empty(e) => (Some(e.clone()), true),
            Event::End(_) => {
                let closed = stack.pop().flatten();
                if let Some(depth) = skip_depth {
                    if stack.len() < depth {
                        skip_depth = None;
                    }
                    continue;
                }
                match closed {
                    Some(Known::Page) => in_page = false,
                    Some(Known::PrintSpace) => in_print_space = false,
                    Some(Known::TextLine) => {
                        if let Some(p) = page.as_mut() {
                            if let Some((block, _)) = p.blocks.last_mut() {
                                if let Some(line) = block.lines.last_mut() {
                                    line.trailing_hyphen = current_line_last_hyp;
                                }
                            }
                        }
                        current_line_last_hyp = false;
                    }
                    _ => {}
                }
                continue;
            }
            Event::Eof => break,
            _ => continue,
        };
        let Some(e) = start else { continue };
        let local = e.local_name();
        let name = local.as_ref();
        let known = classify(name);
        let depth = stack.len();
        if !is_empty {
            stack.push(known);
        }
        if skip_depth.is_some() {
            continue;
        }
        let parent_known = stack
            .iter()
            .rev()
            .nth(if is_empty { 0 } else { 1 })
            .copied()
            .flatten();
        let inside_layout_or_styles = stack.iter().any(|k| matches!(k, Some(Known::Layout) | Some(Known::Styles)));

        match known {
            Some(Known::Page) => {
                if page.is_some() {
                    extra_pages += 1;
                    if !is_empty {
                        skip_depth = Some(depth + 1);
                    }
                    continue;
                }
                let a = attrs(&e)?;
                let page_number = a
                    .get("PHYSICAL_IMG_NR")
                    .or_else(|| a.get("PRINTED_IMG_NR"))
                    .and_then(|v| v.trim().parse::<u32>().ok())
                    .filter(|n| *n > 0)
                    .unwrap_or(1);
                page = Some(PageBuilder {
                    page_id: a.get("ID").cloned(),
                    page_number,
                    width: number(&a, "WIDTH"),
                    height: number(&a, "HEIGHT"),
                    ..Default::default()
                });
                in_page = !is_empty;
            }
            Some(Known::PrintSpace) if in_page => {
                let a = attrs(&e)?;
                if let Some(p) = page.as_mut() {
                    p.print_space = Some(geometry(&a));
                }
                in_print_space = !is_empty;
            }
            Some(Known::TextBlock) if in_print_space => {
                let a = attrs(&e)?;
                if let Some(p) = page.as_mut() {
                    let block_id = a
                        .get("ID")
                        .cloned()
                        .unwrap_or_else(|| format!("block{}", p.blocks.len() + 1));
                    p.blocks.push((
                        TextBlock {
                            block_id,
                            bbox: geometry(&a),
                            style_ref: None,
                            lines: Vec::new(),
                        },
                        first_ref(&a),
                    ));
                    p.token_refs.push(Vec::new());
                }
            }
            Some(Known::TextLine) if in_print_space => {
                let a = attrs(&e)?;
                if let Some(p) = page.as_mut() {
                    if let Some((block, _)) = p.blocks.last_mut() {
                        let line_id = a
                            .get("ID")
                            .cloned()
                            .unwrap_or_else(|| format!("{}_line{}", block.block_id, block.lines.len() + 1));
                        block.lines.push(TextLine {
                            line_id,
                            bbox: geometry(&a),
                            tokens: Vec::new(),
                            trailing_hyphen: false,
                        });
                        if let Some(refs) = p.token_refs.last_mut() {
                            refs.push(Vec::new());
                        }
                    }
                }
                current_line_last_hyp = false;
            }
            Some(Known::String) if parent_known == Some(Known::TextLine) && in_print_space => {
                current_line_last_hyp = false;
                let a = attrs(&e)?;
                let Some(p) = page.as_mut() else { continue };
                let Some((block, _)) = p.blocks.last_mut() else { continue };
                let Some(line) = block.lines.last_mut() else { continue };
                let content = a.get("CONTENT").cloned().unwrap_or_default();
                if content.is_empty() {
                    warnings.push(ParseWarning::EmptyToken {
                        line_id: line.line_id.clone(),
                    });
                    continue;
                }
                let bbox = geometry(&a);
                if bbox.is_none() {
                    warnings.push(ParseWarning::MissingGeometry {
                        line_id: line.line_id.clone(),
                        token_index: line.tokens.len(),
                    });
                }
                line.tokens.push(TokenSpan {
                    content,
                    bbox,
                    confidence: number(&a, "WC").map(|c| c.clamp(0.0, 1.0)),
                    style_ref: None,
                });
                if let Some(line_refs) = p.token_refs.last_mut().and_then(|b| b.last_mut()) {
                    line_refs.push(first_ref(&a));
                }
            }
            Some(Known::Sp) if parent_known == Some(Known::TextLine) => {
                current_line_last_hyp = false;
            }
            Some(Known::Hyp) if parent_known == Some(Known::TextLine) => {
                current_line_last_hyp = true;
            }
            Some(Known::TextStyle) if parent_known == Some(Known::Styles) => {
                let a = attrs(&e)?;
                let style_id = a.get("ID").cloned().unwrap_or_default();
                match number(&a, "FONTSIZE").filter(|s| *s > 0.0) {
                    Some(font_size) if !style_id.is_empty() => styles.push(StyleInfo {
                        style_id,
                        font_size,
                        bold: a
                            .get("FONTSTYLE")
                            .map(|s| s.split_whitespace().any(|w| w.eq_ignore_ascii_case("bold")))
                            .unwrap_or(false),
                    }),
                    _ => warnings.push(ParseWarning::InvalidStyle { style_id }),
                }
            }
            Some(Known::Layout) | Some(Known::Styles) => {}
            _ if inside_layout_or_styles => {
                *ignored.entry(name.to_string()).or_insert(0) += 1;
                // Margins and other non-print-space page children are skipped whole.
                if in_page && !in_print_space && !is_empty {
                    skip_depth = Some(depth + 1);
                }
            }
            _ => {}
        }
    }

    let mut p = page.ok_or(AltoError::MissingPage)?;
    let page_id = p
        .page_id
        .take()
        .unwrap_or_else(|| format!("P{}", p.page_number));
    let print_space = p
        .print_space
        .ok_or_else(|| AltoError::MissingPrintSpace(page_id.clone()))?;

    let known_styles: HashSet<&str> = styles.iter().map(|s: &StyleInfo| s.style_id.as_str()).collect();
    let resolve = |refs: &Option<Vec<String>>| -> Option<String> {
        let refs = refs.as_ref()?;
        refs.iter()
            .find(|r| known_styles.contains(r.as_str()))
            .or_else(|| refs.first())
            .cloned()
    };
    let mut blocks = Vec::with_capacity(p.blocks.len());
    for ((mut block, block_refs), token_refs) in p.blocks.into_iter().zip(p.token_refs) {
        block.style_ref = resolve(&block_refs);
        for (line, line_refs) in block.lines.iter_mut().zip(token_refs) {
            for (token, refs) in line.tokens.iter_mut().zip(line_refs) {
                token.style_ref = resolve(&refs);
            }
        }
        blocks.push(block);
    }

    let extent = |f: fn(&BBox) -> f64| -> f64 {
        blocks
            .iter()
            .filter_map(|b| b.bbox.as_ref().map(f))
            .chain(print_space.as_ref().map(f))
            .fold(0.0, f64::max)
    };
    let width = p.width.unwrap_or_else(|| extent(BBox::right));
    let height = p.height.unwrap_or_else(|| extent(BBox::bottom));

    if extra_pages > 0 {
        *ignored.entry("Page".to_string()).or_insert(0) += extra_pages;
    }
    warnings.extend(
        ignored
            .into_iter()
            .map(|(name, count)| ParseWarning::IgnoredElements { name, count }),
    );

    Ok(AltoPage {
        page_id,
        page_number: p.page_number,
        collection_id: meta.collection_id.clone(),
        width: width.round().max(0.0) as u32,
        height: height.round().max(0.0) as u32,
        styles,
        blocks,
        warnings,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Diagnostic {
    OutOfBounds { element: String },
    DuplicateId { id: String },
    UnorderedTokens { line_id: String },
}

/// Reports every invariant violation on a page without touching it.
pub fn validate_page(page: &AltoPage) -> Vec<Diagnostic> {
    let (w, h) = (page.width as f64, page.height as f64);
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    let check = |element: String, bbox: &Option<BBox>, out: &mut Vec<Diagnostic>| {
        if let Some(b) = bbox {
            if !b.within(w, h) {
                out.push(Diagnostic::OutOfBounds { element });
            }
        }
    };
    for block in &page.blocks {
        if !seen.insert(block.block_id.as_str()) {
            out.push(Diagnostic::DuplicateId {
                id: block.block_id.clone(),
            });
        }
        check(block.block_id.clone(), &block.bbox, &mut out);
        for line in &block.lines {
            check(line.line_id.clone(), &line.bbox, &mut out);
            let mut last_x = f64::NEG_INFINITY;
            let mut ordered = true;
            for (i, token) in line.tokens.iter().enumerate() {
                check(format!("{}#{}", line.line_id, i), &token.bbox, &mut out);
                if let Some(b) = &token.bbox {
                    if b.x < last_x {
                        ordered = false;
                    }
                    last_x = b.x;
                }
            }
            if !ordered {
                out.push(Diagnostic::UnorderedTokens {
                    line_id: line.line_id.clone(),
                });
            }
        }
    }
    out
}

/// One batch entry: a collection's metadata plus its page files in order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    #[serde(flatten)]
    pub meta: CollectionMeta,
    pub files: Vec<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct BatchManifest {
    pub documents: Vec<ManifestEntry>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ManifestRepr {
    List(Vec<ManifestEntry>),
    Wrapped { documents: Vec<ManifestEntry> },
}

impl BatchManifest {
    /// Accepts either a bare JSON list of entries or `{"documents": [...]}`.
    pub fn from_json(bytes: &[u8]) -> Result<Self, ManifestError> {
        let documents = match serde_json::from_slice::<ManifestRepr>(bytes)? {
            ManifestRepr::List(d) | ManifestRepr::Wrapped { documents: d } => d,
        };
        let mut seen = HashSet::new();
        for (i, entry) in documents.iter().enumerate() {
            if entry.meta.collection_id.trim().is_empty() {
                return Err(ManifestError::EmptyCollectionId(i));
            }
            if !seen.insert(entry.meta.collection_id.clone()) {
                return Err(ManifestError::DuplicateCollectionId(entry.meta.collection_id.clone()));
            }
        }
        Ok(Self { documents })
    }

    /// Loads a manifest; relative page paths are resolved against its directory.
    pub fn load(path: &Path) -> Result<Self, ManifestError> {
        let bytes = std::fs::read(path).map_err(|source| ManifestError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut manifest = Self::from_json(&bytes)?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        for entry in &mut manifest.documents {
            for file in &mut entry.files {
                if file.is_relative() {
                    *file = base.join(&*file);
                }
            }
        }
        Ok(manifest)
    }
}
