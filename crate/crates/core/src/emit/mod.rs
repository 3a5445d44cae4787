//! The structured document and its serialized bundle: DocBook XML, an
//! annotation sidecar and an offset-to-image-box map.
//!
//! The document text is rebuilt from DocBook as the `section/title` and
//! `para` texts in document order, joined by a blank line
//! ([`UNIT_SEPARATOR`]). Every character offset in the sidecars refers to
//! that text.

mod docbook;
mod standoff;

use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use docbook::{read_docbook, to_docbook, DocbookContent, DocbookError, DocbookSection, UnitKind, DOCBOOK_ELEMENTS};
pub use standoff::{emit_standoff, AnnotationRecord, AnnotationsFile, OffsetEntry, OffsetsFile, PageBox};

use crate::alto::CollectionMeta;
use crate::annotate::Annotation;
use crate::layout::{BlockLabel, HeaderMetadata, LogicalBlock, Section};

pub const UNIT_SEPARATOR: &str = "\n\n";
pub const TITLE_JOINER: &str = " — ";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocumentMeta {
    pub collection: CollectionMeta,
    pub header: HeaderMetadata,
    pub language: Option<String>,
}

impl DocumentMeta {
    /// Issue date from the running headers, else the publication date.
    pub fn date(&self) -> Option<NaiveDate> {
        self.header.issue_date.or(self.collection.publication_date)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructuredDocument {
    pub doc_id: String,
    pub meta: DocumentMeta,
    pub blocks: Vec<LogicalBlock>,
    pub sections: Vec<Section>,
    pub normalized_text: String,
    pub offset_map: Vec<OffsetEntry>,
    pub annotations: Vec<Annotation>,
}

impl StructuredDocument {
    pub fn paragraphs(&self) -> impl Iterator<Item = &LogicalBlock> {
        self.sections
            .iter()
            .flat_map(|s| s.body_blocks.iter().map(|&i| &self.blocks[i]))
    }

    pub fn title_text(&self, section: &Section) -> Option<String> {
        if section.title_blocks.is_empty() {
            return None;
        }
        Some(
            section
                .title_blocks
                .iter()
                .map(|&i| self.blocks[i].text.as_str())
                .collect::<Vec<_>>()
                .join(TITLE_JOINER),
        )
    }

    pub fn count_label(&self, label: BlockLabel) -> usize {
        self.blocks.iter().filter(|b| b.label == label).count()
    }
}

#[derive(Debug, Error)]
pub enum BundleError {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("bad DocBook in {path}: {source}")]
    Docbook {
        path: PathBuf,
        #[source]
        source: DocbookError,
    },
    #[error("bad sidecar {path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("bundle files disagree on doc_id: {0}")]
    DocIdMismatch(String),
}

/// The three serialized files of one document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmittedBundle {
    pub doc_id: String,
    pub collection_id: String,
    pub docbook_xml: Vec<u8>,
    pub annotations_json: Vec<u8>,
    pub offsets_json: Vec<u8>,
}

pub const DOCBOOK_SUFFIX: &str = ".docbook.xml";
pub const ANNOTATIONS_SUFFIX: &str = ".ann.json";
pub const OFFSETS_SUFFIX: &str = ".off.json";

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), BundleError> {
    let io = |source| BundleError::Io {
        path: path.to_path_buf(),
        source,
    };
    let file_name = path.file_name().and_then(|n| n.to_str()).unwrap_or("bundle");
    let tmp = path.with_file_name(format!(".{file_name}.tmp"));
    std::fs::write(&tmp, bytes).map_err(io)?;
    std::fs::rename(&tmp, path).map_err(io)
}

impl EmittedBundle {
    pub fn from_document(doc: &StructuredDocument) -> Self {
        let (annotations_json, offsets_json) = emit_standoff(doc);
        Self {
            doc_id: doc.doc_id.clone(),
            collection_id: doc.meta.collection.collection_id.clone(),
            docbook_xml: to_docbook(doc),
            annotations_json,
            offsets_json,
        }
    }

    /// Writes `{root}/{collection_id}/{doc_id}.{docbook.xml,ann.json,off.json}`,
    /// each file through a temporary name and a rename.
    pub fn write(&self, root: &Path) -> Result<PathBuf, BundleError> {
        let dir = root.join(&self.collection_id);
        std::fs::create_dir_all(&dir).map_err(|source| BundleError::Io {
            path: dir.clone(),
            source,
        })?;
        let docbook = dir.join(format!("{}{DOCBOOK_SUFFIX}", self.doc_id));
        write_atomic(&dir.join(format!("{}{ANNOTATIONS_SUFFIX}", self.doc_id)), &self.annotations_json)?;
        write_atomic(&dir.join(format!("{}{OFFSETS_SUFFIX}", self.doc_id)), &self.offsets_json)?;
        write_atomic(&docbook, &self.docbook_xml)?;
        Ok(docbook)
    }
}

/// A bundle read back from disk.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedBundle {
    pub doc_id: String,
    pub docbook: DocbookContent,
    pub annotations: AnnotationsFile,
    pub offsets: OffsetsFile,
    pub offsets_path: Option<PathBuf>,
}

impl LoadedBundle {
    pub fn from_bytes(docbook: &[u8], annotations: &[u8], offsets: &[u8]) -> Result<Self, BundleError> {
        let here = || PathBuf::from("<memory>");
        let docbook = read_docbook(docbook).map_err(|source| BundleError::Docbook { path: here(), source })?;
        let annotations: AnnotationsFile =
            serde_json::from_slice(annotations).map_err(|source| BundleError::Json { path: here(), source })?;
        let offsets: OffsetsFile =
            serde_json::from_slice(offsets).map_err(|source| BundleError::Json { path: here(), source })?;
        if annotations.doc_id != offsets.doc_id {
            return Err(BundleError::DocIdMismatch(format!(
                "{} vs {}",
                annotations.doc_id, offsets.doc_id
            )));
        }
        Ok(Self {
            doc_id: annotations.doc_id.clone(),
            docbook,
            annotations,
            offsets,
            offsets_path: None,
        })
    }

    pub fn from_emitted(bundle: &EmittedBundle) -> Result<Self, BundleError> {
        Self::from_bytes(&bundle.docbook_xml, &bundle.annotations_json, &bundle.offsets_json)
    }

    /// Loads a bundle given the path of its DocBook file.
    pub fn load(docbook_path: &Path) -> Result<Self, BundleError> {
        let name = docbook_path
            .file_name()
            .and_then(|n| n.to_str())
            .and_then(|n| n.strip_suffix(DOCBOOK_SUFFIX))
            .ok_or_else(|| BundleError::DocIdMismatch(docbook_path.display().to_string()))?;
        let dir = docbook_path.parent().unwrap_or_else(|| Path::new("."));
        let read = |p: PathBuf| std::fs::read(&p).map_err(|source| BundleError::Io { path: p, source });
        let ann_path = dir.join(format!("{name}{ANNOTATIONS_SUFFIX}"));
        let off_path = dir.join(format!("{name}{OFFSETS_SUFFIX}"));
        let docbook = read(docbook_path.to_path_buf())?;
        let ann = read(ann_path.clone())?;
        let off = read(off_path.clone())?;
        let mut bundle = Self::from_bytes(&docbook, &ann, &off).map_err(|e| match e {
            BundleError::Docbook { source, .. } => BundleError::Docbook {
                path: docbook_path.to_path_buf(),
                source,
            },
            BundleError::Json { source, .. } => BundleError::Json { path: dir.to_path_buf(), source },
            other => other,
        })?;
        if bundle.doc_id != name {
            return Err(BundleError::DocIdMismatch(format!("{} vs file name {name}", bundle.doc_id)));
        }
        bundle.offsets_path = Some(off_path);
        Ok(bundle)
    }

    /// Every `*.docbook.xml` below `root`, sorted by path.
    pub fn discover(root: &Path) -> Result<Vec<PathBuf>, BundleError> {
        let mut found = Vec::new();
        let mut stack = vec![root.to_path_buf()];
        while let Some(dir) = stack.pop() {
            let entries = std::fs::read_dir(&dir).map_err(|source| BundleError::Io {
                path: dir.clone(),
                source,
            })?;
            for entry in entries {
                let path = entry
                    .map_err(|source| BundleError::Io {
                        path: dir.clone(),
                        source,
                    })?
                    .path();
                if path.is_dir() {
                    stack.push(path);
                } else if path.to_str().is_some_and(|p| p.ends_with(DOCBOOK_SUFFIX)) {
                    found.push(path);
                }
            }
        }
        found.sort();
        Ok(found)
    }
}
