use quick_xml::escape::{escape, resolve_predefined_entity};
use quick_xml::events::Event;
use quick_xml::Reader;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{StructuredDocument, UNIT_SEPARATOR};

/// The DocBook 5 elements the emitter uses and the reader accepts.
pub const DOCBOOK_ELEMENTS: &[&str] = &["article", "info", "title", "date", "section", "para"];

const NAMESPACE: &str = "http://docbook.org/ns/docbook";

/// Serializes a document as DocBook 5.
///
/// `article` carries the document id in `role="doc:…"` and the language in
/// `xml:lang`; `info` holds the collection title and date and the collection
/// id in `role="collection:…"`. Each section becomes a `section` whose
/// optional `title` is the joined title group, followed by one `para` per
/// paragraph.
pub fn to_docbook(doc: &StructuredDocument) -> Vec<u8> {
    let mut out = String::with_capacity(doc.normalized_text.len() + 512);
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    out.push_str(&format!(
        "<article xmlns=\"{NAMESPACE}\" version=\"5.0\" role=\"doc:{}\"",
        escape(doc.doc_id.as_str())
    ));
    if let Some(lang) = &doc.meta.language {
        out.push_str(&format!(" xml:lang=\"{}\"", escape(lang.as_str())));
    }
    out.push_str(">\n");
    out.push_str(&format!(
        "  <info role=\"collection:{}\">\n",
        escape(doc.meta.collection.collection_id.as_str())
    ));
    out.push_str(&format!(
        "    <title>{}</title>\n",
        escape(doc.meta.collection.title.as_str())
    ));
    if let Some(date) = doc.meta.date() {
        out.push_str(&format!("    <date>{}</date>\n", date.format("%Y-%m-%d")));
    }
    out.push_str("  </info>\n");
    for section in &doc.sections {
        out.push_str("  <section>\n");
        if let Some(title) = doc.title_text(section) {
            out.push_str(&format!("    <title>{}</title>\n", escape(title.as_str())));
        }
        for &i in &section.body_blocks {
            out.push_str(&format!("    <para>{}</para>\n", escape(doc.blocks[i].text.as_str())));
        }
        out.push_str("  </section>\n");
    }
    out.push_str("</article>\n");
    out.into_bytes()
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DocbookError {
    #[error("malformed XML: {0}")]
    Malformed(String),
    #[error("element <{0}> is outside the supported DocBook subset")]
    UnsupportedElement(String),
    #[error("<{child}> not allowed inside <{parent}>")]
    Misplaced { child: String, parent: String },
    #[error("unexpected text inside <{0}>")]
    StrayText(String),
    #[error("root element must be <article>")]
    NotAnArticle,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocbookSection {
    pub title: Option<String>,
    pub paras: Vec<String>,
}

/// What the reader recovers from an emitted DocBook file.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocbookContent {
    pub doc_id: Option<String>,
    pub collection_id: Option<String>,
    pub language: Option<String>,
    pub title: Option<String>,
    pub date: Option<String>,
    pub sections: Vec<DocbookSection>,
}

/// A piece of document text: a section title or a paragraph.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnitKind {
    Title,
    Para,
}

impl DocbookContent {
    /// Section titles and paragraphs in document order.
    pub fn units(&self) -> Vec<(UnitKind, &str)> {
        let mut out = Vec::new();
        for s in &self.sections {
            if let Some(t) = &s.title {
                out.push((UnitKind::Title, t.as_str()));
            }
            out.extend(s.paras.iter().map(|p| (UnitKind::Para, p.as_str())));
        }
        out
    }

    pub fn normalized_text(&self) -> String {
        self.units()
            .into_iter()
            .map(|(_, t)| t)
            .collect::<Vec<_>>()
            .join(UNIT_SEPARATOR)
    }
}

fn allowed_child(parent: &str, child: &str) -> bool {
    matches!(
        (parent, child),
        ("article", "info") | ("article", "section") | ("info", "title") | ("info", "date") | ("section", "title") | ("section", "para")
    )
}

/// Parses and validates an emitted DocBook file against the element subset.
pub fn read_docbook(bytes: &[u8]) -> Result<DocbookContent, DocbookError> {
    let text = std::str::from_utf8(bytes).map_err(|e| DocbookError::Malformed(e.to_string()))?;
    let mut reader = Reader::from_str(text);
    let mut content = DocbookContent::default();
    let mut stack: Vec<String> = Vec::new();
    let mut buffer = String::new();
    let mut seen_root = false;

    let attr = |e: &quick_xml::events::BytesStart<'_>, key: &str| -> Result<Option<String>, DocbookError> {
        for a in e.attributes() {
            let a = a.map_err(|err| DocbookError::Malformed(err.to_string()))?;
            if a.key.as_ref() == key {
                let v = a
                    .normalized_value(quick_xml::XmlVersion::Implicit1_0)
                    .map_err(|err| DocbookError::Malformed(err.to_string()))?;
                return Ok(Some(v.into_owned()));
            }
        }
        Ok(None)
    };

    loop {
        let event = reader
            .read_event()
            .map_err(|e| DocbookError::Malformed(e.to_string()))?;
        match event {
            Event::Start(ref e) | Event::Empty(ref e) => {
                let is_empty = matches!(event, Event::Empty(_));
                let name = e.local_name().as_ref().to_string();
                if !DOCBOOK_ELEMENTS.contains(&name.as_str()) {
                    return Err(DocbookError::UnsupportedElement(name));
                }
                match stack.last() {
                    None => {
                        if name != "article" || seen_root {
                            return Err(DocbookError::NotAnArticle);
                        }
                        seen_root = true;
                        content.doc_id = attr(e, "role")?.and_then(|r| r.strip_prefix("doc:").map(str::to_string));
                        content.language = attr(e, "xml:lang")?;
                    }
                    Some(parent) if !allowed_child(parent, &name) => {
                        return Err(DocbookError::Misplaced {
                            child: name,
                            parent: parent.clone(),
                        });
                    }
                    Some(_) => {}
                }
                match name.as_str() {
                    "info" => {
                        content.collection_id =
                            attr(e, "role")?.and_then(|r| r.strip_prefix("collection:").map(str::to_string));
                    }
                    "section" => content.sections.push(DocbookSection::default()),
                    _ => {}
                }
                buffer.clear();
                if is_empty {
                    stack.push(name);
                    close(&mut stack, &mut content, &mut buffer);
                } else {
                    stack.push(name);
                }
            }
            Event::End(_) => close(&mut stack, &mut content, &mut buffer),
            Event::Text(t) => {
                let s = t.xml10_content();
                push_text(&stack, &mut buffer, &s)?;
            }
            Event::CData(c) => {
                let raw = c.into_inner();
                push_text(&stack, &mut buffer, &raw)?;
            }
            Event::GeneralRef(r) => {
                let resolved = if r.is_char_ref() {
                    r.resolve_char_ref()
                        .map_err(|e| DocbookError::Malformed(e.to_string()))?
                        .map(String::from)
                } else {
                    resolve_predefined_entity(&r).map(str::to_string)
                };
                let s = resolved.ok_or_else(|| DocbookError::Malformed(format!("unknown entity &{};", &*r)))?;
                push_text(&stack, &mut buffer, &s)?;
            }
            Event::Eof => break,
            _ => {}
        }
    }
    if !seen_root {
        return Err(DocbookError::NotAnArticle);
    }
    Ok(content)
}

fn push_text(stack: &[String], buffer: &mut String, s: &str) -> Result<(), DocbookError> {
    match stack.last().map(String::as_str) {
        Some("title") | Some("para") | Some("date") => {
            buffer.push_str(s);
            Ok(())
        }
        Some(other) if !s.trim().is_empty() => Err(DocbookError::StrayText(other.to_string())),
        None if !s.trim().is_empty() => Err(DocbookError::StrayText("document".into())),
        _ => Ok(()),
    }
}

fn close(stack: &mut Vec<String>, content: &mut DocbookContent, buffer: &mut String) {
    let Some(name) = stack.pop() else { return };
    let parent = stack.last().map(String::as_str);
    let text = std::mem::take(buffer);
    match (parent, name.as_str()) {
        (Some("info"), "title") => content.title = Some(text),
        (Some("info"), "date") => content.date = Some(text),
        (Some("section"), "title") => {
            if let Some(s) = content.sections.last_mut() {
                s.title = Some(text);
            }
        }
        (Some("section"), "para") => {
            if let Some(s) = content.sections.last_mut() {
                s.paras.push(text);
            }
        }
        _ => {}
    }
}
