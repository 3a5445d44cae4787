use std::collections::HashSet;

use archive_lens::{read_manifest, PipelineConfig};
use archive_lens_core::emit::{read_docbook, EmittedBundle, LoadedBundle, StructuredDocument};
use archive_lens_core::normalize::TokenRef;
use archive_lens_core::pipeline::load_pages;
use archive_lens_core::span::char_slice;
use archive_lens_core::{process_document, AltoPage};
use quick_xml::events::Event;
use quick_xml::Reader;

use crate::{common, ensure, Outcome};

/// Children each element of the subset may contain; text is only allowed
/// in the leaf elements.
fn allowed(parent: Option<&str>, child: &str) -> bool {
    matches!(
        (parent, child),
        (None, "article")
            | (Some("article"), "info" | "section")
            | (Some("info"), "title" | "date")
            | (Some("section"), "title" | "para")
    )
}

fn leaf(name: &str) -> bool {
    matches!(name, "title" | "date" | "para")
}

/// Well-formedness and subset validation in one pass.
fn validate(xml: &[u8]) -> Result<(), String> {
    let mut reader = Reader::from_reader(xml);
    let mut stack: Vec<String> = Vec::new();
    let mut roots = 0;
    let mut buf = Vec::new();
    loop {
        let event = reader.read_event_into(&mut buf).map_err(|e| format!("not well-formed: {e}"))?;
        match event {
            Event::Start(ref e) | Event::Empty(ref e) => {
                let name = e.local_name().into_inner().to_string();
                ensure!(allowed(stack.last().map(String::as_str), &name), "<{name}> not allowed in {:?}", stack.last());
                if stack.is_empty() {
                    roots += 1;
                }
                for a in e.attributes() {
                    a.map_err(|err| format!("bad attribute on <{name}>: {err}"))?;
                }
                if matches!(event, Event::Start(_)) {
                    stack.push(name);
                }
            }
            Event::End(e) => {
                let name = e.local_name().into_inner().to_string();
                ensure!(stack.pop().as_deref() == Some(name.as_str()), "mismatched </{name}>");
            }
            Event::Text(t) => {
                let blank = t.into_inner().trim().is_empty();
                ensure!(blank || stack.last().is_some_and(|s| leaf(s)), "text inside {:?}", stack.last());
            }
            Event::GeneralRef(_) => {
                ensure!(stack.last().is_some_and(|s| leaf(s)), "entity reference inside {:?}", stack.last());
            }
            Event::CData(_) | Event::DocType(_) => return Err("unexpected CDATA or DOCTYPE".into()),
            Event::Eof => break,
            _ => {}
        }
        buf.clear();
    }
    ensure!(stack.is_empty(), "unclosed elements {stack:?}");
    ensure!(roots == 1, "{roots} root elements");
    Ok(())
}

fn geometric_tokens(pages: &[AltoPage]) -> HashSet<TokenRef> {
    let mut out = HashSet::new();
    for p in pages {
        for b in &p.blocks {
            for l in &b.lines {
                for (i, t) in l.tokens.iter().enumerate() {
                    if t.bbox.is_some() {
                        out.insert(TokenRef {
                            page: p.page_id.clone(),
                            block: b.block_id.clone(),
                            line: l.line_id.clone(),
                            token: i,
                        });
                    }
                }
            }
        }
    }
    out
}

fn check(doc: &StructuredDocument, pages: &[AltoPage], scratch: &std::path::Path) -> Result<usize, String> {
    let id = &doc.doc_id;
    let bundle = EmittedBundle::from_document(doc);
    validate(&bundle.docbook_xml).map_err(|e| format!("{id}: {e}"))?;
    let content = read_docbook(&bundle.docbook_xml).map_err(|e| format!("{id}: {e}"))?;
    ensure!(content.normalized_text() == doc.normalized_text, "{id}: DocBook text differs from the document text");

    let path = bundle.write(scratch).map_err(|e| format!("{id}: {e}"))?;
    let loaded = LoadedBundle::load(&path).map_err(|e| format!("{id}: {e}"))?;
    ensure!(loaded.docbook.normalized_text().as_bytes() == doc.normalized_text.as_bytes(), "{id}: bundle on disk differs");

    let geometric = geometric_tokens(pages);
    let mut resolved = 0;
    for a in &loaded.annotations.annotations {
        ensure!(char_slice(&doc.normalized_text, a.span) == Some(a.surface.as_str()), "{id}: {} misplaced", a.id);
        if a.anchors.iter().any(|t| geometric.contains(t)) {
            ensure!(!loaded.offsets.boxes_for(a.span).is_empty(), "{id}: {} has no box", a.id);
            resolved += 1;
        }
    }
    Ok(resolved)
}

pub fn run() -> Outcome {
    let scratch = tempfile::tempdir().map_err(|e| e.to_string())?;
    let (mut docs, mut resolved) = (0, 0);
    for fixture in ["e2e", "stats"] {
        let cfg = PipelineConfig::load(&common::config_for(fixture, scratch.path())).map_err(|e| e.to_string())?;
        let resources = cfg.resources().map_err(|e| e.to_string())?;
        for entry in read_manifest(cfg.manifest().unwrap()).map_err(|e| e.to_string())? {
            let (pages, _) = load_pages(&entry.files, &entry.meta).map_err(|e| e.to_string())?;
            let doc = process_document(entry.doc_id(), &entry.meta, &pages, &resources)
                .map_err(|e| e.to_string())?
                .document;
            resolved += check(&doc, &pages, &scratch.path().join("bundles"))?;
            docs += 1;
        }
    }
    ensure!(docs == 5 && resolved > 0, "{docs} documents, {resolved} geometric annotations");
    ensure!(validate(b"<article><para>x</para></article>").is_err(), "validator accepts a loose para");
    ensure!(validate(b"<article><info><title>x</info></article>").is_err(), "validator accepts bad nesting");
    Ok(format!(
        "{docs}/{docs} fixture documents valid and round-trip byte-exact; {resolved}/{resolved} geometric annotations have boxes"
    ))
}
