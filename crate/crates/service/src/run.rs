//! Batch commands: ingest, index, stats, all and bench.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::time::Instant;

use archive_lens_core::emit::LoadedBundle;
use archive_lens_core::normalize::NormalizeStats;
use archive_lens_core::pipeline::{bench_normalize, load_pages, BenchResult, DocumentReport, Inventory, PageIssue};
use archive_lens_core::{process_document, EmittedBundle, PipelineResources};
use archive_lens_index::{write_snapshot, Index, IndexError};
use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{ConfigError, PipelineConfig};
use crate::manifest::{read_manifest, ManifestEntry, ManifestError};

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Manifest(#[from] ManifestError),
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot start worker pool: {0}")]
    Pool(String),
    #[error(transparent)]
    Index(#[from] IndexError),
}

/// Corpus inventory in the categories of a collection survey.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusCounts {
    pub collections: usize,
    pub publications: usize,
    pub pages: usize,
    pub lines: usize,
    pub words: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Failure {
    pub doc_id: String,
    pub stage: String,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub command: String,
    pub corpus: CorpusCounts,
    pub pages_skipped: usize,
    pub normalize: NormalizeStats,
    pub blocks_per_label: BTreeMap<String, usize>,
    pub annotations_per_kind: BTreeMap<String, usize>,
    pub sections: usize,
    pub sentences: usize,
    pub documents_emitted: usize,
    pub documents_indexed: usize,
    pub snapshot: Option<PathBuf>,
    pub documents: Vec<DocumentReport>,
    pub failures: Vec<Failure>,
    pub warnings: Vec<String>,
    pub elapsed_seconds: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bench: Option<BenchResult>,
}

impl RunReport {
    fn new(command: &str) -> Self {
        Self {
            command: command.to_string(),
            ..Default::default()
        }
    }

    /// Every token entering cleanup is either kept or removed.
    pub fn conserves_tokens(&self) -> bool {
        self.normalize.tokens_in == self.normalize.tokens_kept + self.normalize.tokens_removed
    }

    pub fn exit_code(&self) -> i32 {
        if self.failures.is_empty() {
            0
        } else {
            1
        }
    }

    fn fail(&mut self, doc_id: &str, stage: &str, message: impl ToString) {
        let message = message.to_string();
        warn!("{doc_id}: {stage} failed: {message}");
        self.failures.push(Failure {
            doc_id: doc_id.to_string(),
            stage: stage.to_string(),
            message,
        });
    }

    fn add_inventory(&mut self, inv: &Inventory) {
        self.corpus.publications += 1;
        self.corpus.pages += inv.pages;
        self.corpus.lines += inv.lines;
        self.corpus.words += inv.words;
    }

    fn add_document(&mut self, doc: DocumentReport) {
        let n = &mut self.normalize;
        let d = &doc.normalize;
        n.tokens_in += d.tokens_in;
        n.tokens_kept += d.tokens_kept;
        n.tokens_removed += d.tokens_removed;
        n.tokens_squeezed += d.tokens_squeezed;
        n.tokens_corrected += d.tokens_corrected;
        n.tokens_unknown += d.tokens_unknown;
        n.merges += d.merges;
        for (k, v) in &doc.blocks_per_label {
            *self.blocks_per_label.entry(k.clone()).or_default() += v;
        }
        for (k, v) in &doc.annotations_per_kind {
            *self.annotations_per_kind.entry(k.clone()).or_default() += v;
        }
        self.sections += doc.sections;
        self.sentences += doc.sentences;
        self.documents.push(doc);
    }

    /// Folds in the report of a later stage over the same corpus.
    fn merge(&mut self, other: RunReport) {
        self.documents_indexed += other.documents_indexed;
        self.snapshot = other.snapshot.or(self.snapshot.take());
        self.failures.extend(other.failures);
        self.warnings.extend(other.warnings);
        self.elapsed_seconds.extend(other.elapsed_seconds);
    }

    pub fn write(&self, path: &Path) -> Result<(), RunError> {
        let io = |source| RunError::Io {
            path: path.to_path_buf(),
            source,
        };
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir).map_err(io)?;
        }
        let json = serde_json::to_vec_pretty(self).expect("report serializes");
        std::fs::write(path, json).map_err(io)
    }
}

fn pool(jobs: usize) -> Result<rayon::ThreadPool, RunError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| RunError::Pool(e.to_string()))
}

fn unique_entries(entries: Vec<ManifestEntry>, report: &mut RunReport) -> Vec<ManifestEntry> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::with_capacity(entries.len());
    for e in entries {
        if seen.insert(e.doc_id().to_string()) {
            out.push(e);
        } else {
            report.fail(e.doc_id(), "manifest", "duplicate document id");
        }
    }
    report.corpus.collections = seen.len();
    out
}

fn page_warnings<'a>(doc_id: &'a str, issues: &'a [PageIssue]) -> impl Iterator<Item = String> + 'a {
    issues.iter().map(move |i| format!("{doc_id}: skipped {}: {}", i.path, i.message))
}

enum Ingested {
    Done {
        report: DocumentReport,
        issues: Vec<PageIssue>,
    },
    Failed {
        stage: &'static str,
        message: String,
        inventory: Option<Inventory>,
        issues: Vec<PageIssue>,
    },
}

fn ingest_one(entry: &ManifestEntry, resources: &PipelineResources, out: &Path) -> Ingested {
    let doc_id = entry.doc_id();
    let (pages, issues) = match load_pages(&entry.files, &entry.meta) {
        Ok(p) => p,
        Err(e) => {
            return Ingested::Failed {
                stage: "ingest",
                message: e.to_string(),
                inventory: None,
                issues: Vec::new(),
            }
        }
    };
    let inventory = Inventory::of(&pages);
    let outcome = match process_document(doc_id, &entry.meta, &pages, resources) {
        Ok(o) => o,
        Err(e) => {
            return Ingested::Failed {
                stage: "process",
                message: e.to_string(),
                inventory: Some(inventory),
                issues,
            }
        }
    };
    if let Err(e) = EmittedBundle::from_document(&outcome.document).write(out) {
        return Ingested::Failed {
            stage: "emit",
            message: e.to_string(),
            inventory: Some(inventory),
            issues,
        };
    }
    info!("{doc_id}: {} pages, {} annotations", inventory.pages, outcome.document.annotations.len());
    Ingested::Done {
        report: outcome.report,
        issues,
    }
}

/// ALTO pages to bundles under `<output>/bundles`, which is recreated.
pub fn ingest(cfg: &PipelineConfig, jobs: usize) -> Result<RunReport, RunError> {
    let started = Instant::now();
    let mut report = RunReport::new("ingest");
    let resources = cfg.resources()?;
    let entries = unique_entries(read_manifest(cfg.manifest()?)?, &mut report);
    let out = cfg.bundles_dir();
    let io = |source| RunError::Io {
        path: out.clone(),
        source,
    };
    if out.exists() {
        std::fs::remove_dir_all(&out).map_err(io)?;
    }
    std::fs::create_dir_all(&out).map_err(io)?;

    let results: Vec<Ingested> = pool(jobs)?.install(|| {
        entries
            .par_iter()
            .map(|e| ingest_one(e, &resources, &out))
            .collect()
    });
    for (entry, result) in entries.iter().zip(results) {
        match result {
            Ingested::Done { report: doc, issues } => {
                report.add_inventory(&doc.inventory);
                report.pages_skipped += issues.len();
                report.warnings.extend(page_warnings(entry.doc_id(), &issues));
                report.warnings.extend(doc.warnings.iter().map(|w| format!("{}: {w}", entry.doc_id())));
                report.documents_emitted += 1;
                report.add_document(doc);
            }
            Ingested::Failed {
                stage,
                message,
                inventory,
                issues,
            } => {
                if let Some(inv) = inventory {
                    report.add_inventory(&inv);
                }
                report.pages_skipped += issues.len();
                report.warnings.extend(page_warnings(entry.doc_id(), &issues));
                report.fail(entry.doc_id(), stage, message);
            }
        }
    }
    report.elapsed_seconds.insert("ingest".into(), started.elapsed().as_secs_f64());
    Ok(report)
}

/// Bundles to a new snapshot. Unreadable or inconsistent bundles are
/// reported and left out.
pub fn index(cfg: &PipelineConfig, jobs: usize) -> Result<RunReport, RunError> {
    let started = Instant::now();
    let mut report = RunReport::new("index");
    let root = cfg.bundles_dir();
    let paths = if root.exists() {
        LoadedBundle::discover(&root).map_err(|e| RunError::Io {
            path: root.clone(),
            source: std::io::Error::other(e.to_string()),
        })?
    } else {
        Vec::new()
    };
    let loaded: Vec<(PathBuf, Result<LoadedBundle, String>)> = pool(jobs)?.install(|| {
        paths
            .par_iter()
            .map(|p| (p.clone(), LoadedBundle::load(p).map_err(|e| e.to_string())))
            .collect()
    });
    let mut bundles: Vec<LoadedBundle> = Vec::new();
    let mut seen = BTreeSet::new();
    for (path, b) in loaded {
        match b {
            Ok(b) if !seen.insert(b.doc_id.clone()) => report.fail(&b.doc_id, "index", "duplicate document id"),
            Ok(b) => bundles.push(b),
            Err(message) => report.fail(&path.display().to_string(), "index", message),
        }
    }

    let index = loop {
        match Index::build(bundles.clone()) {
            Ok(index) => break index,
            Err(IndexError::CorruptBundle { doc_id, reason }) => {
                report.fail(&doc_id, "index", reason);
                bundles.retain(|b| b.doc_id != doc_id);
            }
            Err(other) => return Err(other.into()),
        }
    };
    report.documents_indexed = index.len();
    report.snapshot = Some(write_snapshot(&index, &cfg.index_dir())?);
    report.elapsed_seconds.insert("index".into(), started.elapsed().as_secs_f64());
    Ok(report)
}

/// Inventory of the manifest's pages without running the pipeline.
pub fn stats(cfg: &PipelineConfig, jobs: usize) -> Result<RunReport, RunError> {
    let started = Instant::now();
    let mut report = RunReport::new("stats");
    let entries = unique_entries(read_manifest(cfg.manifest()?)?, &mut report);
    let loaded: Vec<_> = pool(jobs)?.install(|| {
        entries
            .par_iter()
            .map(|e| load_pages(&e.files, &e.meta).map(|(pages, issues)| (Inventory::of(&pages), issues)))
            .collect()
    });
    for (entry, r) in entries.iter().zip(loaded) {
        match r {
            Ok((inv, issues)) => {
                report.add_inventory(&inv);
                report.pages_skipped += issues.len();
                report.warnings.extend(page_warnings(entry.doc_id(), &issues));
            }
            Err(e) => report.fail(entry.doc_id(), "stats", e),
        }
    }
    report.elapsed_seconds.insert("stats".into(), started.elapsed().as_secs_f64());
    Ok(report)
}

/// Ingest then index.
pub fn all(cfg: &PipelineConfig, jobs: usize) -> Result<RunReport, RunError> {
    let mut report = ingest(cfg, jobs)?;
    report.command = "all".into();
    let indexed = index(cfg, jobs)?;
    report.merge(indexed);
    Ok(report)
}

/// Times the cleanup chain on one worker over every manifest page.
pub fn bench(cfg: &PipelineConfig, rounds: usize) -> Result<RunReport, RunError> {
    let mut report = RunReport::new("bench");
    let resources = cfg.resources()?;
    let entries = unique_entries(read_manifest(cfg.manifest()?)?, &mut report);
    let mut pages = Vec::new();
    for e in &entries {
        match load_pages(&e.files, &e.meta) {
            Ok((p, _)) => {
                report.add_inventory(&Inventory::of(&p));
                pages.extend(p);
            }
            Err(err) => report.fail(e.doc_id(), "bench", err),
        }
    }
    let result = bench_normalize(&pages, &resources, rounds);
    report.elapsed_seconds.insert("bench".into(), result.seconds);
    report.bench = Some(result);
    Ok(report)
}
