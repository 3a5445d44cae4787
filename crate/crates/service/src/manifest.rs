use std::path::{Path, PathBuf};

use archive_lens_core::CollectionMeta;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ManifestError {
    #[error("cannot read manifest {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid manifest {path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

/// One document of a batch: collection metadata and its page files in
/// reading order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    #[serde(flatten)]
    pub meta: CollectionMeta,
    pub files: Vec<PathBuf>,
}

impl ManifestEntry {
    pub fn doc_id(&self) -> &str {
        &self.meta.collection_id
    }
}

/// Reads a manifest; page paths are made relative to its directory.
pub fn read_manifest(path: &Path) -> Result<Vec<ManifestEntry>, ManifestError> {
    let bytes = std::fs::read(path).map_err(|source| ManifestError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    let mut entries: Vec<ManifestEntry> = serde_json::from_slice(&bytes).map_err(|source| ManifestError::Json {
        path: path.to_path_buf(),
        source,
    })?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    for e in &mut entries {
        for f in &mut e.files {
            if f.is_relative() {
                *f = base.join(&*f);
            }
        }
    }
    Ok(entries)
}
