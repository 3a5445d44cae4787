#![allow(dead_code)]

use std::path::{Path, PathBuf};

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

/// Writes a configuration for a bundled fixture whose outputs land in `out`.
pub fn config_for(fixture: &str, out: &Path) -> PathBuf {
    config_with_manifest(&fixtures().join(fixture).join("manifest.json"), out)
}

pub fn config_with_manifest(manifest: &Path, out: &Path) -> PathBuf {
    let res = fixtures().join("resources");
    let text = format!(
        "[input]\nmanifest = {:?}\n\n[resources]\nlexicon = {:?}\ngazetteers = [{:?}, {:?}]\nlanguage_profiles = {:?}\n\n[output]\ndir = {:?}\n\n[service]\ncors_origins = [\"http://localhost:5173\"]\n",
        manifest,
        res.join("lexicon.tsv"),
        res.join("persons.json"),
        res.join("places.json"),
        res.join("profiles"),
        out.join("out"),
    );
    let path = out.join("config.toml");
    std::fs::write(&path, text).unwrap();
    path
}
