use std::path::Path;

use crate::{ensure, Outcome};

/// Every workspace member is a Rust crate and nothing front-end is
/// required to build or run the suite.
pub fn run() -> Outcome {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../..");
    let manifest: toml::Table = std::fs::read_to_string(root.join("Cargo.toml"))
        .map_err(|e| e.to_string())?
        .parse()
        .map_err(|e: toml::de::Error| e.to_string())?;
    let members = manifest["workspace"]["members"].as_array().ok_or("no workspace members")?;
    let mut dirs = Vec::new();
    for m in members {
        let m = m.as_str().ok_or("member is not a path")?;
        match m.strip_suffix("/*") {
            Some(parent) => {
                for entry in std::fs::read_dir(root.join(parent)).map_err(|e| e.to_string())? {
                    let path = entry.map_err(|e| e.to_string())?.path();
                    if path.is_dir() {
                        dirs.push(path);
                    }
                }
            }
            None => dirs.push(root.join(m)),
        }
    }
    let mut names = Vec::new();
    for dir in dirs {
        ensure!(dir.join("Cargo.toml").is_file(), "{} is not a crate", dir.display());
        ensure!(!dir.join("package.json").exists(), "{} carries a JavaScript package", dir.display());
        names.push(dir.file_name().unwrap().to_string_lossy().into_owned());
    }
    names.sort();
    ensure!(!names.iter().any(|n| n.contains("ui")), "a UI crate is part of the workspace: {names:?}");
    Ok(format!("suite ran with only Rust workspace members built: {}", names.join(", ")))
}
