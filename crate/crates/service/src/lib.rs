//! Pipeline orchestration and the HTTP exploration API.

pub mod api;
pub mod cli;
pub mod config;
pub mod manifest;
pub mod run;

pub use api::{router, ApiError, SnapshotHandle};
pub use cli::{execute, Cli, Command};
pub use config::{ConfigError, PipelineConfig, CONFIG_ENV};
pub use manifest::{read_manifest, ManifestEntry};
pub use run::{CorpusCounts, RunError, RunReport};
