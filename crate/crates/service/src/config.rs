//! TOML run configuration. Relative paths are resolved against the
//! directory holding the configuration file.

use std::path::{Path, PathBuf};

use archive_lens_core::annotate::{EntityTagger, Gazetteer};
use archive_lens_core::layout::Abbreviations;
use archive_lens_core::normalize::{LanguageProfile, NormalizeConfig, SingleLetterExceptions};
use archive_lens_core::{LayoutConfig, Lexicon, PipelineResources};
use serde::Deserialize;
use thiserror::Error;

pub const CONFIG_ENV: &str = "ARCHIVE_LENS_CONFIG";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("no configuration given: pass --config or set {CONFIG_ENV}")]
    NotGiven,
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid configuration {path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("{key} is required for this command")]
    Missing { key: &'static str },
    #[error("{key} points to {path}, which does not exist")]
    MissingPath { key: &'static str, path: PathBuf },
    #[error("{key} = {value} is outside {range}")]
    OutOfRange {
        key: &'static str,
        value: String,
        range: &'static str,
    },
    #[error("cannot load {key} from {path}: {message}")]
    Resource {
        key: &'static str,
        path: PathBuf,
        message: String,
    },
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputSection {
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResourceSection {
    pub lexicon: Option<PathBuf>,
    #[serde(default)]
    pub gazetteers: Vec<PathBuf>,
    /// A profile file or a directory of `*.json` profiles.
    pub language_profiles: Option<PathBuf>,
    pub abbreviations: Option<Vec<String>>,
    /// Single letters kept by garbage stripping.
    pub single_letters: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LayoutSection {
    pub header_band: f64,
    pub header_recurrence: f64,
    pub header_min_pages: usize,
    pub title_font_ratio: f64,
    pub title_max_tokens: usize,
}

impl Default for LayoutSection {
    fn default() -> Self {
        let d = LayoutConfig::default();
        Self {
            header_band: d.header_band,
            header_recurrence: d.header_recurrence,
            header_min_pages: d.header_min_pages,
            title_font_ratio: d.title_font_ratio,
            title_max_tokens: d.title_max_tokens,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    /// Bundles go to `<dir>/bundles`, the run report to `<dir>/report.json`.
    pub dir: PathBuf,
    pub index_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ServiceSection {
    pub bind: String,
    pub port: u16,
    pub cors_origins: Vec<String>,
    /// Seconds between checks for a newer snapshot; 0 disables reloading.
    pub reload_interval: u64,
}

impl Default for ServiceSection {
    fn default() -> Self {
        Self {
            bind: "127.0.0.1".into(),
            port: 8080,
            cors_origins: Vec::new(),
            reload_interval: 5,
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineSection {
    pub jobs: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    #[serde(default)]
    pub input: InputSection,
    #[serde(default)]
    pub resources: ResourceSection,
    #[serde(default)]
    pub layout: LayoutSection,
    pub output: OutputSection,
    #[serde(default)]
    pub service: ServiceSection,
    #[serde(default)]
    pub pipeline: PipelineSection,
}

fn range_check<T: PartialOrd + ToString>(
    key: &'static str,
    value: T,
    ok: impl Fn(&T) -> bool,
    range: &'static str,
) -> Result<(), ConfigError> {
    if ok(&value) {
        Ok(())
    } else {
        Err(ConfigError::OutOfRange {
            key,
            value: value.to_string(),
            range,
        })
    }
}

fn existing(key: &'static str, path: &Path) -> Result<(), ConfigError> {
    if path.exists() {
        Ok(())
    } else {
        Err(ConfigError::MissingPath {
            key,
            path: path.to_path_buf(),
        })
    }
}

impl PipelineConfig {
    /// Path from `--config`, else from the environment.
    pub fn locate(flag: Option<PathBuf>) -> Result<PathBuf, ConfigError> {
        flag.or_else(|| std::env::var_os(CONFIG_ENV).map(PathBuf::from))
            .ok_or(ConfigError::NotGiven)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        Self::parse(&text, base).map_err(|e| match e {
            ConfigError::Parse { message, .. } => ConfigError::Parse {
                path: path.to_path_buf(),
                message,
            },
            other => other,
        })
    }

    /// Parses configuration text, resolving paths against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self, ConfigError> {
        let mut cfg: PipelineConfig = toml::from_str(text).map_err(|e| ConfigError::Parse {
            path: PathBuf::from("<text>"),
            message: e.to_string(),
        })?;
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        cfg.input.manifest.iter_mut().for_each(fix);
        cfg.resources.lexicon.iter_mut().for_each(fix);
        cfg.resources.gazetteers.iter_mut().for_each(fix);
        cfg.resources.language_profiles.iter_mut().for_each(fix);
        fix(&mut cfg.output.dir);
        cfg.output.index_dir.iter_mut().for_each(fix);
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), ConfigError> {
        let l = &self.layout;
        range_check("layout.header_band", l.header_band, |v| *v > 0.0 && *v <= 0.5, "(0, 0.5]")?;
        range_check("layout.header_recurrence", l.header_recurrence, |v| *v > 0.0 && *v <= 1.0, "(0, 1]")?;
        range_check("layout.header_min_pages", l.header_min_pages, |v| *v >= 1, "[1, ∞)")?;
        range_check("layout.title_font_ratio", l.title_font_ratio, |v| (1.0..=5.0).contains(v), "[1, 5]")?;
        range_check("layout.title_max_tokens", l.title_max_tokens, |v| (1..=100).contains(v), "[1, 100]")?;
        if let Some(j) = self.pipeline.jobs {
            range_check("pipeline.jobs", j, |v| (1..=512).contains(v), "[1, 512]")?;
        }
        if let Some(m) = &self.input.manifest {
            existing("input.manifest", m)?;
        }
        if let Some(p) = &self.resources.lexicon {
            existing("resources.lexicon", p)?;
        }
        for g in &self.resources.gazetteers {
            existing("resources.gazetteers", g)?;
        }
        if let Some(p) = &self.resources.language_profiles {
            existing("resources.language_profiles", p)?;
        }
        Ok(())
    }

    pub fn manifest(&self) -> Result<&Path, ConfigError> {
        self.input.manifest.as_deref().ok_or(ConfigError::Missing { key: "input.manifest" })
    }

    pub fn bundles_dir(&self) -> PathBuf {
        self.output.dir.join("bundles")
    }

    pub fn report_path(&self) -> PathBuf {
        self.output.dir.join("report.json")
    }

    pub fn index_dir(&self) -> PathBuf {
        self.output.index_dir.clone().unwrap_or_else(|| self.output.dir.join("index"))
    }

    /// Index directory for `serve`, which must already exist.
    pub fn existing_index_dir(&self) -> Result<PathBuf, ConfigError> {
        let dir = self.index_dir();
        existing("output.index_dir", &dir)?;
        Ok(dir)
    }

    pub fn layout_config(&self) -> LayoutConfig {
        let l = &self.layout;
        LayoutConfig {
            header_band: l.header_band,
            header_recurrence: l.header_recurrence,
            header_min_pages: l.header_min_pages,
            title_font_ratio: l.title_font_ratio,
            title_max_tokens: l.title_max_tokens,
            abbreviations: self.abbreviations(),
        }
    }

    fn abbreviations(&self) -> Abbreviations {
        self.resources
            .abbreviations
            .as_ref()
            .map(Abbreviations::new)
            .unwrap_or_default()
    }

    /// Loads lexicon, gazetteers and language profiles.
    pub fn resources(&self) -> Result<PipelineResources, ConfigError> {
        let r = &self.resources;
        let lexicon = match &r.lexicon {
            Some(p) => Lexicon::load(p).map_err(|e| ConfigError::Resource {
                key: "resources.lexicon",
                path: p.clone(),
                message: e.to_string(),
            })?,
            None => Lexicon::default(),
        };
        let gazetteers = r
            .gazetteers
            .iter()
            .map(|p| {
                Gazetteer::load(p).map_err(|e| ConfigError::Resource {
                    key: "resources.gazetteers",
                    path: p.clone(),
                    message: e.to_string(),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        let tagger = EntityTagger::new(&gazetteers).map_err(|e| ConfigError::Resource {
            key: "resources.gazetteers",
            path: r.gazetteers.first().cloned().unwrap_or_default(),
            message: e.to_string(),
        })?;
        let profiles = match &r.language_profiles {
            Some(p) => LanguageProfile::load_all(p).map_err(|e| ConfigError::Resource {
                key: "resources.language_profiles",
                path: p.clone(),
                message: e.to_string(),
            })?,
            None => Vec::new(),
        };
        let exceptions = r
            .single_letters
            .as_ref()
            .map(|s| SingleLetterExceptions::new(s.chars().filter(|c| !c.is_whitespace())))
            .unwrap_or_default();
        Ok(PipelineResources {
            lexicon,
            tagger,
            profiles,
            layout: self.layout_config(),
            normalize: NormalizeConfig {
                exceptions,
                abbreviations: self.abbreviations(),
            },
        })
    }
}
