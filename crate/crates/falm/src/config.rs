//! Service configuration: a TOML file plus environment overrides.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use chrono::NaiveDate;
use falm_core::engine::{Engine, EngineConfig};
use falm_core::guardrails::Guardrails;
use serde::{Deserialize, Serialize};

use crate::io;

pub const ENV_DATA_DIR: &str = "FALM_DATA_DIR";
pub const ENV_CORPUS_DIR: &str = "FALM_CORPUS_DIR";
pub const ENV_PORT: &str = "FALM_PORT";
pub const ENV_REF_DATE: &str = "FALM_REF_DATE";

/// Relative paths are resolved against the directory of the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ServiceConfig {
    pub data_dir: PathBuf,
    pub corpus_dir: PathBuf,
    /// Prebuilt index; when absent the corpus is indexed at startup.
    #[serde(default)]
    pub index_file: Option<PathBuf>,
    pub lexicon: PathBuf,
    #[serde(default = "default_bind")]
    pub bind: String,
    #[serde(default = "default_port")]
    pub port: u16,
    /// Fixed "today" for relative dates.
    #[serde(default)]
    pub ref_date: Option<NaiveDate>,
    #[serde(default)]
    pub engine: EngineConfig,
}

fn default_bind() -> String {
    "127.0.0.1".into()
}

fn default_port() -> u16 {
    8080
}

impl ServiceConfig {
    pub fn new(data_dir: PathBuf, corpus_dir: PathBuf, lexicon: PathBuf) -> ServiceConfig {
        ServiceConfig {
            data_dir,
            corpus_dir,
            index_file: None,
            lexicon,
            bind: default_bind(),
            port: default_port(),
            ref_date: None,
            engine: EngineConfig::default(),
        }
    }

    pub fn from_toml(text: &str, base: &Path) -> anyhow::Result<ServiceConfig> {
        let mut cfg: ServiceConfig = toml::from_str(text).context("invalid config")?;
        for p in [&mut cfg.data_dir, &mut cfg.corpus_dir, &mut cfg.lexicon] {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        if let Some(p) = cfg.index_file.as_mut().filter(|p| p.is_relative()) {
            *p = base.join(&*p);
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> anyhow::Result<ServiceConfig> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        ServiceConfig::from_toml(&text, base).with_context(|| path.display().to_string())
    }

    /// Apply FALM_* overrides from `lookup` (normally the process environment).
    pub fn apply_env(&mut self, lookup: impl Fn(&str) -> Option<String>) -> anyhow::Result<()> {
        if let Some(v) = lookup(ENV_DATA_DIR) {
            self.data_dir = v.into();
        }
        if let Some(v) = lookup(ENV_CORPUS_DIR) {
            self.corpus_dir = v.into();
        }
        if let Some(v) = lookup(ENV_PORT) {
            self.port = v.parse().with_context(|| format!("{ENV_PORT}={v} is not a port"))?;
        }
        if let Some(v) = lookup(ENV_REF_DATE) {
            let d = NaiveDate::parse_from_str(&v, "%Y-%m-%d").with_context(|| format!("{ENV_REF_DATE}={v}"))?;
            self.ref_date = Some(d);
        }
        Ok(())
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        for (name, p) in [("data_dir", &self.data_dir), ("corpus_dir", &self.corpus_dir)] {
            if !p.is_dir() {
                bail!("{name} {} is not a directory", p.display());
            }
        }
        if !self.lexicon.is_file() {
            bail!("lexicon {} does not exist", self.lexicon.display());
        }
        if let Some(p) = &self.index_file {
            if !p.is_file() {
                bail!("index_file {} does not exist", p.display());
            }
        }
        if !self.engine.limits.is_valid() {
            bail!("sandbox limits must be positive");
        }
        if let Err(e) = self.engine.reference.weights.check() {
            bail!("{e}");
        }
        Ok(())
    }

    /// Load the dataset, index and lexicon into an engine.
    pub fn build_engine(&self) -> anyhow::Result<Engine> {
        self.validate()?;
        let dataset = io::load_dataset_dir(&self.data_dir)?;
        let index = match &self.index_file {
            Some(p) => io::load_index(p)?,
            None => io::build_index(&io::load_corpus_dir(&self.corpus_dir)?)?,
        };
        let lexicon = std::fs::read_to_string(&self.lexicon)
            .with_context(|| format!("reading {}", self.lexicon.display()))?;
        let guardrails = Guardrails::from_lexicon_text(&lexicon)
            .map_err(|e| anyhow::anyhow!("{}: line {}: {}", self.lexicon.display(), e.line, e.message))?;
        Ok(Engine::new(dataset, index, guardrails, self.engine.clone()))
    }
}
