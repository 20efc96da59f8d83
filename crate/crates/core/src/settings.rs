//! TOML settings shared by the batch driver and the HTTP service, plus the
//! stores they name.

use crate::buyables::{Catalog, CatalogError};
use crate::one_step::{OneStep, OneStepError, StrategyConfig, StrategyKind};
use crate::search::{SearchConfig, SearchError};
use crate::store::{ReactionCorpus, StoreError, TemplateStore};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use thiserror::Error;

pub const PORT_ENV: &str = "RETROPLAN_PORT";
pub const DATA_DIR_ENV: &str = "RETROPLAN_DATA_DIR";

/// Files in the data directory that extend the configured stores.
pub const TEMPLATES_OVERLAY: &str = "templates.jsonl";
pub const CORPUS_OVERLAY: &str = "corpus.jsonl";
pub const BUYABLES_SNAPSHOT: &str = "buyables.jsonl";

#[derive(Debug, Error)]
pub enum SettingsError {
    #[error("cannot read {path}: {cause}")]
    Io { path: String, cause: String },
    #[error("invalid settings: {0}")]
    Invalid(String),
    #[error("{path}: {source}")]
    Store { path: String, source: StoreError },
    #[error("{path}: {source}")]
    Catalog { path: String, source: CatalogError },
    #[error(transparent)]
    OneStep(#[from] OneStepError),
    #[error(transparent)]
    Search(#[from] SearchError),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AuthSettings {
    /// Bearer token to user id. Empty means a single anonymous user.
    pub tokens: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Settings {
    pub host: String,
    pub port: u16,
    pub data_dir: PathBuf,
    pub templates: Option<PathBuf>,
    pub corpus: Option<PathBuf>,
    pub buyables: Option<PathBuf>,
    pub strategies: Vec<StrategyKind>,
    pub workers: usize,
    pub strategy: StrategyConfig,
    pub search: SearchConfig,
    pub auth: AuthSettings,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            host: "127.0.0.1".into(),
            port: 8080,
            data_dir: PathBuf::from("retroplan-data"),
            templates: None,
            corpus: None,
            buyables: None,
            strategies: StrategyKind::ALL.to_vec(),
            workers: 2,
            strategy: StrategyConfig::default(),
            search: SearchConfig::default(),
            auth: AuthSettings::default(),
        }
    }
}

fn io_err(path: &Path, e: impl ToString) -> SettingsError {
    SettingsError::Io {
        path: path.display().to_string(),
        cause: e.to_string(),
    }
}

impl Settings {
    /// Parse a settings file. Relative paths are resolved against the
    /// file's directory.
    pub fn load(path: &Path) -> Result<Self, SettingsError> {
        let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
        let mut s: Settings = toml::from_str(&text).map_err(|e| SettingsError::Invalid(e.to_string()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        s.resolve_paths(base);
        s.validate()?;
        Ok(s)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.data_dir);
        for p in [&mut self.templates, &mut self.corpus, &mut self.buyables].into_iter().flatten() {
            fix(p);
        }
    }

    pub fn validate(&self) -> Result<(), SettingsError> {
        self.strategy.validate()?;
        self.search.validate()?;
        if self.strategies.is_empty() {
            return Err(SettingsError::Invalid("no strategies enabled".into()));
        }
        if self.workers == 0 {
            return Err(SettingsError::Invalid("workers must be positive".into()));
        }
        Ok(())
    }

    /// Apply port and data directory overrides from `env`.
    pub fn apply_env(&mut self, env: impl Fn(&str) -> Option<String>) -> Result<(), SettingsError> {
        if let Some(p) = env(PORT_ENV) {
            self.port = p
                .parse()
                .map_err(|_| SettingsError::Invalid(format!("{PORT_ENV}={p} is not a port")))?;
        }
        if let Some(d) = env(DATA_DIR_ENV) {
            self.data_dir = PathBuf::from(d);
        }
        Ok(())
    }

    /// Load every configured store, then the data-directory overlays.
    pub fn load_stores(&self) -> Result<Stores, SettingsError> {
        let mut templates = TemplateStore::default();
        let mut corpus = ReactionCorpus::default();
        let mut catalog = Catalog::new();
        let overlay = |name: &str| Some(self.data_dir.join(name)).filter(|p| p.exists());
        for path in self.templates.iter().cloned().chain(overlay(TEMPLATES_OVERLAY)) {
            templates.merge(load_templates(&path)?);
        }
        for path in self.corpus.iter().cloned().chain(overlay(CORPUS_OVERLAY)) {
            corpus.merge(load_corpus(&path)?);
        }
        for path in self.buyables.iter().cloned().chain(overlay(BUYABLES_SNAPSHOT)) {
            catalog.import_path(&path).map_err(|source| SettingsError::Catalog {
                path: path.display().to_string(),
                source,
            })?;
        }
        corpus.validate(&templates).map_err(|source| SettingsError::Store {
            path: "corpus".into(),
            source,
        })?;
        Ok(Stores {
            templates: Arc::new(templates),
            corpus: Arc::new(corpus),
            catalog,
        })
    }
}

pub fn load_templates(path: &Path) -> Result<TemplateStore, SettingsError> {
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    TemplateStore::from_jsonl(&text).map_err(|source| SettingsError::Store {
        path: path.display().to_string(),
        source,
    })
}

pub fn load_corpus(path: &Path) -> Result<ReactionCorpus, SettingsError> {
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    ReactionCorpus::from_jsonl(&text).map_err(|source| SettingsError::Store {
        path: path.display().to_string(),
        source,
    })
}

pub struct Stores {
    pub templates: Arc<TemplateStore>,
    pub corpus: Arc<ReactionCorpus>,
    pub catalog: Catalog,
}

impl Stores {
    pub fn one_step(&self, settings: &Settings) -> Result<OneStep, OneStepError> {
        OneStep::new(
            self.templates.clone(),
            self.corpus.clone(),
            &settings.strategies,
            settings.strategy.clone(),
        )
    }
}
