use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use vistutor_core::Strategy;

use crate::error::{Result, ServiceError};

fn default_port() -> u16 {
    8080
}

fn default_host() -> String {
    "127.0.0.1".into()
}

fn default_len() -> usize {
    20
}

fn default_alternate_ms() -> u64 {
    500
}

fn default_min_wait_ms() -> u64 {
    2000
}

fn default_train_fraction() -> f64 {
    0.8
}

/// Service configuration file. Relative paths are resolved against the
/// directory holding the file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ServiceConfig {
    #[serde(default = "default_host")]
    pub host: String,
    #[serde(default = "default_port")]
    pub port: u16,
    pub dataset: PathBuf,
    /// Precomputed teaching set per strategy.
    pub teaching_sets: BTreeMap<Strategy, PathBuf>,
    pub data_dir: PathBuf,
    #[serde(default)]
    pub assets_dir: Option<PathBuf>,
    #[serde(default = "default_len")]
    pub teach_len: usize,
    #[serde(default = "default_len")]
    pub test_len: usize,
    #[serde(default = "default_alternate_ms")]
    pub alternate_ms: u64,
    #[serde(default = "default_min_wait_ms")]
    pub min_wait_ms: u64,
    /// Static tutorial pages shown before teaching starts.
    #[serde(default)]
    pub tutorial: Vec<String>,
    #[serde(default)]
    pub seed: u64,
    /// Explicit test pool. When absent, the test side of a stratified split.
    #[serde(default)]
    pub test_ids: Option<Vec<String>>,
    #[serde(default)]
    pub split_seed: Option<u64>,
    #[serde(default = "default_train_fraction")]
    pub train_fraction: f64,
}

impl ServiceConfig {
    pub fn new(
        dataset: impl Into<PathBuf>,
        teaching_sets: BTreeMap<Strategy, PathBuf>,
        data_dir: impl Into<PathBuf>,
    ) -> Self {
        ServiceConfig {
            host: default_host(),
            port: default_port(),
            dataset: dataset.into(),
            teaching_sets,
            data_dir: data_dir.into(),
            assets_dir: None,
            teach_len: default_len(),
            test_len: default_len(),
            alternate_ms: default_alternate_ms(),
            min_wait_ms: default_min_wait_ms(),
            tutorial: Vec::new(),
            seed: 0,
            test_ids: None,
            split_seed: None,
            train_fraction: default_train_fraction(),
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| ServiceError::Config(format!("{}: {e}", path.display())))?;
        let mut cfg: ServiceConfig = serde_json::from_str(&text)
            .map_err(|e| ServiceError::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        cfg.resolve_paths(base);
        if cfg.teaching_sets.is_empty() {
            return Err(ServiceError::Config("no teaching sets configured".into()));
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.dataset);
        fix(&mut self.data_dir);
        if let Some(a) = self.assets_dir.as_mut() {
            fix(a);
        }
        for p in self.teaching_sets.values_mut() {
            fix(p);
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.teach_len == 0 || self.test_len == 0 {
            return Err(ServiceError::Config(
                "teach_len and test_len must be positive".into(),
            ));
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(ServiceError::Config(format!(
                "train_fraction must lie in (0, 1), got {}",
                self.train_fraction
            )));
        }
        Ok(())
    }
}
