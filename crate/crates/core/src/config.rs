//! Runtime configuration: a TOML file whose every key can be overridden by
//! an environment variable.
//!
//! | key                       | env var                     | default                 |
//! |---------------------------|-----------------------------|-------------------------|
//! | `listen`                  | `CHEMVIS_LISTEN`            | `127.0.0.1:8080`        |
//! | `store_dir`               | `CHEMVIS_STORE`             | `chemvis-store`         |
//! | `offline`                 | `CHEMVIS_OFFLINE`           | `false`                 |
//! | `pubchem_base`            | `CHEMVIS_PUBCHEM_BASE`      | PubChem PUG-REST        |
//! | `cache_dir`               | `CHEMVIS_CACHE_DIR`         | `chemvis-cache`         |
//! | `rate_limit`              | `CHEMVIS_RATE_LIMIT`        | `5` requests/second     |
//! | `max_concurrent_requests` | `CHEMVIS_MAX_CONCURRENT`    | `2`                     |
//! | `tag_map`                 | `CHEMVIS_TAG_MAP`           | built-in tag map        |
//! | `default_weights`         | `CHEMVIS_W_ENTITY`, `CHEMVIS_W_TEXT` | `0.5` / `0.5`  |
//! | `max_upload_bytes`        | `CHEMVIS_MAX_UPLOAD_BYTES`  | `10485760`              |
//! | `lexicon_path`            | `CHEMVIS_LEXICON`           | bundled lexicon         |
//! | `extra_properties`        | `CHEMVIS_PROPERTIES`        | none                    |
//!
//! The config file itself is named by `CHEMVIS_CONFIG`.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::enrichment::pubchem::DEFAULT_BASE_URL;
use crate::ingestion::TagMap;
use crate::recommend::SimilarityWeights;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("reading {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("parsing config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("environment variable {var}: {detail}")]
    Env { var: &'static str, detail: String },
    #[error("invalid default weights: {0}")]
    Weights(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightsConfig {
    pub entity: f64,
    pub text: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServiceConfig {
    pub listen: String,
    pub store_dir: PathBuf,
    pub offline: bool,
    pub pubchem_base: String,
    pub cache_dir: PathBuf,
    pub rate_limit: usize,
    pub max_concurrent_requests: usize,
    pub tag_map: TagMap,
    pub default_weights: WeightsConfig,
    pub max_upload_bytes: usize,
    pub lexicon_path: Option<PathBuf>,
    pub extra_properties: Vec<String>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            listen: "127.0.0.1:8080".to_string(),
            store_dir: PathBuf::from("chemvis-store"),
            offline: false,
            pubchem_base: DEFAULT_BASE_URL.to_string(),
            cache_dir: PathBuf::from("chemvis-cache"),
            rate_limit: 5,
            max_concurrent_requests: 2,
            tag_map: TagMap::default(),
            default_weights: WeightsConfig {
                entity: 0.5,
                text: 0.5,
            },
            max_upload_bytes: 10 * 1024 * 1024,
            lexicon_path: None,
            extra_properties: Vec::new(),
        }
    }
}

fn parse_flag(var: &'static str, value: &str) -> Result<bool, ConfigError> {
    match value.trim().to_ascii_lowercase().as_str() {
        "1" | "true" | "yes" | "on" => Ok(true),
        "0" | "false" | "no" | "off" | "" => Ok(false),
        other => Err(ConfigError::Env {
            var,
            detail: format!("`{other}` is not a boolean"),
        }),
    }
}

fn parse_num<T: FromStr>(var: &'static str, value: &str) -> Result<T, ConfigError> {
    value.trim().parse().map_err(|_| ConfigError::Env {
        var,
        detail: format!("`{value}` is not a number"),
    })
}

impl ServiceConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let config: ServiceConfig = toml::from_str(text)?;
        config.weights()?;
        Ok(config)
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        ServiceConfig::from_toml_str(&text)
    }

    /// Load the file named by `path` (or `CHEMVIS_CONFIG`, or defaults),
    /// then apply environment overrides.
    pub fn load(path: Option<&Path>) -> Result<Self, ConfigError> {
        let from_env = std::env::var_os("CHEMVIS_CONFIG").map(PathBuf::from);
        let mut config = match path.map(Path::to_path_buf).or(from_env) {
            Some(p) => ServiceConfig::from_file(&p)?,
            None => ServiceConfig::default(),
        };
        config.apply_env(|var| std::env::var(var).ok())?;
        Ok(config)
    }

    /// Override fields from variables returned by `lookup`.
    pub fn apply_env<F>(&mut self, lookup: F) -> Result<(), ConfigError>
    where
        F: Fn(&str) -> Option<String>,
    {
        if let Some(v) = lookup("CHEMVIS_LISTEN") {
            self.listen = v;
        }
        if let Some(v) = lookup("CHEMVIS_STORE") {
            self.store_dir = v.into();
        }
        if let Some(v) = lookup("CHEMVIS_OFFLINE") {
            self.offline = parse_flag("CHEMVIS_OFFLINE", &v)?;
        }
        if let Some(v) = lookup("CHEMVIS_PUBCHEM_BASE") {
            self.pubchem_base = v;
        }
        if let Some(v) = lookup("CHEMVIS_CACHE_DIR") {
            self.cache_dir = v.into();
        }
        if let Some(v) = lookup("CHEMVIS_RATE_LIMIT") {
            self.rate_limit = parse_num("CHEMVIS_RATE_LIMIT", &v)?;
        }
        if let Some(v) = lookup("CHEMVIS_MAX_CONCURRENT") {
            self.max_concurrent_requests = parse_num("CHEMVIS_MAX_CONCURRENT", &v)?;
        }
        if let Some(v) = lookup("CHEMVIS_TAG_MAP") {
            self.tag_map = TagMap::parse_pairs(&v).map_err(|detail| ConfigError::Env {
                var: "CHEMVIS_TAG_MAP",
                detail,
            })?;
        }
        if let Some(v) = lookup("CHEMVIS_W_ENTITY") {
            self.default_weights.entity = parse_num("CHEMVIS_W_ENTITY", &v)?;
        }
        if let Some(v) = lookup("CHEMVIS_W_TEXT") {
            self.default_weights.text = parse_num("CHEMVIS_W_TEXT", &v)?;
        }
        if let Some(v) = lookup("CHEMVIS_MAX_UPLOAD_BYTES") {
            self.max_upload_bytes = parse_num("CHEMVIS_MAX_UPLOAD_BYTES", &v)?;
        }
        if let Some(v) = lookup("CHEMVIS_LEXICON") {
            self.lexicon_path = Some(v.into());
        }
        if let Some(v) = lookup("CHEMVIS_PROPERTIES") {
            self.extra_properties = v
                .split(',')
                .map(str::trim)
                .filter(|p| !p.is_empty())
                .map(str::to_string)
                .collect();
        }
        self.weights()?;
        Ok(())
    }

    pub fn weights(&self) -> Result<SimilarityWeights, ConfigError> {
        SimilarityWeights::new(self.default_weights.entity, self.default_weights.text)
            .map_err(|e| ConfigError::Weights(e.to_string()))
    }
}
