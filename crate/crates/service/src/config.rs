//! Service configuration (TOML).

use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::time::Duration;

use csc_core::assets::AssetPaths;
use csc_core::engine::EngineConfig;
use csc_core::graph::{RemoteConfig, Relation};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const CONFIG_ENV: &str = "CSC_CONFIG";
pub const DEFAULT_CONFIG: &str = "csc.toml";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("config {path}: {reason}")]
    Invalid { path: PathBuf, reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RemoteSettings {
    pub endpoint: String,
    #[serde(default = "default_interval")]
    pub min_interval_ms: u64,
    #[serde(default = "default_timeout")]
    pub timeout_ms: u64,
    #[serde(default)]
    pub cache_dir: Option<PathBuf>,
}

fn default_interval() -> u64 {
    1100
}

fn default_timeout() -> u64 {
    10_000
}

impl RemoteSettings {
    pub fn client_config(&self) -> RemoteConfig {
        let mut c = RemoteConfig::new(self.endpoint.clone());
        c.min_interval = Duration::from_millis(self.min_interval_ms);
        c.cache_dir = self.cache_dir.clone();
        c
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EngineSettings {
    #[serde(default)]
    pub relations: Option<Vec<String>>,
    #[serde(default)]
    pub limit_per_query_word: Option<usize>,
    #[serde(default)]
    pub limit_per_w1: Option<usize>,
    #[serde(default)]
    pub w2_search_limit: Option<usize>,
    #[serde(default)]
    pub gate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ServiceConfig {
    #[serde(default = "default_listen")]
    pub listen: String,
    pub assets: AssetPaths,
    #[serde(default = "default_store")]
    pub session_store: PathBuf,
    #[serde(default)]
    pub remote: Option<RemoteSettings>,
    #[serde(default)]
    pub engine: Option<EngineSettings>,
    #[serde(default = "default_log")]
    pub log_level: String,
    /// When set, API calls must carry `Authorization: Bearer <token>`.
    #[serde(default)]
    pub auth_token: Option<String>,
}

fn default_listen() -> String {
    "127.0.0.1:8080".into()
}

fn default_store() -> PathBuf {
    PathBuf::from("sessions")
}

fn default_log() -> String {
    "info".into()
}

impl ServiceConfig {
    /// Parses `text`; relative paths resolve against `base`.
    pub fn parse(text: &str, base: &Path, origin: &Path) -> Result<Self, ConfigError> {
        let invalid = |reason: String| ConfigError::Invalid {
            path: origin.to_path_buf(),
            reason,
        };
        let mut config: ServiceConfig = toml::from_str(text).map_err(|e| invalid(e.to_string()))?;
        config.assets.resolve(base);
        if config.session_store.is_relative() {
            config.session_store = base.join(&config.session_store);
        }
        if let Some(remote) = &mut config.remote {
            if let Some(dir) = &mut remote.cache_dir {
                if dir.is_relative() {
                    *dir = base.join(&*dir);
                }
            }
        }
        config.listen_addr().map_err(invalid)?;
        config.engine_config().map_err(invalid)?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base, path)
    }

    /// Explicit path, else `$CSC_CONFIG`, else `./csc.toml`.
    pub fn locate(explicit: Option<&Path>) -> PathBuf {
        if let Some(p) = explicit {
            return p.to_path_buf();
        }
        match std::env::var_os(CONFIG_ENV) {
            Some(p) if !p.is_empty() => PathBuf::from(p),
            _ => PathBuf::from(DEFAULT_CONFIG),
        }
    }

    pub fn listen_addr(&self) -> Result<SocketAddr, String> {
        self.listen
            .parse()
            .map_err(|e| format!("listen address `{}`: {e}", self.listen))
    }

    pub fn engine_config(&self) -> Result<EngineConfig, String> {
        let mut c = EngineConfig::default();
        let Some(s) = &self.engine else {
            return Ok(c);
        };
        if let Some(rel) = &s.relations {
            if rel.is_empty() {
                return Err("engine.relations must not be empty".into());
            }
            c.relations = rel.iter().map(|r| Relation::parse(r)).collect();
        }
        for (value, slot, name) in [
            (s.limit_per_query_word, &mut c.limit_per_query_word, "limit_per_query_word"),
            (s.limit_per_w1, &mut c.limit_per_w1, "limit_per_w1"),
            (s.w2_search_limit, &mut c.w2_search_limit, "w2_search_limit"),
        ] {
            if let Some(v) = value {
                if v == 0 {
                    return Err(format!("engine.{name} must be at least 1"));
                }
                *slot = v;
            }
        }
        if let Some(g) = s.gate {
            if !g.is_finite() {
                return Err("engine.gate must be finite".into());
            }
            c.gate = g;
        }
        Ok(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TEXT: &str = r#"
listen = "127.0.0.1:0"
session_store = "store"

[assets]
embeddings = "emb.txt"
graph = "/abs/graph.tsv"
model = "model.csgbt"

[engine]
gate = 2.0
relations = ["RelatedTo"]
"#;

    #[test]
    fn paths_resolve_against_config_dir() {
        let c = ServiceConfig::parse(TEXT, Path::new("/etc/csc"), Path::new("/etc/csc/csc.toml")).unwrap();
        assert_eq!(c.assets.embeddings, Path::new("/etc/csc/emb.txt"));
        assert_eq!(c.assets.graph, Path::new("/abs/graph.tsv"));
        assert_eq!(c.session_store, Path::new("/etc/csc/store"));
        let e = c.engine_config().unwrap();
        assert_eq!(e.gate, 2.0);
        assert_eq!(e.relations, vec![Relation::RelatedTo]);
        assert_eq!(e.limit_per_w1, 20);
    }

    #[test]
    fn bad_listen_address_is_rejected() {
        let text = TEXT.replace("127.0.0.1:0", "nowhere:99999");
        assert!(ServiceConfig::parse(&text, Path::new("."), Path::new("x.toml")).is_err());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = format!("{TEXT}\nbogus = 1\n");
        assert!(matches!(
            ServiceConfig::parse(&text, Path::new("."), Path::new("x.toml")),
            Err(ConfigError::Invalid { .. })
        ));
    }
}
