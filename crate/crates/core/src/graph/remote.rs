//! HTTP client for a hosted graph query API with an on-disk response cache.
//!
//! Responses are cached by (endpoint, lemma, relation). A cache hit never
//! touches the transport; a response is only cached after it parsed.

use std::collections::{BTreeSet, HashMap};
use std::path::PathBuf;
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use serde_json::Value;
use sha2::{Digest, Sha256};
use thiserror::Error;

use super::{
    Assertion, Direction, EdgeSource, GraphError, Neighbor, PartOfSpeech, Relation, Result,
    TermSense,
};

#[derive(Debug, Error)]
pub enum TransportError {
    #[error("request to {0} timed out")]
    Timeout(String),
    #[error("{url} answered with status {status}")]
    Status { url: String, status: u16 },
    #[error("malformed response from {url}: {reason}")]
    Malformed { url: String, reason: String },
    #[error("network error: {0}")]
    Network(String),
    #[error("response cache: {0}")]
    Cache(String),
}

#[derive(Debug, Clone)]
pub struct TransportResponse {
    pub status: u16,
    pub body: Vec<u8>,
}

/// Blocking GET. Implementations must be safe to call concurrently.
pub trait Transport: Send + Sync {
    fn get(&self, url: &str) -> std::result::Result<TransportResponse, TransportError>;
}

pub struct HttpTransport {
    client: reqwest::blocking::Client,
}

impl HttpTransport {
    pub fn new(timeout: Duration) -> std::result::Result<Self, TransportError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(timeout)
            .user_agent(concat!("csc/", env!("CARGO_PKG_VERSION")))
            .build()
            .map_err(|e| TransportError::Network(e.to_string()))?;
        Ok(HttpTransport { client })
    }
}

impl Transport for HttpTransport {
    fn get(&self, url: &str) -> std::result::Result<TransportResponse, TransportError> {
        let resp = self.client.get(url).send().map_err(|e| {
            if e.is_timeout() {
                TransportError::Timeout(url.to_string())
            } else {
                TransportError::Network(e.to_string())
            }
        })?;
        let status = resp.status().as_u16();
        let body = resp
            .bytes()
            .map_err(|e| TransportError::Network(e.to_string()))?
            .to_vec();
        Ok(TransportResponse { status, body })
    }
}

#[derive(Debug, Clone)]
pub struct RemoteConfig {
    pub endpoint: String,
    pub language: String,
    /// Minimum spacing between network requests.
    pub min_interval: Duration,
    pub cache_dir: Option<PathBuf>,
    pub page_limit: usize,
}

impl RemoteConfig {
    pub fn new(endpoint: impl Into<String>) -> Self {
        RemoteConfig {
            endpoint: endpoint.into(),
            language: "en".into(),
            min_interval: Duration::from_millis(1100),
            cache_dir: None,
            page_limit: 1000,
        }
    }
}

pub struct RemoteGraph {
    config: RemoteConfig,
    transport: Arc<dyn Transport>,
    last_request: Mutex<Option<Instant>>,
    key_locks: Mutex<HashMap<String, Arc<Mutex<()>>>>,
}

impl RemoteGraph {
    pub fn new(config: RemoteConfig, transport: Arc<dyn Transport>) -> Self {
        RemoteGraph {
            config,
            transport,
            last_request: Mutex::new(None),
            key_locks: Mutex::new(HashMap::new()),
        }
    }

    pub fn endpoint(&self) -> &str {
        &self.config.endpoint
    }

    fn url(&self, lemma: &str, relation: Option<&Relation>) -> std::result::Result<String, TransportError> {
        let base = format!("{}/query", self.config.endpoint.trim_end_matches('/'));
        let node = format!("/c/{}/{}", self.config.language, lemma);
        let limit = self.config.page_limit.to_string();
        let mut params = vec![("node", node)];
        if let Some(r) = relation {
            params.push(("rel", r.uri()));
        }
        params.push(("limit", limit));
        reqwest::Url::parse_with_params(&base, &params)
            .map(String::from)
            .map_err(|e| TransportError::Network(format!("bad endpoint {base}: {e}")))
    }

    fn cache_key(&self, lemma: &str, relation: Option<&Relation>) -> String {
        let mut h = Sha256::new();
        h.update(self.config.endpoint.as_bytes());
        h.update([0]);
        h.update(lemma.as_bytes());
        h.update([0]);
        h.update(relation.map(Relation::name).unwrap_or("*").as_bytes());
        let digest = hex::encode(h.finalize());
        format!(
            "{}__{}__{}",
            relation.map(Relation::name).unwrap_or("any"),
            lemma,
            &digest[..16]
        )
    }

    fn throttle(&self) {
        let mut last = self.last_request.lock().expect("rate limiter poisoned");
        if let Some(prev) = *last {
            let next = prev + self.config.min_interval;
            let now = Instant::now();
            if next > now {
                std::thread::sleep(next - now);
            }
        }
        *last = Some(Instant::now());
    }

    /// Raw assertions touching `lemma`, from cache or network.
    pub fn lookup(
        &self,
        lemma: &str,
        relation: Option<&Relation>,
    ) -> std::result::Result<Vec<Assertion>, TransportError> {
        let key = self.cache_key(lemma, relation);
        let guard = {
            let mut locks = self.key_locks.lock().expect("key lock table poisoned");
            Arc::clone(locks.entry(key.clone()).or_default())
        };
        let _held = guard.lock().expect("cache key lock poisoned");

        let url = self.url(lemma, relation)?;
        let cache_path = self
            .config
            .cache_dir
            .as_ref()
            .map(|d| d.join(format!("{key}.json")));
        if let Some(path) = &cache_path {
            if let Ok(body) = std::fs::read(path) {
                return self.parse(&url, &body);
            }
        }

        self.throttle();
        let resp = self.transport.get(&url)?;
        if !(200..300).contains(&resp.status) {
            return Err(TransportError::Status {
                url,
                status: resp.status,
            });
        }
        let parsed = self.parse(&url, &resp.body)?;
        if let Some(path) = &cache_path {
            write_atomic(path, &resp.body)?;
        }
        Ok(parsed)
    }

    fn parse(&self, url: &str, body: &[u8]) -> std::result::Result<Vec<Assertion>, TransportError> {
        let malformed = |reason: &str| TransportError::Malformed {
            url: url.to_string(),
            reason: reason.to_string(),
        };
        let doc: Value = serde_json::from_slice(body).map_err(|e| malformed(&e.to_string()))?;
        let edges = doc
            .get("edges")
            .and_then(Value::as_array)
            .ok_or_else(|| malformed("missing edges array"))?;
        let mut out = Vec::with_capacity(edges.len());
        for edge in edges {
            let id = |field: &str| edge.get(field).and_then(|v| v.get("@id")).and_then(Value::as_str);
            let (Some(rel), Some(start), Some(end)) = (id("rel"), id("start"), id("end")) else {
                return Err(malformed("edge without rel/start/end"));
            };
            let weight = edge
                .get("weight")
                .and_then(Value::as_f64)
                .filter(|w| w.is_finite() && *w >= 0.0)
                .ok_or_else(|| malformed("edge without valid weight"))?;
            // non-concept nodes (external links) are skipped, as are other languages
            let (Some(start), Some(end)) = (TermSense::from_uri(start), TermSense::from_uri(end))
            else {
                continue;
            };
            if start.language != self.config.language
                || end.language != self.config.language
                || start.is_multiword()
                || end.is_multiword()
            {
                continue;
            }
            out.push(Assertion {
                relation: Relation::parse(rel),
                start,
                end,
                weight,
            });
        }
        Ok(out)
    }
}

fn write_atomic(path: &std::path::Path, body: &[u8]) -> std::result::Result<(), TransportError> {
    let err = |e: std::io::Error| TransportError::Cache(format!("{}: {e}", path.display()));
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(err)?;
    }
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, body).map_err(err)?;
    std::fs::rename(&tmp, path).map_err(err)
}

impl EdgeSource for RemoteGraph {
    fn neighbors(
        &self,
        lemma: &str,
        relation: &Relation,
        direction: Direction,
    ) -> Result<Vec<Neighbor>> {
        let symmetric = relation.is_symmetric();
        let mut out = Vec::new();
        for a in self.lookup(lemma, Some(relation))? {
            if &a.relation != relation {
                continue;
            }
            if a.start.lemma == lemma && (symmetric || direction == Direction::Outgoing) {
                out.push(Neighbor {
                    sense: a.end.clone(),
                    weight: a.weight,
                });
            }
            if a.end.lemma == lemma && (symmetric || direction == Direction::Incoming) {
                out.push(Neighbor {
                    sense: a.start,
                    weight: a.weight,
                });
            }
        }
        out.sort_by(|a, b| {
            b.weight
                .total_cmp(&a.weight)
                .then_with(|| a.sense.lemma.cmp(&b.sense.lemma))
                .then_with(|| a.sense.pos.cmp(&b.sense.pos))
        });
        Ok(out)
    }

    fn pos_tags(&self, lemma: &str) -> Result<Option<BTreeSet<PartOfSpeech>>> {
        let edges = self.lookup(lemma, None).map_err(GraphError::from)?;
        if edges.is_empty() {
            return Ok(None);
        }
        Ok(Some(
            edges
                .iter()
                .flat_map(|a| [&a.start, &a.end])
                .filter(|s| s.lemma == lemma)
                .filter_map(|s| s.pos)
                .collect(),
        ))
    }
}
