#![allow(dead_code)]

use std::path::{Path, PathBuf};

use csc_service::cli::app_state;
use csc_service::config::ServiceConfig;
use csc_service::http::router;
use serde_json::{json, Value};

pub fn repo_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

pub fn fixture_dir() -> PathBuf {
    repo_root().join("assets/fixture")
}

pub fn brief_path(name: &str) -> PathBuf {
    repo_root().join("assets/briefs").join(name)
}

pub fn brief_text(name: &str) -> String {
    std::fs::read_to_string(brief_path(name)).unwrap()
}

/// Config text pointing at the bundled fixture.
pub fn fixture_config_text(store: &Path, token: Option<&str>) -> String {
    let d = fixture_dir().canonicalize().unwrap();
    let token = token.map(|t| format!("auth_token = {t:?}\n")).unwrap_or_default();
    format!(
        "listen = \"127.0.0.1:0\"\nsession_store = {store:?}\nlog_level = \"warn\"\n{token}\n[assets]\n\
embeddings = {:?}\ngraph = {:?}\nmodel = {:?}\nbrackets = {:?}\n",
        d.join("embeddings.txt"),
        d.join("graph.tsv"),
        d.join("model.csgbt"),
        d.join("brackets.toml"),
    )
}

pub fn fixture_config(store: &Path, token: Option<&str>) -> ServiceConfig {
    let text = fixture_config_text(store, token);
    ServiceConfig::parse(&text, Path::new("/"), Path::new("test.toml")).unwrap()
}

pub struct Server {
    pub base: String,
    pub client: reqwest::Client,
    task: tokio::task::JoinHandle<()>,
}

impl Server {
    pub async fn start(config: &ServiceConfig) -> Server {
        let state = app_state(config).map_err(|f| f.message).unwrap();
        let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
        let addr = listener.local_addr().unwrap();
        let task = tokio::spawn(async move {
            axum::serve(listener, router(state)).await.unwrap();
        });
        Server {
            base: format!("http://{addr}"),
            client: reqwest::Client::new(),
            task,
        }
    }

    pub fn url(&self, path: &str) -> String {
        format!("{}{path}", self.base)
    }

    pub async fn post(&self, path: &str, body: Value) -> (u16, Value) {
        let resp = self.client.post(self.url(path)).json(&body).send().await.unwrap();
        let status = resp.status().as_u16();
        (status, resp.json().await.unwrap())
    }

    pub async fn get(&self, path: &str) -> (u16, Value) {
        let resp = self.client.get(self.url(path)).send().await.unwrap();
        let status = resp.status().as_u16();
        (status, resp.json().await.unwrap())
    }

    pub fn stop(self) {
        self.task.abort();
    }
}

fn ok(step: &str, (status, body): (u16, Value)) -> Value {
    assert!((200..300).contains(&status), "{step}: {status} {body}");
    body
}

/// Drives a session over HTTP, always taking the top-ranked option, and
/// returns the session id, the explanation text and the number of
/// state-changing calls made.
pub async fn top1_over_http(server: &Server, brief: &str) -> (String, String, usize) {
    let created = ok("create", server.post("/api/v1/sessions", json!({ "brief": brief })).await);
    let id = created["session_id"].as_str().unwrap().to_string();
    let at = |step: &str| format!("/api/v1/sessions/{id}/{step}");

    let offers = ok("w1", server.post(&at("w1-offers"), json!({})).await);
    let pool: Vec<String> = offers["offers"]
        .as_array()
        .unwrap()
        .iter()
        .take(5)
        .map(|o| o["lemma"].as_str().unwrap().to_string())
        .collect();
    ok("pool", server.post(&at("w1-pool"), json!({ "lemmas": pool })).await);
    let groups = ok("phrases", server.post(&at("phrase-offers"), json!({})).await);

    let mut best: Option<(f64, f64, usize, String, String)> = None;
    for group in groups["groups"].as_array().unwrap() {
        let w1 = group["w1"].as_str().unwrap();
        let rank = pool.iter().position(|p| p == w1).unwrap();
        for p in group["phrases"].as_array().unwrap() {
            let cand = (
                p["score"].as_f64().unwrap(),
                p["similarity"].as_f64().unwrap(),
                rank,
                p["w2"].as_str().unwrap().to_string(),
                w1.to_string(),
            );
            let better = match &best {
                None => true,
                Some(b) => {
                    (cand.0, cand.1) > (b.0, b.1)
                        || ((cand.0, cand.1) == (b.0, b.1) && (cand.2, &cand.3) < (b.2, &b.3))
                }
            };
            if better {
                best = Some(cand);
            }
        }
    }
    let (_, _, _, w2, w1) = best.expect("a phrase passed the gate");
    ok("phrase", server.post(&at("phrase"), json!({ "w1": w1, "w2": w2 })).await);
    let antonyms = ok("antonyms", server.post(&at("antonym-offers"), json!({})).await);
    let first = |key: &str, taken: &[&str]| -> String {
        antonyms[key]
            .as_array()
            .unwrap()
            .iter()
            .map(|o| o["lemma"].as_str().unwrap())
            .find(|l| !taken.contains(l))
            .unwrap()
            .to_string()
    };
    let w3 = first("w3_offers", &[&w1, &w2]);
    let w4 = first("w4_offers", &[&w1, &w2, &w3]);
    let done = ok("complete", server.post(&at("complete"), json!({ "w3": w3, "w4": w4 })).await);
    assert_eq!(done["state"], "completed");
    let text = ok("explanation", server.get(&at("explanation")).await)["text"]
        .as_str()
        .unwrap()
        .to_string();
    (id, text, 7)
}
