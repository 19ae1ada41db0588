//! Persistent session store: an append-only JSON-lines event log plus a
//! snapshot per completed session. On open, sessions are rebuilt from
//! their snapshot when present and by replaying their events otherwise.

use std::collections::HashMap;
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};

use csc_core::engine::{Engine, EngineError, Event, EventRecord, Notice, Operation, Session, SessionState};
use thiserror::Error;

pub const EVENT_LOG: &str = "events.jsonl";
pub const SNAPSHOT_DIR: &str = "snapshots";

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("session {0} not found")]
    NotFound(String),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("session store {path}: {reason}")]
    Io { path: PathBuf, reason: String },
    #[error("event log line {line}: {reason}")]
    Corrupt { line: usize, reason: String },
}

fn io_err(path: &Path, e: impl ToString) -> StoreError {
    StoreError::Io {
        path: path.to_path_buf(),
        reason: e.to_string(),
    }
}

pub struct SessionStore {
    dir: PathBuf,
    log: Mutex<File>,
    sessions: RwLock<HashMap<String, Arc<Mutex<Session>>>>,
}

impl SessionStore {
    pub fn open(dir: &Path, engine: &Engine) -> Result<Self, StoreError> {
        fs::create_dir_all(dir.join(SNAPSHOT_DIR)).map_err(|e| io_err(dir, e))?;
        let log_path = dir.join(EVENT_LOG);
        let mut events: Vec<(String, Vec<Event>)> = Vec::new();
        let mut slot: HashMap<String, usize> = HashMap::new();
        if log_path.exists() {
            let file = File::open(&log_path).map_err(|e| io_err(&log_path, e))?;
            for (i, line) in BufReader::new(file).lines().enumerate() {
                let line = line.map_err(|e| io_err(&log_path, e))?;
                if line.trim().is_empty() {
                    continue;
                }
                let record: EventRecord = serde_json::from_str(&line).map_err(|e| StoreError::Corrupt {
                    line: i + 1,
                    reason: e.to_string(),
                })?;
                let at = *slot.entry(record.session_id.clone()).or_insert_with(|| {
                    events.push((record.session_id.clone(), Vec::new()));
                    events.len() - 1
                });
                events[at].1.push(Event {
                    timestamp: record.timestamp,
                    event_type: record.event_type,
                    payload: record.payload,
                });
            }
        }
        let mut sessions = HashMap::new();
        for (id, log) in events {
            let session = match read_snapshot(dir, &id) {
                Some(s) if s.events == log => s,
                _ => engine.restore(&id, &log)?,
            };
            sessions.insert(id, Arc::new(Mutex::new(session)));
        }
        let log = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&log_path)
            .map_err(|e| io_err(&log_path, e))?;
        Ok(SessionStore {
            dir: dir.to_path_buf(),
            log: Mutex::new(log),
            sessions: RwLock::new(sessions),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn len(&self) -> usize {
        self.sessions.read().expect("store lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn append(&self, session: &Session, from: usize) -> Result<(), StoreError> {
        let mut out = String::new();
        for record in &session.event_records()[from..] {
            out.push_str(&serde_json::to_string(record).map_err(|e| io_err(&self.dir, e))?);
            out.push('\n');
        }
        let mut log = self.log.lock().expect("log lock");
        log.write_all(out.as_bytes())
            .and_then(|_| log.flush())
            .map_err(|e| io_err(&self.dir.join(EVENT_LOG), e))?;
        if session.state == SessionState::Completed {
            write_snapshot(&self.dir, session)?;
        }
        Ok(())
    }

    /// Starts a session and persists its first event.
    pub fn create(&self, engine: &Engine, op: Operation) -> Result<(Session, Vec<Notice>), StoreError> {
        let mut session = Session::new(uuid_v4());
        let notices = engine.apply(&mut session, op)?;
        self.append(&session, 0)?;
        self.sessions
            .write()
            .expect("store lock")
            .insert(session.id.clone(), Arc::new(Mutex::new(session.clone())));
        Ok((session, notices))
    }

    fn handle(&self, id: &str) -> Result<Arc<Mutex<Session>>, StoreError> {
        self.sessions
            .read()
            .expect("store lock")
            .get(id)
            .cloned()
            .ok_or_else(|| StoreError::NotFound(id.to_string()))
    }

    pub fn get(&self, id: &str) -> Result<Session, StoreError> {
        Ok(self.handle(id)?.lock().expect("session lock").clone())
    }

    /// Applies `op` under the session's lock. The new state is committed
    /// only once its event is on disk.
    pub fn apply(&self, engine: &Engine, id: &str, op: Operation) -> Result<(Session, Vec<Notice>), StoreError> {
        let handle = self.handle(id)?;
        let mut guard = handle.lock().expect("session lock");
        let mut next = guard.clone();
        let notices = engine.apply(&mut next, op)?;
        self.append(&next, guard.events.len())?;
        *guard = next;
        Ok((guard.clone(), notices))
    }
}

fn uuid_v4() -> String {
    csc_core::engine::new_session_id()
}

fn snapshot_path(dir: &Path, id: &str) -> PathBuf {
    dir.join(SNAPSHOT_DIR).join(format!("{id}.json"))
}

fn read_snapshot(dir: &Path, id: &str) -> Option<Session> {
    let text = fs::read_to_string(snapshot_path(dir, id)).ok()?;
    serde_json::from_str(&text).ok()
}

fn write_snapshot(dir: &Path, session: &Session) -> Result<(), StoreError> {
    let path = snapshot_path(dir, &session.id);
    let tmp = path.with_extension("json.tmp");
    let body = serde_json::to_vec_pretty(session).map_err(|e| io_err(&path, e))?;
    fs::write(&tmp, body)
        .and_then(|_| fs::rename(&tmp, &path))
        .map_err(|e| io_err(&path, e))
}
