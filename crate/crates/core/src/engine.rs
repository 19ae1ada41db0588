//! The character-space session state machine.
//!
//! A session walks from a design brief to a completed character space:
//! query words, a ranked w1 offer list, a pool of up to five w1 lemmas,
//! gated and scored w1-w2 phrases, antonym offers for both words, and the
//! four-pole space with its explanation. Every accepted operation appends
//! exactly one event; a rejected operation leaves the session untouched.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

use chrono::{DateTime, Duration, Utc};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::brief::{extract_query_adjectives, BriefError, DesignBrief, QueryWords, Stopwords};
use crate::embedding::EmbeddingIndex;
use crate::graph::{ConceptGraph, GraphError, PartOfSpeech, Relation};
use crate::morphology::{is_adjective, nominalize, shares_stem, NominalizationTable};
use crate::scoring::{BracketTable, WordScorerModel};

pub const DEFAULT_GATE: f64 = 1.7;
pub const MAX_POOL: usize = 5;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("cannot {op} while the session is {state}")]
    InvalidTransition { op: &'static str, state: SessionState },
    #[error("{0}")]
    InvalidInput(String),
    #[error(transparent)]
    Brief(#[from] BriefError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("event {index}: {reason}")]
    Replay { index: usize, reason: String },
}

pub type Result<T> = std::result::Result<T, EngineError>;

fn invalid(msg: impl Into<String>) -> EngineError {
    EngineError::InvalidInput(msg.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SessionState {
    Created,
    BriefSubmitted,
    W1Offered,
    W1PoolSelected,
    PhrasesOffered,
    PhraseSelected,
    AntonymsOffered,
    Completed,
}

impl fmt::Display for SessionState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = serde_json::to_value(self).map_err(|_| fmt::Error)?;
        f.write_str(v.as_str().unwrap_or("unknown"))
    }
}

/// Predicted usefulness of an adjective, `None` when it cannot be scored.
pub trait UsefulnessScorer: Send + Sync {
    fn usefulness(&self, lemma: &str) -> Option<f64>;
}

/// The trained ensemble applied to embedding vectors.
pub struct ModelScorer {
    pub model: Arc<WordScorerModel>,
    pub index: Arc<EmbeddingIndex>,
}

impl UsefulnessScorer for ModelScorer {
    fn usefulness(&self, lemma: &str) -> Option<f64> {
        crate::scoring::word_score(lemma, &self.model, &self.index).ok()
    }
}

impl UsefulnessScorer for HashMap<String, f64> {
    fn usefulness(&self, lemma: &str) -> Option<f64> {
        self.get(lemma).copied()
    }
}

/// Shared read-only data every session draws on.
pub struct Resources {
    pub index: Arc<EmbeddingIndex>,
    pub graph: ConceptGraph,
    pub scorer: Arc<dyn UsefulnessScorer>,
    pub brackets: BracketTable,
    pub nominalization: NominalizationTable,
    pub stopwords: Stopwords,
    pub extra_lexicon: Option<HashSet<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EngineConfig {
    pub relations: Vec<Relation>,
    pub limit_per_query_word: usize,
    pub limit_per_w1: usize,
    /// Related terms of each w1 examined before gating.
    pub w2_search_limit: usize,
    pub gate: f64,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            relations: Relation::default_candidates(),
            limit_per_query_word: 30,
            limit_per_w1: 20,
            w2_search_limit: 200,
            gate: DEFAULT_GATE,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateSource {
    pub query: String,
    pub relation: Relation,
    pub weight: f64,
    /// Reached from a manually entered word.
    pub manual: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WordCandidate {
    pub lemma: String,
    pub usefulness: f64,
    pub source: CandidateSource,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhraseCandidate {
    pub w1: String,
    pub w2: String,
    pub w2_noun: String,
    pub similarity: f64,
    pub score: f64,
    pub w2_usefulness: f64,
    pub display: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhraseGroup {
    pub w1: String,
    pub phrases: Vec<PhraseCandidate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AntonymOffer {
    pub lemma: String,
    pub weight: f64,
    pub indirect: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadrantLabels {
    /// Upper right: w1 with w2.
    pub target: String,
    /// Lower right: w3 with w2.
    pub w2_w3: String,
    /// Lower left: w3 with w4.
    pub w3_w4: String,
    /// Upper left: w1 with w4.
    pub w4_w1: String,
}

/// The completed quadrant: w1 top, then clockwise w2 right, w3 bottom,
/// w4 left. Quadrants read as vertical-axis adjective plus horizontal-axis
/// noun.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CharacterSpace {
    pub w1: String,
    pub w2: String,
    pub w2_noun: String,
    pub w3: String,
    pub w4: String,
    pub w4_noun: String,
    pub manual_w3: bool,
    pub manual_w4: bool,
    pub quadrant_labels: QuadrantLabels,
}

impl CharacterSpace {
    pub fn explanation(&self) -> String {
        generate_explanation(self)
    }
}

/// Fills the fixed explanation template.
pub fn generate_explanation(cs: &CharacterSpace) -> String {
    let (w1, w2, w3, w4) = (&cs.w1, &cs.w2_noun, &cs.w3, &cs.w4);
    format!(
        "My design concept is {w1} {w2}. It has a sense of {w2} yet is {w1}, not {w3}. \
         It is {w1} but not {w4}. In this design, {w1} and {w2} can go together."
    )
}

/// One operation on a session. The variant name is the event type and the
/// fields are its payload, so a session can be rebuilt from its log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event_type", content = "payload", rename_all = "snake_case")]
pub enum Operation {
    StartSession { brief: DesignBrief },
    OfferW1 { limit: Option<usize> },
    ManualQuery { word: String },
    SelectW1Pool { lemmas: Vec<String> },
    OfferPhrases { limit: Option<usize> },
    SelectPhrase { w1: String, w2: String },
    OfferAntonyms {},
    Complete {
        w3: String,
        w4: String,
        #[serde(default)]
        manual_w3: bool,
        #[serde(default)]
        manual_w4: bool,
    },
}

impl Operation {
    pub fn name(&self) -> &'static str {
        match self {
            Operation::StartSession { .. } => "start_session",
            Operation::OfferW1 { .. } => "offer_w1",
            Operation::ManualQuery { .. } => "manual_query",
            Operation::SelectW1Pool { .. } => "select_w1_pool",
            Operation::OfferPhrases { .. } => "offer_phrases",
            Operation::SelectPhrase { .. } => "select_phrase",
            Operation::OfferAntonyms {} => "offer_antonyms",
            Operation::Complete { .. } => "complete",
        }
    }

    fn allowed_in(&self, state: SessionState) -> bool {
        use SessionState::*;
        match self {
            Operation::StartSession { .. } => state == Created,
            Operation::OfferW1 { .. } => matches!(state, BriefSubmitted | W1Offered),
            Operation::ManualQuery { .. } => matches!(state, W1Offered | PhrasesOffered),
            Operation::SelectW1Pool { .. } => state == W1Offered,
            Operation::OfferPhrases { .. } => state == W1PoolSelected,
            Operation::SelectPhrase { .. } => matches!(state, PhrasesOffered | PhraseSelected),
            Operation::OfferAntonyms {} => state == PhraseSelected,
            Operation::Complete { .. } => state == AntonymsOffered,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub timestamp: DateTime<Utc>,
    pub event_type: String,
    pub payload: Value,
}

impl Event {
    pub fn operation(&self) -> std::result::Result<Operation, serde_json::Error> {
        serde_json::from_value(serde_json::json!({
            "event_type": self.event_type,
            "payload": self.payload,
        }))
    }
}

/// One line of the exported event log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventRecord {
    pub timestamp: DateTime<Utc>,
    pub session_id: String,
    pub event_type: String,
    pub payload: Value,
}

/// Conditions worth telling the user about that do not reject the operation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "word", rename_all = "snake_case")]
pub enum Notice {
    NoQueryWords,
    /// None of the query words is known to the graph.
    QueryWordsNotFound,
    NotFound(String),
    NotAdjective(String),
    NoAntonymsForW1,
    NoAntonymsForW2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Session {
    pub id: String,
    pub state: SessionState,
    pub brief: Option<DesignBrief>,
    pub query_words: Vec<String>,
    /// Words entered through manual queries while choosing w1, in entry order.
    pub manual_words: Vec<String>,
    /// Words entered through manual queries while choosing phrases.
    pub manual_w2_words: Vec<String>,
    pub w1_limit: usize,
    pub w1_offers: Vec<WordCandidate>,
    pub w1_pool: Vec<String>,
    pub phrase_limit: usize,
    pub phrase_offers: Vec<PhraseGroup>,
    pub chosen_phrase: Option<PhraseCandidate>,
    pub w3_offers: Vec<AntonymOffer>,
    pub w4_offers: Vec<AntonymOffer>,
    pub character_space: Option<CharacterSpace>,
    pub notices: Vec<Notice>,
    pub events: Vec<Event>,
}

impl Session {
    pub fn new(id: impl Into<String>) -> Self {
        Session {
            id: id.into(),
            state: SessionState::Created,
            brief: None,
            query_words: Vec::new(),
            manual_words: Vec::new(),
            manual_w2_words: Vec::new(),
            w1_limit: 0,
            w1_offers: Vec::new(),
            w1_pool: Vec::new(),
            phrase_limit: 0,
            phrase_offers: Vec::new(),
            chosen_phrase: None,
            w3_offers: Vec::new(),
            w4_offers: Vec::new(),
            character_space: None,
            notices: Vec::new(),
            events: Vec::new(),
        }
    }

    pub fn explanation(&self) -> Option<String> {
        self.character_space.as_ref().map(generate_explanation)
    }

    pub fn event_records(&self) -> Vec<EventRecord> {
        self.events
            .iter()
            .map(|e| EventRecord {
                timestamp: e.timestamp,
                session_id: self.id.clone(),
                event_type: e.event_type.clone(),
                payload: e.payload.clone(),
            })
            .collect()
    }

    /// Event log as newline-terminated JSON lines.
    pub fn export_events(&self) -> String {
        let mut out = String::new();
        for r in self.event_records() {
            out.push_str(&serde_json::to_string(&r).expect("event records serialize"));
            out.push('\n');
        }
        out
    }

    pub fn all_phrases(&self) -> impl Iterator<Item = &PhraseCandidate> {
        self.phrase_offers.iter().flat_map(|g| g.phrases.iter())
    }
}

fn word_order(a: &WordCandidate, b: &WordCandidate) -> std::cmp::Ordering {
    b.usefulness
        .total_cmp(&a.usefulness)
        .then_with(|| a.lemma.cmp(&b.lemma))
}

fn phrase_order(a: &PhraseCandidate, b: &PhraseCandidate) -> std::cmp::Ordering {
    b.score
        .total_cmp(&a.score)
        .then_with(|| b.similarity.total_cmp(&a.similarity))
        .then_with(|| a.w2.cmp(&b.w2))
}

/// Fresh opaque session identifier (random UUID).
pub fn new_session_id() -> String {
    uuid::Uuid::new_v4().to_string()
}

fn normalize_lemma(word: &str) -> String {
    word.trim().to_lowercase()
}

#[derive(Clone)]
pub struct Engine {
    resources: Arc<Resources>,
    config: EngineConfig,
}

struct Related {
    found: bool,
    /// (lemma, relation, weight) ranked by (-weight, lemma).
    terms: Vec<(String, Relation, f64)>,
}

impl Engine {
    pub fn new(resources: Arc<Resources>, config: EngineConfig) -> Self {
        Engine { resources, config }
    }

    pub fn resources(&self) -> &Resources {
        &self.resources
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    /// Creates a session and submits the brief.
    pub fn start_session(&self, brief: DesignBrief) -> Result<Session> {
        let mut session = Session::new(new_session_id());
        self.apply(&mut session, Operation::StartSession { brief })?;
        Ok(session)
    }

    pub fn apply(&self, session: &mut Session, op: Operation) -> Result<Vec<Notice>> {
        self.apply_at(session, op, Utc::now())
    }

    /// Applies `op` as if at time `now`. On error the session is unchanged.
    pub fn apply_at(&self, session: &mut Session, op: Operation, now: DateTime<Utc>) -> Result<Vec<Notice>> {
        if !op.allowed_in(session.state) {
            return Err(EngineError::InvalidTransition {
                op: op.name(),
                state: session.state,
            });
        }
        let mut next = session.clone();
        let notices = self.transition(&mut next, &op)?;
        let timestamp = match next.events.last() {
            Some(last) if now <= last.timestamp => last.timestamp + Duration::microseconds(1),
            _ => now,
        };
        let payload = serde_json::to_value(&op)
            .ok()
            .and_then(|mut v| v.get_mut("payload").map(Value::take))
            .unwrap_or(Value::Null);
        next.events.push(Event {
            timestamp,
            event_type: op.name().to_string(),
            payload,
        });
        next.notices = notices.clone();
        *session = next;
        Ok(notices)
    }

    /// Rebuilds a session by replaying its event log.
    pub fn restore(&self, id: &str, events: &[Event]) -> Result<Session> {
        let mut session = Session::new(id);
        for (index, event) in events.iter().enumerate() {
            let op = event.operation().map_err(|e| EngineError::Replay {
                index,
                reason: e.to_string(),
            })?;
            self.apply_at(&mut session, op, event.timestamp)
                .map_err(|e| EngineError::Replay {
                    index,
                    reason: e.to_string(),
                })?;
        }
        Ok(session)
    }

    fn transition(&self, s: &mut Session, op: &Operation) -> Result<Vec<Notice>> {
        match op {
            Operation::StartSession { brief } => self.submit_brief(s, brief),
            Operation::OfferW1 { limit } => {
                let limit = limit.unwrap_or(self.config.limit_per_query_word);
                if limit == 0 {
                    return Err(invalid("limit must be at least 1"));
                }
                s.w1_limit = limit;
                let notices = self.refresh_w1(s)?;
                s.state = SessionState::W1Offered;
                Ok(notices)
            }
            Operation::ManualQuery { word } => self.manual_query(s, word),
            Operation::SelectW1Pool { lemmas } => self.select_pool(s, lemmas),
            Operation::OfferPhrases { limit } => {
                let limit = limit.unwrap_or(self.config.limit_per_w1);
                if limit == 0 {
                    return Err(invalid("limit must be at least 1"));
                }
                s.phrase_limit = limit;
                s.phrase_offers = self.phrase_groups(s)?;
                s.state = SessionState::PhrasesOffered;
                Ok(Vec::new())
            }
            Operation::SelectPhrase { w1, w2 } => {
                let (w1, w2) = (normalize_lemma(w1), normalize_lemma(w2));
                let chosen = s
                    .all_phrases()
                    .find(|p| p.w1 == w1 && p.w2 == w2)
                    .cloned()
                    .ok_or_else(|| invalid(format!("phrase ({w1}, {w2}) was not offered")))?;
                s.chosen_phrase = Some(chosen);
                s.state = SessionState::PhraseSelected;
                Ok(Vec::new())
            }
            Operation::OfferAntonyms {} => self.offer_antonyms(s),
            Operation::Complete {
                w3,
                w4,
                manual_w3,
                manual_w4,
            } => {
                let cs = self.character_space(s, w3, w4, *manual_w3, *manual_w4)?;
                s.character_space = Some(cs);
                s.state = SessionState::Completed;
                Ok(Vec::new())
            }
        }
    }

    fn submit_brief(&self, s: &mut Session, brief: &DesignBrief) -> Result<Vec<Notice>> {
        let r = &self.resources;
        let words = extract_query_adjectives(brief, &r.graph, r.extra_lexicon.as_ref(), &r.stopwords)?;
        s.brief = Some(brief.clone());
        s.query_words = words.words().to_vec();
        s.state = SessionState::BriefSubmitted;
        Ok(match words {
            QueryWords::NoQueryWords => vec![Notice::NoQueryWords],
            QueryWords::Found(_) => Vec::new(),
        })
    }

    /// Adjectives related to `query`, attributed to their strongest relation.
    fn related(&self, query: &str, limit: usize) -> Result<Related> {
        let graph = &self.resources.graph;
        let mut best: BTreeMap<String, (Relation, f64)> = BTreeMap::new();
        let mut found = false;
        for relation in &self.config.relations {
            let rt = graph.related_terms(query, Some(PartOfSpeech::Adjective), std::slice::from_ref(relation), usize::MAX)?;
            found |= rt.found;
            for (sense, weight) in rt.terms {
                match best.get(&sense.lemma) {
                    Some((_, w)) if *w >= weight => {}
                    _ => {
                        best.insert(sense.lemma, (relation.clone(), weight));
                    }
                }
            }
        }
        let mut terms: Vec<(String, Relation, f64)> =
            best.into_iter().map(|(l, (r, w))| (l, r, w)).collect();
        terms.sort_by(|a, b| b.2.total_cmp(&a.2).then_with(|| a.0.cmp(&b.0)));
        terms.truncate(limit);
        Ok(Related { found, terms })
    }

    fn is_adjective(&self, lemma: &str) -> bool {
        let r = &self.resources;
        is_adjective(lemma, &r.graph, r.extra_lexicon.as_ref())
    }

    /// Recomputes the w1 offers from the query words and manual words.
    fn refresh_w1(&self, s: &mut Session) -> Result<Vec<Notice>> {
        let mut notices = Vec::new();
        let mut offers: HashMap<String, WordCandidate> = HashMap::new();
        let mut any_found = false;
        let sources = s
            .query_words
            .iter()
            .map(|q| (q, false))
            .chain(s.manual_words.iter().map(|m| (m, true)));
        for (query, manual) in sources {
            let related = self.related(query, s.w1_limit)?;
            if !manual {
                any_found |= related.found;
            }
            for (lemma, relation, weight) in related.terms {
                if offers.contains_key(&lemma) {
                    continue;
                }
                let Some(usefulness) = self.resources.scorer.usefulness(&lemma) else {
                    continue;
                };
                let source = CandidateSource {
                    query: query.clone(),
                    relation,
                    weight,
                    manual,
                };
                offers.insert(
                    lemma.clone(),
                    WordCandidate {
                        lemma,
                        usefulness,
                        source,
                    },
                );
            }
        }
        if !s.query_words.is_empty() && !any_found {
            notices.push(Notice::QueryWordsNotFound);
        }
        let mut offers: Vec<WordCandidate> = offers.into_values().collect();
        offers.sort_by(word_order);
        s.w1_offers = offers;
        Ok(notices)
    }

    fn manual_query(&self, s: &mut Session, word: &str) -> Result<Vec<Notice>> {
        let word = normalize_lemma(word);
        if word.is_empty() || !word.chars().all(|c| c.is_alphabetic() || c == '-') {
            return Err(invalid(format!("`{word}` is not a single word")));
        }
        let mut notices = Vec::new();
        if !self.is_adjective(&word) {
            notices.push(Notice::NotAdjective(word.clone()));
        }
        let limit = match s.state {
            SessionState::W1Offered => s.w1_limit,
            _ => self.config.w2_search_limit,
        };
        if !self.related(&word, limit.max(1))?.found {
            notices.push(Notice::NotFound(word.clone()));
        }
        if s.state == SessionState::W1Offered {
            if !s.manual_words.contains(&word) {
                s.manual_words.push(word);
            }
            notices.extend(self.refresh_w1(s)?.into_iter().filter(|n| *n != Notice::QueryWordsNotFound));
        } else {
            if !s.manual_w2_words.contains(&word) {
                s.manual_w2_words.push(word);
            }
            s.phrase_offers = self.phrase_groups(s)?;
        }
        Ok(notices)
    }

    fn select_pool(&self, s: &mut Session, lemmas: &[String]) -> Result<Vec<Notice>> {
        if lemmas.is_empty() || lemmas.len() > MAX_POOL {
            return Err(invalid(format!(
                "select between 1 and {MAX_POOL} words, got {}",
                lemmas.len()
            )));
        }
        let mut pool: Vec<String> = Vec::with_capacity(lemmas.len());
        for raw in lemmas {
            let lemma = normalize_lemma(raw);
            let offered = s.w1_offers.iter().any(|c| c.lemma == lemma) || s.manual_words.contains(&lemma);
            if !offered {
                return Err(invalid(format!("`{lemma}` was not offered")));
            }
            if pool.contains(&lemma) {
                return Err(invalid(format!("`{lemma}` selected twice")));
            }
            pool.push(lemma);
        }
        s.w1_pool = pool;
        s.state = SessionState::W1PoolSelected;
        Ok(Vec::new())
    }

    /// Manual words entered after the pool was chosen, plus their related
    /// adjectives: extra w2 candidates for every w1.
    fn manual_w2_candidates(&self, s: &Session) -> Result<Vec<String>> {
        let mut out = Vec::new();
        for word in &s.manual_w2_words {
            out.push(word.clone());
            for (lemma, _, _) in self.related(word, self.config.w2_search_limit)?.terms {
                out.push(lemma);
            }
        }
        Ok(out)
    }

    fn phrase_groups(&self, s: &Session) -> Result<Vec<PhraseGroup>> {
        let extras = self.manual_w2_candidates(s)?;
        let mut groups = Vec::with_capacity(s.w1_pool.len());
        for w1 in &s.w1_pool {
            let mut phrases: Vec<PhraseCandidate> = Vec::new();
            let mut seen: HashSet<String> = HashSet::new();
            let related = self.related(w1, self.config.w2_search_limit)?;
            let candidates = related.terms.into_iter().map(|(l, _, _)| l).chain(extras.iter().cloned());
            for w2 in candidates {
                if !seen.insert(w2.clone()) {
                    continue;
                }
                if let Some(p) = self.phrase(w1, &w2)? {
                    phrases.push(p);
                }
            }
            phrases.sort_by(phrase_order);
            phrases.truncate(s.phrase_limit);
            groups.push(PhraseGroup {
                w1: w1.clone(),
                phrases,
            });
        }
        Ok(groups)
    }

    /// The phrase (w1, w2) if it passes every gate.
    fn phrase(&self, w1: &str, w2: &str) -> Result<Option<PhraseCandidate>> {
        let r = &self.resources;
        if w1 == w2 || shares_stem(w1, w2) || !r.index.contains(w2) || !self.is_adjective(w2) {
            return Ok(None);
        }
        let Some(usefulness) = r.scorer.usefulness(w2) else {
            return Ok(None);
        };
        if usefulness < self.config.gate {
            return Ok(None);
        }
        let Ok(similarity) = r.index.similarity(w1, w2) else {
            return Ok(None);
        };
        let w2_noun = nominalize(w2, &r.nominalization, Some(&r.graph));
        Ok(Some(PhraseCandidate {
            w1: w1.to_string(),
            w2: w2.to_string(),
            display: format!("{w1} {w2_noun}"),
            w2_noun,
            similarity,
            score: r.brackets.score(similarity),
            w2_usefulness: usefulness,
        }))
    }

    fn antonym_offers(&self, lemma: &str) -> Result<Vec<AntonymOffer>> {
        Ok(self
            .resources
            .graph
            .antonyms(lemma, Some(PartOfSpeech::Adjective))?
            .into_iter()
            .map(|a| AntonymOffer {
                lemma: a.term.lemma,
                weight: a.weight,
                indirect: a.indirect,
            })
            .collect())
    }

    fn offer_antonyms(&self, s: &mut Session) -> Result<Vec<Notice>> {
        let chosen = s.chosen_phrase.as_ref().ok_or_else(|| invalid("no phrase selected"))?;
        s.w3_offers = self.antonym_offers(&chosen.w1)?;
        s.w4_offers = self.antonym_offers(&chosen.w2)?;
        s.state = SessionState::AntonymsOffered;
        let mut notices = Vec::new();
        if s.w3_offers.is_empty() {
            notices.push(Notice::NoAntonymsForW1);
        }
        if s.w4_offers.is_empty() {
            notices.push(Notice::NoAntonymsForW2);
        }
        Ok(notices)
    }

    fn character_space(&self, s: &Session, w3: &str, w4: &str, manual_w3: bool, manual_w4: bool) -> Result<CharacterSpace> {
        let chosen = s.chosen_phrase.as_ref().ok_or_else(|| invalid("no phrase selected"))?;
        let (w3, w4) = (normalize_lemma(w3), normalize_lemma(w4));
        for (word, offers, manual, slot) in [(&w3, &s.w3_offers, manual_w3, "w3"), (&w4, &s.w4_offers, manual_w4, "w4")] {
            if word.is_empty() {
                return Err(invalid(format!("{slot} is empty")));
            }
            if !manual && !offers.iter().any(|o| &o.lemma == word) {
                return Err(invalid(format!("{slot} `{word}` was not offered; mark it manual to use it")));
            }
        }
        let poles = [&chosen.w1, &chosen.w2, &w3, &w4];
        for i in 0..poles.len() {
            for j in i + 1..poles.len() {
                if poles[i] == poles[j] {
                    return Err(invalid(format!("poles must be distinct; `{}` repeats", poles[i])));
                }
            }
        }
        let r = &self.resources;
        let w4_noun = nominalize(&w4, &r.nominalization, Some(&r.graph));
        let w2_noun = chosen.w2_noun.clone();
        let quadrant_labels = QuadrantLabels {
            target: chosen.display.clone(),
            w2_w3: format!("{w3} {w2_noun}"),
            w3_w4: format!("{w3} {w4_noun}"),
            w4_w1: format!("{} {w4_noun}", chosen.w1),
        };
        Ok(CharacterSpace {
            w1: chosen.w1.clone(),
            w2: chosen.w2.clone(),
            w2_noun,
            w3,
            w4,
            w4_noun,
            manual_w3,
            manual_w4,
            quadrant_labels,
        })
    }
}
