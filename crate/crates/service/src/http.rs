//! JSON-over-HTTP API under `/api/v1`.

use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{FromRequest, Path, Request, State};
use axum::http::{header, StatusCode};
use axum::middleware::{self, Next};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use csc_core::brief::{BriefError, DesignBrief};
use csc_core::engine::{
    AntonymOffer, CharacterSpace, Engine, EngineError, Notice, Operation, PhraseCandidate, PhraseGroup,
    Session, SessionState, WordCandidate,
};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::store::{SessionStore, StoreError};

#[derive(Clone)]
pub struct AppState {
    pub engine: Engine,
    pub store: Arc<SessionStore>,
    pub auth_token: Option<String>,
    pub health: Value,
}

#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub code: &'static str,
    pub message: String,
    pub detail: Value,
}

impl ApiError {
    fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        ApiError {
            status,
            code,
            message: message.into(),
            detail: Value::Null,
        }
    }

    fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "bad_request", message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = json!({ "code": self.code, "message": self.message, "detail": self.detail });
        (self.status, Json(body)).into_response()
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        match e {
            StoreError::NotFound(id) => ApiError {
                detail: json!({ "session_id": id }),
                ..ApiError::new(StatusCode::NOT_FOUND, "not_found", "session not found")
            },
            StoreError::Engine(e) => e.into(),
            other => {
                tracing::error!(error = %other, "session store failure");
                ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", other.to_string())
            }
        }
    }
}

impl From<EngineError> for ApiError {
    fn from(e: EngineError) -> Self {
        match &e {
            EngineError::InvalidTransition { op, state } => ApiError {
                detail: json!({ "operation": op, "state": state }),
                ..ApiError::new(StatusCode::CONFLICT, "invalid_transition", e.to_string())
            },
            EngineError::InvalidInput(_) | EngineError::Brief(_) => {
                ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "invalid_input", e.to_string())
            }
            EngineError::Graph(_) | EngineError::Replay { .. } => {
                tracing::error!(error = %e, "engine failure");
                ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string())
            }
        }
    }
}

/// JSON body extractor. An empty body reads as the type's default and any
/// parse failure is a structured 400.
pub struct JsonBody<T>(pub T);

impl<S, T> FromRequest<S> for JsonBody<T>
where
    S: Send + Sync,
    T: DeserializeOwned + Default,
{
    type Rejection = ApiError;

    async fn from_request(req: Request, state: &S) -> Result<Self, Self::Rejection> {
        let bytes = Bytes::from_request(req, state)
            .await
            .map_err(|e| ApiError::bad_request(e.body_text()))?;
        if bytes.iter().all(u8::is_ascii_whitespace) {
            return Ok(JsonBody(T::default()));
        }
        serde_json::from_slice(&bytes).map(JsonBody).map_err(|e| ApiError {
            detail: json!({ "line": e.line(), "column": e.column() }),
            ..ApiError::bad_request(format!("malformed JSON body: {e}"))
        })
    }
}

async fn blocking<T, F>(f: F) -> Result<T, ApiError>
where
    F: FnOnce() -> Result<T, ApiError> + Send + 'static,
    T: Send + 'static,
{
    tokio::task::spawn_blocking(f).await.map_err(|e| {
        ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", format!("worker failed: {e}"))
    })?
}

async fn apply(state: AppState, id: String, op: Operation) -> Result<(Session, Vec<Notice>), ApiError> {
    blocking(move || Ok(state.store.apply(&state.engine, &id, op)?)).await
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct CreateSession {
    brief: String,
    #[serde(default)]
    id: Option<String>,
}

#[derive(Debug, Serialize)]
struct Created {
    session_id: String,
    state: SessionState,
    query_words: Vec<String>,
    notices: Vec<Notice>,
}

async fn create_session(
    State(state): State<AppState>,
    JsonBody(body): JsonBody<CreateSession>,
) -> Result<(StatusCode, Json<Created>), ApiError> {
    let brief = DesignBrief {
        text: body.brief,
        id: body.id,
    };
    brief.validate()?;
    let (session, notices) = blocking(move || {
        Ok(state
            .store
            .create(&state.engine, Operation::StartSession { brief })?)
    })
    .await?;
    Ok((
        StatusCode::CREATED,
        Json(Created {
            session_id: session.id,
            state: session.state,
            query_words: session.query_words,
            notices,
        }),
    ))
}

async fn fetch(state: &AppState, id: &str) -> Result<Session, ApiError> {
    let (store, id) = (state.store.clone(), id.to_string());
    blocking(move || Ok(store.get(&id)?)).await
}

async fn get_session(State(state): State<AppState>, Path(id): Path<String>) -> Result<Json<Session>, ApiError> {
    Ok(Json(fetch(&state, &id).await?))
}

async fn get_events(State(state): State<AppState>, Path(id): Path<String>) -> Result<Json<Value>, ApiError> {
    let session = fetch(&state, &id).await?;
    Ok(Json(json!({ "session_id": id, "events": session.event_records() })))
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct Limit {
    #[serde(default)]
    limit: Option<usize>,
}

#[derive(Debug, Serialize)]
struct W1Offers {
    session_id: String,
    state: SessionState,
    offers: Vec<WordCandidate>,
    notices: Vec<Notice>,
}

async fn w1_offers(
    State(state): State<AppState>,
    Path(id): Path<String>,
    JsonBody(body): JsonBody<Limit>,
) -> Result<Json<W1Offers>, ApiError> {
    let (s, notices) = apply(state, id, Operation::OfferW1 { limit: body.limit }).await?;
    Ok(Json(W1Offers {
        session_id: s.id,
        state: s.state,
        offers: s.w1_offers,
        notices,
    }))
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ManualQuery {
    word: String,
}

#[derive(Debug, Serialize)]
struct ManualQueryResponse {
    session_id: String,
    state: SessionState,
    word: String,
    notices: Vec<Notice>,
    #[serde(skip_serializing_if = "Option::is_none")]
    w1_offers: Option<Vec<WordCandidate>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    phrase_offers: Option<Vec<PhraseGroup>>,
}

async fn manual_query(
    State(state): State<AppState>,
    Path(id): Path<String>,
    JsonBody(body): JsonBody<ManualQuery>,
) -> Result<Json<ManualQueryResponse>, ApiError> {
    let word = body.word.clone();
    let (s, notices) = apply(state, id, Operation::ManualQuery { word: body.word }).await?;
    let in_w1 = s.state == SessionState::W1Offered;
    Ok(Json(ManualQueryResponse {
        session_id: s.id,
        state: s.state,
        word,
        notices,
        w1_offers: in_w1.then_some(s.w1_offers.clone()),
        phrase_offers: (!in_w1).then_some(s.phrase_offers),
    }))
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct Pool {
    lemmas: Vec<String>,
}

async fn w1_pool(
    State(state): State<AppState>,
    Path(id): Path<String>,
    JsonBody(body): JsonBody<Pool>,
) -> Result<Json<Value>, ApiError> {
    let (s, _) = apply(state, id, Operation::SelectW1Pool { lemmas: body.lemmas }).await?;
    Ok(Json(json!({ "session_id": s.id, "state": s.state, "w1_pool": s.w1_pool })))
}

#[derive(Debug, Serialize)]
struct PhraseOffers {
    session_id: String,
    state: SessionState,
    groups: Vec<PhraseGroup>,
}

async fn phrase_offers(
    State(state): State<AppState>,
    Path(id): Path<String>,
    JsonBody(body): JsonBody<Limit>,
) -> Result<Json<PhraseOffers>, ApiError> {
    let (s, _) = apply(state, id, Operation::OfferPhrases { limit: body.limit }).await?;
    Ok(Json(PhraseOffers {
        session_id: s.id,
        state: s.state,
        groups: s.phrase_offers,
    }))
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct PhraseChoice {
    w1: String,
    w2: String,
}

#[derive(Debug, Serialize)]
struct PhraseChosen {
    session_id: String,
    state: SessionState,
    chosen_phrase: Option<PhraseCandidate>,
}

async fn phrase(
    State(state): State<AppState>,
    Path(id): Path<String>,
    JsonBody(body): JsonBody<PhraseChoice>,
) -> Result<Json<PhraseChosen>, ApiError> {
    let (s, _) = apply(state, id, Operation::SelectPhrase { w1: body.w1, w2: body.w2 }).await?;
    Ok(Json(PhraseChosen {
        session_id: s.id,
        state: s.state,
        chosen_phrase: s.chosen_phrase,
    }))
}

#[derive(Debug, Serialize)]
struct AntonymOffers {
    session_id: String,
    state: SessionState,
    w3_offers: Vec<AntonymOffer>,
    w4_offers: Vec<AntonymOffer>,
    manual_w3_required: bool,
    manual_w4_required: bool,
    notices: Vec<Notice>,
}

async fn antonym_offers(State(state): State<AppState>, Path(id): Path<String>) -> Result<Json<AntonymOffers>, ApiError> {
    let (s, notices) = apply(state, id, Operation::OfferAntonyms {}).await?;
    Ok(Json(AntonymOffers {
        session_id: s.id,
        state: s.state,
        manual_w3_required: s.w3_offers.is_empty(),
        manual_w4_required: s.w4_offers.is_empty(),
        w3_offers: s.w3_offers,
        w4_offers: s.w4_offers,
        notices,
    }))
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct Complete {
    w3: String,
    w4: String,
    #[serde(default)]
    manual_w3: bool,
    #[serde(default)]
    manual_w4: bool,
}

#[derive(Debug, Serialize)]
struct Completed {
    session_id: String,
    state: SessionState,
    character_space: Option<CharacterSpace>,
    explanation: Option<String>,
}

async fn complete(
    State(state): State<AppState>,
    Path(id): Path<String>,
    JsonBody(body): JsonBody<Complete>,
) -> Result<Json<Completed>, ApiError> {
    let op = Operation::Complete {
        w3: body.w3,
        w4: body.w4,
        manual_w3: body.manual_w3,
        manual_w4: body.manual_w4,
    };
    let (s, _) = apply(state, id, op).await?;
    Ok(Json(Completed {
        session_id: s.id.clone(),
        state: s.state,
        explanation: s.explanation(),
        character_space: s.character_space,
    }))
}

async fn explanation(State(state): State<AppState>, Path(id): Path<String>) -> Result<Json<Value>, ApiError> {
    let s = fetch(&state, &id).await?;
    match s.explanation() {
        Some(text) => Ok(Json(json!({ "session_id": s.id, "text": text }))),
        None => Err(ApiError {
            detail: json!({ "state": s.state }),
            ..ApiError::new(
                StatusCode::CONFLICT,
                "invalid_transition",
                "the character space is not complete yet",
            )
        }),
    }
}

async fn healthz(State(state): State<AppState>) -> Json<Value> {
    Json(state.health.clone())
}

async fn require_token(State(state): State<AppState>, req: Request, next: Next) -> Response {
    if let Some(token) = &state.auth_token {
        let given = req
            .headers()
            .get(header::AUTHORIZATION)
            .and_then(|v| v.to_str().ok())
            .and_then(|v| v.strip_prefix("Bearer "));
        if given != Some(token.as_str()) {
            return ApiError::new(StatusCode::UNAUTHORIZED, "unauthorized", "missing or wrong bearer token")
                .into_response();
        }
    }
    next.run(req).await
}

async fn fallback() -> ApiError {
    ApiError::new(StatusCode::NOT_FOUND, "not_found", "no such endpoint")
}

pub fn router(state: AppState) -> Router {
    let api = Router::new()
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/events", get(get_events))
        .route("/sessions/{id}/w1-offers", post(w1_offers))
        .route("/sessions/{id}/manual-query", post(manual_query))
        .route("/sessions/{id}/w1-pool", post(w1_pool))
        .route("/sessions/{id}/phrase-offers", post(phrase_offers))
        .route("/sessions/{id}/phrase", post(phrase))
        .route("/sessions/{id}/antonym-offers", post(antonym_offers))
        .route("/sessions/{id}/complete", post(complete))
        .route("/sessions/{id}/explanation", get(explanation))
        .route_layer(middleware::from_fn_with_state(state.clone(), require_token));
    Router::new()
        .nest("/api/v1", api)
        .route("/healthz", get(healthz))
        .fallback(fallback)
        .with_state(state)
}

impl From<BriefError> for ApiError {
    fn from(e: BriefError) -> Self {
        EngineError::Brief(e).into()
    }
}
