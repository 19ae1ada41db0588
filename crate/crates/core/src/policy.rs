//! Non-interactive session driver that always takes the top-ranked option.
//!
//! Pool: the first five w1 offers (or all, when fewer). Phrase: the best
//! across every group by (score desc, similarity desc, pool position, w2).
//! Antonyms: the first offer for each axis that differs from the poles
//! already placed.

use thiserror::Error;

use crate::brief::DesignBrief;
use crate::engine::{Engine, EngineError, Operation, PhraseCandidate, Session, SessionState, MAX_POOL};

#[derive(Debug, Error)]
pub enum PolicyError {
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("session stalled in state {state}: {reason}")]
    Stalled { state: SessionState, reason: String },
}

fn stalled(session: &Session, reason: &str) -> PolicyError {
    PolicyError::Stalled {
        state: session.state,
        reason: reason.to_string(),
    }
}

/// The phrase the policy picks from the current offers.
pub fn best_phrase(session: &Session) -> Option<&PhraseCandidate> {
    let rank = |w1: &str| session.w1_pool.iter().position(|p| p == w1).unwrap_or(usize::MAX);
    session.all_phrases().min_by(|a, b| {
        b.score
            .total_cmp(&a.score)
            .then_with(|| b.similarity.total_cmp(&a.similarity))
            .then_with(|| rank(&a.w1).cmp(&rank(&b.w1)))
            .then_with(|| a.w2.cmp(&b.w2))
    })
}

/// Drives `session` from `BriefSubmitted` to `Completed`.
pub fn complete_top1(engine: &Engine, session: &mut Session) -> Result<(), PolicyError> {
    engine.apply(session, Operation::OfferW1 { limit: None })?;
    let pool: Vec<String> = session
        .w1_offers
        .iter()
        .take(MAX_POOL)
        .map(|c| c.lemma.clone())
        .collect();
    if pool.is_empty() {
        return Err(stalled(session, "no w1 candidates"));
    }
    engine.apply(session, Operation::SelectW1Pool { lemmas: pool })?;
    engine.apply(session, Operation::OfferPhrases { limit: None })?;
    let (w1, w2) = best_phrase(session)
        .map(|p| (p.w1.clone(), p.w2.clone()))
        .ok_or_else(|| stalled(session, "no phrase passed the gate"))?;
    engine.apply(session, Operation::SelectPhrase { w1: w1.clone(), w2: w2.clone() })?;
    engine.apply(session, Operation::OfferAntonyms {})?;
    let w3 = session
        .w3_offers
        .iter()
        .map(|o| &o.lemma)
        .find(|l| **l != w1 && **l != w2)
        .cloned()
        .ok_or_else(|| stalled(session, "no antonym for w1"))?;
    let w4 = session
        .w4_offers
        .iter()
        .map(|o| &o.lemma)
        .find(|l| **l != w1 && **l != w2 && **l != w3)
        .cloned()
        .ok_or_else(|| stalled(session, "no antonym for w2"))?;
    engine.apply(
        session,
        Operation::Complete {
            w3,
            w4,
            manual_w3: false,
            manual_w4: false,
        },
    )?;
    Ok(())
}

/// Starts a session on `brief` and completes it with the top-ranked policy.
pub fn run_top1(engine: &Engine, brief: DesignBrief) -> Result<Session, PolicyError> {
    let mut session = engine.start_session(brief)?;
    complete_top1(engine, &mut session)?;
    Ok(session)
}
