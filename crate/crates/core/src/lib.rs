//! Turns a design brief into a character space: a four-pole
//! quadrant of adjectives with a template explanation.
//!
//! Data sources are an [`embedding::EmbeddingIndex`] and a
//! [`graph::ConceptGraph`]; [`scoring`] ranks words and pairs;
//! [`engine`] runs the session state machine.

pub mod assets;
pub mod brief;
pub mod embedding;
pub mod engine;
pub mod graph;
pub mod morphology;
pub mod policy;
pub mod scoring;
