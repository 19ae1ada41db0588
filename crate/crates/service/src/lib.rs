//! Command-line tool and HTTP service around the character space engine.

pub mod cli;
pub mod config;
pub mod http;
pub mod store;
