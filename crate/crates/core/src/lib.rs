//! Cultural commonsense knowledge extraction engine.
//!
//! Web sentences flow through six stages: subject detection, generic
//! filtering, facet classification, clustering with summarization, concept
//! extraction and ranking. Model-backed steps go through the traits in
//! [`providers`], with deterministic reference implementations for offline
//! use.

pub mod catalog;
pub mod checkpoint;
pub mod cluster;
pub mod concepts;
pub mod config;
pub mod detect;
pub mod facetclf;
pub mod genfilter;
pub mod inflect;
pub mod ingest;
pub mod kbstore;
pub mod pipeline;
pub mod providers;
pub mod rank;
pub mod text;
