//! Build a named-entity corpus from Wikipedia wikilinks and evaluate it with
//! character n-gram classifiers.

pub mod ingest;
pub mod candidates;
pub mod corpus;
pub(crate) mod fsutil;
pub mod annotation;
pub mod eval;
pub mod project;
