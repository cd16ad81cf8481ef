//! Command-line front end: parsing, score explanation, lexicon validation,
//! gold-corpus evaluation and scaling benchmarks.

pub mod app;
pub mod bench;
pub mod corpus;
