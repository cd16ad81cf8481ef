//! Semantic dependency parsing for unordered sequences of concept tokens.
//!
//! A [`Lexicon`](lexicon::Lexicon) describes concepts by intrinsic features,
//! selectional expectations grouped by case, declared oppositions and a
//! multiple-inheritance graph. [`compat`] scores how well a candidate's
//! features fit a predicate's expectations, and [`parser`] assembles the
//! dependency forest with the highest total distance-weighted score.

pub mod compat;
pub mod fixtures;
pub mod lexicon;
pub mod parser;

pub use compat::{
    explain_feature, explain_set, match_feature, set_compatibility, ChartStats, Decomposition, FeatureMatchResult,
    MatchCase, MatchOptions, MatchTrace, ScoreChart,
};
pub use lexicon::{
    parse_lexicon, AttributeId, CaseFrame, CaseId, ConceptEntry, ExtrinsicFeature, Feature, Lexicon, LexiconBuilder,
    LexiconError, DUMMY_SYMBOL,
};
pub use parser::{
    analyze, analyze_with_chart, brute_force_analyze, distance_weight, predicate_slots, rescore, score_slot,
    Analysis, Edge, InputSequence, Interpretation, ParseConfig, ParseError, PredicateSlot,
};
