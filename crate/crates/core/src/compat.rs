//! Feature matching and asymmetric set compatibility.
//!
//! The matching function compares one intrinsic (filtered) feature with one
//! expected (filtering) feature:
//!
//! 1. same attribute: `v1 * v2`
//! 2. `a1` is a subtype of `a2`: `0` if `v1 < 0`, else `v1 * v2`
//! 3. `a1` contradicts `a2`: `0` if `v1 < 0`, else `-v1 * v2`
//! 4. otherwise `0` when `a2` is primitive, else the set compatibility of
//!    `{<a1, v1>}` against the decomposition of `a2` plus a dummy feature,
//!    all carrying `v2`.
//!
//! Every branch is `v1 * v2` times a coefficient that depends only on the
//! attribute pair and the sign of `v1`. The chart memoizes those per-sign
//! coefficients, so chart-enabled and chart-disabled evaluation perform the
//! same arithmetic and agree bit for bit.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::lexicon::{AttributeId, CaseId, Feature, Lexicon, LexiconError};

/// How case 4 breaks up a non-primitive expectation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Decomposition {
    /// Direct parents only; each inheritance level attenuates the score.
    #[default]
    DirectParents,
    /// Every feature implied by the expectation.
    FullClosure,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct MatchOptions {
    pub decomposition: Decomposition,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MatchCase {
    Equal,
    Subtype,
    Contradiction,
    Decomposed,
    PrimitiveMiss,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceFeature {
    pub attribute: String,
    pub value: f64,
}

/// Recursive explanation of one feature match, serializable as a JSON tree.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatchTrace {
    pub filtered: TraceFeature,
    pub filtering: TraceFeature,
    pub case_used: MatchCase,
    pub score: f64,
    pub children: Vec<MatchTrace>,
}

impl MatchTrace {
    pub fn depth(&self) -> usize {
        self.children
            .iter()
            .map(|c| c.depth() + 1)
            .max()
            .unwrap_or(0)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FeatureMatchResult {
    pub score: f64,
    pub case_used: MatchCase,
    /// Number of nested decompositions below this match.
    pub depth: usize,
    pub trace: Option<MatchTrace>,
}

/// Set compatibility together with one trace per (filtering, filtered) term.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SetExplanation {
    pub score: f64,
    pub denominator: usize,
    pub terms: Vec<MatchTrace>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct Coefficients {
    positive: f64,
    negative: f64,
    case: MatchCase,
    depth: usize,
}

impl Coefficients {
    fn scale(&self, v1: f64, v2: f64) -> f64 {
        let k = if v1 >= 0.0 { self.positive } else { self.negative };
        v1 * v2 * k
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChartStats {
    /// Attribute-pair matches requested, including chart hits.
    pub feature_requests: u64,
    /// Attribute-pair matches actually evaluated.
    pub feature_evaluations: u64,
    /// (predicate, case, candidate) scores requested.
    pub pair_requests: u64,
    /// (predicate, case, candidate) scores actually computed.
    pub pair_evaluations: u64,
    /// Deepest nesting of the decomposition recursion seen so far.
    pub max_recursion_depth: usize,
}

impl ChartStats {
    pub fn merge(&mut self, other: &ChartStats) {
        self.feature_requests += other.feature_requests;
        self.feature_evaluations += other.feature_evaluations;
        self.pair_requests += other.pair_requests;
        self.pair_evaluations += other.pair_evaluations;
        self.max_recursion_depth = self.max_recursion_depth.max(other.max_recursion_depth);
    }
}

/// Memo table of intermediate compatibility results. Confined to one
/// caller; a chart must only be used with the lexicon it was filled from.
#[derive(Clone, Debug, Default)]
pub struct ScoreChart {
    enabled: bool,
    options: MatchOptions,
    features: HashMap<(AttributeId, AttributeId), Coefficients>,
    pairs: HashMap<(AttributeId, CaseId, AttributeId), f64>,
    stats: ChartStats,
}

impl ScoreChart {
    pub fn new() -> Self {
        Self::with_options(MatchOptions::default())
    }

    pub fn with_options(options: MatchOptions) -> Self {
        ScoreChart {
            enabled: true,
            options,
            ..Default::default()
        }
    }

    /// A chart that stores nothing: every request is evaluated afresh.
    pub fn disabled(options: MatchOptions) -> Self {
        ScoreChart {
            enabled: false,
            options,
            ..Default::default()
        }
    }

    pub fn is_enabled(&self) -> bool {
        self.enabled
    }

    pub fn options(&self) -> MatchOptions {
        self.options
    }

    pub fn stats(&self) -> ChartStats {
        self.stats
    }

    pub fn reset_stats(&mut self) {
        self.stats = ChartStats::default();
    }

    fn coefficients(&mut self, lex: &Lexicon, a1: AttributeId, a2: AttributeId, level: usize) -> Coefficients {
        self.stats.feature_requests += 1;
        self.stats.max_recursion_depth = self.stats.max_recursion_depth.max(level);
        if self.enabled {
            if let Some(c) = self.features.get(&(a1, a2)) {
                return *c;
            }
        }
        self.stats.feature_evaluations += 1;

        let c = if a1 == a2 {
            Coefficients { positive: 1.0, negative: 1.0, case: MatchCase::Equal, depth: 0 }
        } else if lex.implies(a1, a2) {
            Coefficients { positive: 1.0, negative: 0.0, case: MatchCase::Subtype, depth: 0 }
        } else if lex.contradicts(a1, a2) {
            Coefficients { positive: -1.0, negative: 0.0, case: MatchCase::Contradiction, depth: 0 }
        } else if lex.is_primitive(a2) {
            Coefficients { positive: 0.0, negative: 0.0, case: MatchCase::PrimitiveMiss, depth: 0 }
        } else {
            let parts = self.decomposition(lex, a2);
            let n = (parts.len() + 1) as f64;
            let (mut pos, mut neg, mut depth) = (0.0, 0.0, 0);
            for p in parts.into_iter().chain(std::iter::once(lex.dummy())) {
                let child = self.coefficients(lex, a1, p, level + 1);
                pos += child.positive;
                neg += child.negative;
                depth = depth.max(child.depth + 1);
            }
            Coefficients { positive: pos / n, negative: neg / n, case: MatchCase::Decomposed, depth }
        };

        if self.enabled {
            self.features.insert((a1, a2), c);
        }
        c
    }

    fn decomposition(&self, lex: &Lexicon, a: AttributeId) -> Vec<AttributeId> {
        match self.options.decomposition {
            Decomposition::DirectParents => lex.parents(a).to_vec(),
            Decomposition::FullClosure => lex.ancestors(a).to_vec(),
        }
    }

    /// Unweighted compatibility of `candidate` with the expectations of
    /// `predicate` on `case`, memoized by (predicate, case, candidate).
    pub fn pair_score(
        &mut self,
        lex: &Lexicon,
        predicate: AttributeId,
        case: CaseId,
        expectations: &[Feature],
        candidate: AttributeId,
    ) -> f64 {
        self.stats.pair_requests += 1;
        if self.enabled {
            if let Some(&s) = self.pairs.get(&(predicate, case, candidate)) {
                return s;
            }
        }
        self.stats.pair_evaluations += 1;
        let intrinsic = lex.effective_intrinsic(candidate);
        let s = self.compatibility(lex, &intrinsic, expectations);
        if self.enabled {
            self.pairs.insert((predicate, case, candidate), s);
        }
        s
    }

    fn compatibility(&mut self, lex: &Lexicon, filtered: &[Feature], filtering: &[Feature]) -> f64 {
        if filtering.is_empty() {
            return 0.0;
        }
        let mut sum = 0.0;
        for sf in filtering {
            for f in filtered {
                sum += self.coefficients(lex, f.attribute, sf.attribute, 0).scale(f.value, sf.value);
            }
        }
        sum / filtering.len() as f64
    }

    fn trace(&mut self, lex: &Lexicon, filtered: Feature, filtering: Feature, level: usize) -> MatchTrace {
        let c = self.coefficients(lex, filtered.attribute, filtering.attribute, level);
        let children = if c.case == MatchCase::Decomposed {
            self.decomposition(lex, filtering.attribute)
                .into_iter()
                .chain(std::iter::once(lex.dummy()))
                .map(|p| self.trace(lex, filtered, Feature::new(p, filtering.value), level + 1))
                .collect()
        } else {
            Vec::new()
        };
        MatchTrace {
            filtered: trace_feature(lex, filtered),
            filtering: trace_feature(lex, filtering),
            case_used: c.case,
            score: c.scale(filtered.value, filtering.value),
            children,
        }
    }
}

fn trace_feature(lex: &Lexicon, f: Feature) -> TraceFeature {
    TraceFeature {
        attribute: lex.name(f.attribute).to_string(),
        value: f.value,
    }
}

fn check(lex: &Lexicon, f: &Feature) -> Result<(), LexiconError> {
    if f.attribute.index() < lex.len() {
        Ok(())
    } else {
        Err(LexiconError::Unknown(format!("#{}", f.attribute.index())))
    }
}

/// The feature-level matching function.
pub fn match_feature(
    lex: &Lexicon,
    chart: &mut ScoreChart,
    filtered: Feature,
    filtering: Feature,
) -> Result<FeatureMatchResult, LexiconError> {
    check(lex, &filtered)?;
    check(lex, &filtering)?;
    let c = chart.coefficients(lex, filtered.attribute, filtering.attribute, 0);
    Ok(FeatureMatchResult {
        score: c.scale(filtered.value, filtering.value),
        case_used: c.case,
        depth: c.depth,
        trace: None,
    })
}

/// Like [`match_feature`], with the full recursive trace attached.
pub fn explain_feature(
    lex: &Lexicon,
    chart: &mut ScoreChart,
    filtered: Feature,
    filtering: Feature,
) -> Result<FeatureMatchResult, LexiconError> {
    let mut result = match_feature(lex, chart, filtered, filtering)?;
    result.trace = Some(chart.trace(lex, filtered, filtering, 0));
    Ok(result)
}

/// Compatibility of a filtered set against a filtering set: the sum of all
/// pairwise matches divided by the size of the filtering set. Zero when the
/// filtering set is empty.
pub fn set_compatibility(
    lex: &Lexicon,
    chart: &mut ScoreChart,
    filtered: &[Feature],
    filtering: &[Feature],
) -> Result<f64, LexiconError> {
    for f in filtered.iter().chain(filtering) {
        check(lex, f)?;
    }
    Ok(chart.compatibility(lex, filtered, filtering))
}

pub fn explain_set(
    lex: &Lexicon,
    chart: &mut ScoreChart,
    filtered: &[Feature],
    filtering: &[Feature],
) -> Result<SetExplanation, LexiconError> {
    let score = set_compatibility(lex, chart, filtered, filtering)?;
    let mut terms = Vec::with_capacity(filtered.len() * filtering.len());
    for sf in filtering {
        for f in filtered {
            terms.push(chart.trace(lex, *f, *sf, 0));
        }
    }
    Ok(SetExplanation {
        score,
        denominator: filtering.len(),
        terms,
    })
}
