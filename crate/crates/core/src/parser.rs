//! Best-compatibility dependency analysis of concept sequences.
//!
//! Every predicative token opens one slot per case of its frame. A slot can
//! take at most one dependent, each token has at most one governor, and the
//! resulting edges must form a forest. Only edges with a strictly positive
//! weighted score are admitted; the analysis returns the admissible
//! assignments with the largest total score.

use std::cmp::Ordering;

use thiserror::Error;

use crate::compat::{ChartStats, MatchOptions, ScoreChart};
use crate::lexicon::{AttributeId, CaseId, Feature, Lexicon, LexiconError};

pub mod export;

pub const DEFAULT_GAMMA: f64 = 0.9;
pub const DEFAULT_MAX_LEN: usize = 32;
pub const DEFAULT_MAX_EXACT_N: usize = 12;
pub const DEFAULT_BEAM_WIDTH: usize = 64;
/// Longest sequence the exhaustive enumerator accepts.
pub const BRUTE_FORCE_MAX_N: usize = 8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("unknown token `{0}`")]
    UnknownToken(String),
    #[error("empty input sequence")]
    EmptySequence,
    #[error("sequence of {len} tokens exceeds the maximum of {max}")]
    TooLong { len: usize, max: usize },
    #[error("top-k must be at least 1")]
    InvalidTopK,
    #[error("gamma must lie in (0, 1], got {0}")]
    InvalidGamma(f64),
    #[error("head and dependent share position {0}")]
    SamePosition(usize),
    #[error("position {0} is outside the sequence")]
    PositionOutOfRange(usize),
    #[error("exhaustive enumeration is limited to {max} tokens, got {len}")]
    TooLongForBruteForce { len: usize, max: usize },
    #[error(transparent)]
    Lexicon(#[from] LexiconError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParseConfig {
    /// Distance decay: an edge spanning `d` positions is weighted `gamma^(d-1)`.
    pub gamma: f64,
    pub top_k: usize,
    /// Sequences up to this length are searched exactly, longer ones with a beam.
    pub max_exact_n: usize,
    pub max_len: usize,
    pub beam_width: usize,
    pub match_options: MatchOptions,
}

impl Default for ParseConfig {
    fn default() -> Self {
        ParseConfig {
            gamma: DEFAULT_GAMMA,
            top_k: 1,
            max_exact_n: DEFAULT_MAX_EXACT_N,
            max_len: DEFAULT_MAX_LEN,
            beam_width: DEFAULT_BEAM_WIDTH,
            match_options: MatchOptions::default(),
        }
    }
}

impl ParseConfig {
    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self
    }

    pub fn with_top_k(mut self, k: usize) -> Self {
        self.top_k = k;
        self
    }

    fn validate(&self) -> Result<(), ParseError> {
        if self.top_k < 1 {
            return Err(ParseError::InvalidTopK);
        }
        check_gamma(self.gamma)
    }
}

fn check_gamma(gamma: f64) -> Result<(), ParseError> {
    if gamma > 0.0 && gamma <= 1.0 {
        Ok(())
    } else {
        Err(ParseError::InvalidGamma(gamma))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InputSequence {
    tokens: Vec<AttributeId>,
}

impl InputSequence {
    pub fn new(lex: &Lexicon, tokens: Vec<AttributeId>) -> Result<Self, ParseError> {
        for &t in &tokens {
            if t.index() >= lex.len() {
                return Err(ParseError::UnknownToken(format!("#{}", t.index())));
            }
            if t == lex.dummy() {
                return Err(ParseError::UnknownToken(lex.name(t).to_string()));
            }
        }
        if tokens.is_empty() {
            return Err(ParseError::EmptySequence);
        }
        Ok(InputSequence { tokens })
    }

    pub fn from_names<S: AsRef<str>>(lex: &Lexicon, names: &[S]) -> Result<Self, ParseError> {
        let tokens = names
            .iter()
            .map(|n| {
                let n = n.as_ref();
                lex.id(n).map_err(|_| ParseError::UnknownToken(n.to_string()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(lex, tokens)
    }

    pub fn tokens(&self) -> &[AttributeId] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn names<'a>(&self, lex: &'a Lexicon) -> Vec<&'a str> {
        self.tokens.iter().map(|&t| lex.name(t)).collect()
    }
}

/// One case of one predicative token in the sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct PredicateSlot {
    pub head_pos: usize,
    pub case: CaseId,
    pub expectations: Vec<Feature>,
}

/// `(head, case, dependent)`: an edge without its score.
pub type EdgeKey = (usize, CaseId, usize);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub head: usize,
    pub case: CaseId,
    pub dependent: usize,
    pub score: f64,
}

impl Edge {
    fn key(&self) -> (usize, CaseId, usize) {
        (self.head, self.case, self.dependent)
    }
}

/// A scored dependency graph over sequence positions. Edges are kept in
/// (head, case) order.
#[derive(Debug, Clone, PartialEq)]
pub struct Interpretation {
    pub edges: Vec<Edge>,
    pub total_score: f64,
}

impl Interpretation {
    pub fn from_edges(mut edges: Vec<Edge>) -> Self {
        edges.sort_by_key(Edge::key);
        let total_score = sum_scores(&edges);
        Interpretation { edges, total_score }
    }

    pub fn empty() -> Self {
        Interpretation {
            edges: Vec::new(),
            total_score: 0.0,
        }
    }

    pub fn edge_keys(&self) -> Vec<(usize, CaseId, usize)> {
        self.edges.iter().map(Edge::key).collect()
    }

    /// Checks slot uniqueness, single governors, distinct endpoints and
    /// acyclicity for a sequence of `n` tokens.
    pub fn validate(&self, n: usize) -> Result<(), StructureError> {
        check_structure(n, &self.edge_keys())
    }
}

fn sum_scores(edges: &[Edge]) -> f64 {
    edges.iter().fold(0.0, |acc, e| acc + e.score)
}

/// Deterministic ranking: higher total first, then fewer edges, then the
/// lexicographically smaller edge list.
pub fn rank_order(a: &Interpretation, b: &Interpretation) -> Ordering {
    b.total_score
        .total_cmp(&a.total_score)
        .then(a.edges.len().cmp(&b.edges.len()))
        .then_with(|| a.edge_keys().cmp(&b.edge_keys()))
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StructureError {
    #[error("position {0} is outside the sequence")]
    OutOfRange(usize),
    #[error("position {0} governs itself")]
    SelfLoop(usize),
    #[error("slot ({head}, case #{case}) is filled twice")]
    DuplicateSlot { head: usize, case: usize },
    #[error("position {0} has more than one governor")]
    MultipleGovernors(usize),
    #[error("edges form a cycle through position {0}")]
    Cycle(usize),
}

pub fn check_structure(n: usize, edges: &[(usize, CaseId, usize)]) -> Result<(), StructureError> {
    let mut governor: Vec<Option<usize>> = vec![None; n];
    let mut slots = std::collections::HashSet::new();
    for &(h, c, d) in edges {
        if h >= n {
            return Err(StructureError::OutOfRange(h));
        }
        if d >= n {
            return Err(StructureError::OutOfRange(d));
        }
        if h == d {
            return Err(StructureError::SelfLoop(h));
        }
        if !slots.insert((h, c)) {
            return Err(StructureError::DuplicateSlot { head: h, case: c.index() });
        }
        if governor[d].replace(h).is_some() {
            return Err(StructureError::MultipleGovernors(d));
        }
    }
    for start in 0..n {
        let mut x = start;
        let mut steps = 0;
        while let Some(g) = governor[x] {
            x = g;
            steps += 1;
            if steps > n {
                return Err(StructureError::Cycle(start));
            }
        }
    }
    Ok(())
}

/// Ranked interpretations of one sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct Analysis {
    pub interpretations: Vec<Interpretation>,
    /// False when the beam fallback was used.
    pub exact: bool,
    pub slots: usize,
    pub stats: ChartStats,
}

impl Analysis {
    pub fn best(&self) -> &Interpretation {
        &self.interpretations[0]
    }
}

/// Weight of an edge spanning `|head - dep|` positions: `gamma^(d-1)`.
pub fn distance_weight(head_pos: usize, dep_pos: usize, gamma: f64) -> Result<f64, ParseError> {
    if head_pos == dep_pos {
        return Err(ParseError::SamePosition(head_pos));
    }
    check_gamma(gamma)?;
    let d = head_pos.abs_diff(dep_pos);
    Ok(gamma.powi((d - 1) as i32))
}

/// All slots opened by the predicative tokens, in (position, case) order.
pub fn predicate_slots(lex: &Lexicon, seq: &InputSequence) -> Vec<PredicateSlot> {
    let mut slots = Vec::new();
    for (pos, &tok) in seq.tokens().iter().enumerate() {
        for (case, expectations) in lex.case_frame(tok) {
            if !expectations.is_empty() {
                slots.push(PredicateSlot {
                    head_pos: pos,
                    case,
                    expectations,
                });
            }
        }
    }
    slots
}

/// Distance-weighted compatibility of the token at `cand_pos` with a slot.
/// The unweighted score is memoized in the chart by (head token, case,
/// candidate token).
pub fn score_slot(
    lex: &Lexicon,
    chart: &mut ScoreChart,
    seq: &InputSequence,
    slot: &PredicateSlot,
    cand_pos: usize,
    gamma: f64,
) -> Result<f64, ParseError> {
    let n = seq.len();
    if slot.head_pos >= n {
        return Err(ParseError::PositionOutOfRange(slot.head_pos));
    }
    if cand_pos >= n {
        return Err(ParseError::PositionOutOfRange(cand_pos));
    }
    let weight = distance_weight(slot.head_pos, cand_pos, gamma)?;
    let head = seq.tokens()[slot.head_pos];
    let cand = seq.tokens()[cand_pos];
    let unweighted = chart.pair_score(lex, head, slot.case, &slot.expectations, cand);
    Ok(weight * unweighted)
}

/// Admissible (positive) options of every slot, best first.
struct SlotTable {
    slots: Vec<PredicateSlot>,
    options: Vec<Vec<(usize, f64)>>,
    // sum of the best option of slots s.. (upper bound on what remains)
    suffix_bound: Vec<f64>,
}

impl SlotTable {
    fn build(lex: &Lexicon, chart: &mut ScoreChart, seq: &InputSequence, gamma: f64) -> Result<Self, ParseError> {
        let slots = predicate_slots(lex, seq);
        let mut options = Vec::with_capacity(slots.len());
        for slot in &slots {
            let mut opts = Vec::new();
            for pos in 0..seq.len() {
                if pos == slot.head_pos {
                    continue;
                }
                let s = score_slot(lex, chart, seq, slot, pos, gamma)?;
                if s > 0.0 {
                    opts.push((pos, s));
                }
            }
            opts.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
            options.push(opts);
        }
        let mut suffix_bound = vec![0.0; slots.len() + 1];
        for s in (0..slots.len()).rev() {
            let best = options[s].first().map_or(0.0, |o| o.1);
            suffix_bound[s] = suffix_bound[s + 1] + best;
        }
        Ok(SlotTable {
            slots,
            options,
            suffix_bound,
        })
    }

    fn edge(&self, s: usize, dep: usize, score: f64) -> Edge {
        Edge {
            head: self.slots[s].head_pos,
            case: self.slots[s].case,
            dependent: dep,
            score,
        }
    }
}

/// Partial assignment shared by the search strategies.
#[derive(Clone)]
struct Partial {
    edges: Vec<Edge>,
    governor: Vec<Option<usize>>,
    score: f64,
}

impl Partial {
    fn new(n: usize) -> Self {
        Partial {
            edges: Vec::new(),
            governor: vec![None; n],
            score: 0.0,
        }
    }

    fn can_attach(&self, head: usize, dep: usize) -> bool {
        if self.governor[dep].is_some() {
            return false;
        }
        // attaching head -> dep closes a cycle iff dep already governs head
        let mut x = head;
        loop {
            if x == dep {
                return false;
            }
            match self.governor[x] {
                Some(g) => x = g,
                None => return true,
            }
        }
    }

    fn push(&mut self, e: Edge) {
        self.governor[e.dependent] = Some(e.head);
        self.score += e.score;
        self.edges.push(e);
    }

    fn pop(&mut self) {
        let e = self.edges.pop().unwrap();
        self.governor[e.dependent] = None;
        // recompute rather than subtract so the sum stays order-canonical
        self.score = sum_scores(&self.edges);
    }

    fn finish(&self) -> Interpretation {
        // edges are pushed in slot order, which is canonical edge order
        Interpretation {
            edges: self.edges.clone(),
            total_score: sum_scores(&self.edges),
        }
    }
}

/// Keeps the best `k` interpretations in rank order.
struct TopK {
    k: usize,
    items: Vec<Interpretation>,
}

impl TopK {
    fn new(k: usize) -> Self {
        TopK { k, items: Vec::new() }
    }

    fn threshold(&self) -> Option<f64> {
        (self.items.len() == self.k).then(|| self.items[self.k - 1].total_score)
    }

    fn offer(&mut self, cand: Interpretation) {
        let at = self
            .items
            .binary_search_by(|x| rank_order(x, &cand))
            .unwrap_or_else(|i| i);
        if at < self.k {
            self.items.insert(at, cand);
            self.items.truncate(self.k);
        }
    }
}

// Slack for comparing a bound assembled in a different order than the
// canonical total.
const BOUND_SLACK: f64 = 1e-9;

fn branch_and_bound(table: &SlotTable, s: usize, partial: &mut Partial, best: &mut TopK) {
    if let Some(t) = best.threshold() {
        let bound = partial.score + table.suffix_bound[s];
        if bound < t - BOUND_SLACK * (1.0 + t.abs()) {
            return;
        }
    }
    if s == table.slots.len() {
        best.offer(partial.finish());
        return;
    }
    let head = table.slots[s].head_pos;
    for &(dep, score) in &table.options[s] {
        if partial.can_attach(head, dep) {
            partial.push(table.edge(s, dep, score));
            branch_and_bound(table, s + 1, partial, best);
            partial.pop();
        }
    }
    branch_and_bound(table, s + 1, partial, best);
}

fn beam_search(table: &SlotTable, n: usize, width: usize, k: usize) -> Vec<Interpretation> {
    let mut beam = vec![Partial::new(n)];
    for s in 0..table.slots.len() {
        let head = table.slots[s].head_pos;
        let mut next = Vec::with_capacity(beam.len() * (table.options[s].len() + 1));
        for state in &beam {
            for &(dep, score) in &table.options[s] {
                if state.can_attach(head, dep) {
                    let mut grown = state.clone();
                    grown.push(table.edge(s, dep, score));
                    next.push(grown);
                }
            }
            next.push(state.clone());
        }
        next.sort_by(|a, b| rank_order(&a.finish(), &b.finish()));
        next.truncate(width.max(k));
        beam = next;
    }
    let mut out: Vec<Interpretation> = beam.iter().map(Partial::finish).collect();
    out.sort_by(rank_order);
    out.truncate(k);
    out
}

/// Top-k interpretations of a sequence.
pub fn analyze(lex: &Lexicon, seq: &InputSequence, config: &ParseConfig) -> Result<Analysis, ParseError> {
    let mut chart = ScoreChart::with_options(config.match_options);
    analyze_with_chart(lex, seq, config, &mut chart)
}

/// [`analyze`] with a caller-supplied chart, e.g. a disabled one or one
/// shared across calls on the same lexicon.
pub fn analyze_with_chart(
    lex: &Lexicon,
    seq: &InputSequence,
    config: &ParseConfig,
    chart: &mut ScoreChart,
) -> Result<Analysis, ParseError> {
    config.validate()?;
    let n = seq.len();
    if n > config.max_len {
        return Err(ParseError::TooLong { len: n, max: config.max_len });
    }
    let before = chart.stats();
    let table = SlotTable::build(lex, chart, seq, config.gamma)?;
    let exact = n <= config.max_exact_n;
    let interpretations = if exact {
        let mut best = TopK::new(config.top_k);
        branch_and_bound(&table, 0, &mut Partial::new(n), &mut best);
        best.items
    } else {
        beam_search(&table, n, config.beam_width, config.top_k)
    };
    let after = chart.stats();
    Ok(Analysis {
        interpretations,
        exact,
        slots: table.slots.len(),
        stats: ChartStats {
            feature_requests: after.feature_requests - before.feature_requests,
            feature_evaluations: after.feature_evaluations - before.feature_evaluations,
            pair_requests: after.pair_requests - before.pair_requests,
            pair_evaluations: after.pair_evaluations - before.pair_evaluations,
            max_recursion_depth: after.max_recursion_depth,
        },
    })
}

/// Every admissible interpretation, fully ranked. Exponential; meant as a
/// reference for testing the optimizer on short sequences.
pub fn brute_force_analyze(
    lex: &Lexicon,
    seq: &InputSequence,
    config: &ParseConfig,
) -> Result<Vec<Interpretation>, ParseError> {
    check_gamma(config.gamma)?;
    if seq.len() > BRUTE_FORCE_MAX_N {
        return Err(ParseError::TooLongForBruteForce {
            len: seq.len(),
            max: BRUTE_FORCE_MAX_N,
        });
    }
    let mut chart = ScoreChart::disabled(config.match_options);
    let table = SlotTable::build(lex, &mut chart, seq, config.gamma)?;
    let mut all = Vec::new();
    enumerate(&table, 0, &mut Partial::new(seq.len()), &mut all);
    all.sort_by(rank_order);
    Ok(all)
}

fn enumerate(table: &SlotTable, s: usize, partial: &mut Partial, out: &mut Vec<Interpretation>) {
    if s == table.slots.len() {
        out.push(partial.finish());
        return;
    }
    let head = table.slots[s].head_pos;
    for &(dep, score) in &table.options[s] {
        if partial.can_attach(head, dep) {
            partial.push(table.edge(s, dep, score));
            enumerate(table, s + 1, partial, out);
            partial.pop();
        }
    }
    enumerate(table, s + 1, partial, out);
}

/// Recomputes each edge score from scratch with a fresh chart.
pub fn rescore(
    lex: &Lexicon,
    seq: &InputSequence,
    edges: &[(usize, CaseId, usize)],
    config: &ParseConfig,
) -> Result<Interpretation, ParseError> {
    let mut chart = ScoreChart::disabled(config.match_options);
    let mut scored = Vec::with_capacity(edges.len());
    for &(head, case, dep) in edges {
        if head >= seq.len() {
            return Err(ParseError::PositionOutOfRange(head));
        }
        let tok = seq.tokens()[head];
        let expectations = lex.case_frame(tok).remove(&case).unwrap_or_default();
        let slot = PredicateSlot {
            head_pos: head,
            case,
            expectations,
        };
        let score = score_slot(lex, &mut chart, seq, &slot, dep, config.gamma)?;
        scored.push(Edge {
            head,
            case,
            dependent: dep,
            score,
        });
    }
    Ok(Interpretation::from_edges(scored))
}
