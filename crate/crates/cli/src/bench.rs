//! Scaling measurements over random sequences.

use std::fmt;
use std::time::Instant;

use concept_parser_core::{analyze_with_chart, AttributeId, CaseId, InputSequence, Lexicon, ParseConfig, ScoreChart};
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum BenchError {
    #[error("invalid range: need 1 <= min-n ({min}) <= max-n ({max}) <= {limit}")]
    BadRange { min: usize, max: usize, limit: usize },
    #[error("--trials must be at least 1")]
    NoTrials,
    #[error("lexicon has no predicative concepts to build sequences from")]
    NoPredicates,
    #[error("{0}")]
    Parse(String),
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub min_n: usize,
    pub max_n: usize,
    pub trials: usize,
    pub seed: u64,
    pub use_chart: bool,
    pub parse: ParseConfig,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            min_n: 8,
            max_n: 32,
            trials: 20,
            seed: 0,
            use_chart: true,
            parse: ParseConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchRow {
    pub n: usize,
    pub mean_slots: f64,
    /// Unweighted pair scores requested by the search, one per (slot, candidate).
    pub mean_pair_scores: f64,
    /// Pair scores actually computed (chart misses).
    pub mean_pair_computations: f64,
    pub mean_feature_evaluations: f64,
    pub mean_micros: f64,
    pub exact: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchReport {
    pub use_chart: bool,
    pub rows: Vec<BenchRow>,
    /// Fitted growth exponent of pair scores against n.
    pub pair_exponent: f64,
    /// Same fit on chart misses.
    pub computation_exponent: f64,
    #[serde(skip)]
    pub top1: Vec<Vec<(usize, CaseId, usize)>>,
}

/// Sizes visited: `min`, doubling while at most `max`, then `max` itself.
pub fn sizes(min: usize, max: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut n = min;
    while n <= max {
        out.push(n);
        n *= 2;
    }
    if out.last() != Some(&max) {
        out.push(max);
    }
    out
}

/// Uniform random tokens with at least one predicative token.
pub fn random_sequence<R: Rng>(rng: &mut R, lex: &Lexicon, n: usize) -> Result<InputSequence, BenchError> {
    let concepts: Vec<AttributeId> = lex.ids().skip(1).collect();
    let predicates: Vec<AttributeId> = concepts
        .iter()
        .copied()
        .filter(|&c| lex.is_predicative(c))
        .collect();
    if predicates.is_empty() {
        return Err(BenchError::NoPredicates);
    }
    let mut tokens: Vec<AttributeId> = (0..n).map(|_| *concepts.choose(rng).unwrap()).collect();
    if !tokens.iter().any(|t| predicates.contains(t)) {
        let at = rng.gen_range(0..n);
        tokens[at] = *predicates.choose(rng).unwrap();
    }
    InputSequence::new(lex, tokens).map_err(|e| BenchError::Parse(e.to_string()))
}

/// Least-squares slope of ln(y) against ln(x).
pub fn fit_exponent(points: &[(f64, f64)]) -> f64 {
    let logs: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    let m = logs.len() as f64;
    if logs.len() < 2 {
        return f64::NAN;
    }
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / m;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = logs.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = logs.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    sxy / sxx
}

impl BenchConfig {
    pub fn validate(&self) -> Result<(), BenchError> {
        let limit = self.parse.max_len;
        if self.min_n < 1 || self.min_n > self.max_n || self.max_n > limit {
            return Err(BenchError::BadRange { min: self.min_n, max: self.max_n, limit });
        }
        if self.trials == 0 {
            return Err(BenchError::NoTrials);
        }
        Ok(())
    }
}

pub fn run(lex: &Lexicon, cfg: &BenchConfig) -> Result<BenchReport, BenchError> {
    cfg.validate()?;
    let mut rng = StdRng::seed_from_u64(cfg.seed);
    let mut rows = Vec::new();
    let mut top1 = Vec::new();
    for n in sizes(cfg.min_n, cfg.max_n) {
        let (mut slots, mut pairs, mut computed, mut features, mut micros) = (0u64, 0u64, 0u64, 0u64, 0f64);
        let mut exact = true;
        for _ in 0..cfg.trials {
            let seq = random_sequence(&mut rng, lex, n)?;
            // one chart per trial
            let mut chart = if cfg.use_chart {
                ScoreChart::with_options(cfg.parse.match_options)
            } else {
                ScoreChart::disabled(cfg.parse.match_options)
            };
            let start = Instant::now();
            let a = analyze_with_chart(lex, &seq, &cfg.parse, &mut chart).map_err(|e| BenchError::Parse(e.to_string()))?;
            micros += start.elapsed().as_secs_f64() * 1e6;
            slots += a.slots as u64;
            pairs += a.stats.pair_requests;
            computed += a.stats.pair_evaluations;
            features += a.stats.feature_evaluations;
            exact &= a.exact;
            top1.push(a.best().edge_keys());
        }
        let t = cfg.trials as f64;
        rows.push(BenchRow {
            n,
            mean_slots: slots as f64 / t,
            mean_pair_scores: pairs as f64 / t,
            mean_pair_computations: computed as f64 / t,
            mean_feature_evaluations: features as f64 / t,
            mean_micros: micros / t,
            exact,
        });
    }
    let fit = |f: fn(&BenchRow) -> f64| fit_exponent(&rows.iter().map(|r| (r.n as f64, f(r))).collect::<Vec<_>>());
    Ok(BenchReport {
        use_chart: cfg.use_chart,
        pair_exponent: fit(|r| r.mean_pair_scores),
        computation_exponent: fit(|r| r.mean_pair_computations),
        rows,
        top1,
    })
}

impl fmt::Display for BenchReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "# chart: {}", if self.use_chart { "enabled" } else { "disabled" })?;
        writeln!(
            f,
            "{:>4} {:>8} {:>12} {:>12} {:>14} {:>12} {:>6}",
            "n", "slots", "pair_scores", "pair_misses", "feature_evals", "micros", "exact"
        )?;
        for r in &self.rows {
            writeln!(
                f,
                "{:>4} {:>8.2} {:>12.1} {:>12.1} {:>14.1} {:>12.1} {:>6}",
                r.n, r.mean_slots, r.mean_pair_scores, r.mean_pair_computations, r.mean_feature_evaluations, r.mean_micros, r.exact
            )?;
        }
        writeln!(f, "pair-score growth exponent: {:.3}", self.pair_exponent)?;
        write!(f, "pair-miss growth exponent:  {:.3}", self.computation_exponent)
    }
}
