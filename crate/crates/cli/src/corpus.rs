//! Gold corpus format and exact-match evaluation.
//!
//! One record per line: `tokens... :: head case dependent ; head case dependent`
//! with 0-based positions. `#` starts a comment.

use std::collections::BTreeSet;
use std::fmt;

use concept_parser_core::parser::check_structure;
use concept_parser_core::{analyze, InputSequence, Lexicon, ParseConfig};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum CorpusError {
    #[error("empty corpus")]
    Empty,
    #[error("corpus line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("corpus line {line}: {message}")]
    Mismatch { line: usize, message: String },
}

pub type GoldEdge = (usize, String, usize);

#[derive(Debug, Clone, PartialEq)]
pub struct GoldRecord {
    pub line: usize,
    pub tokens: Vec<String>,
    pub gold: BTreeSet<GoldEdge>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GoldCorpus {
    pub records: Vec<GoldRecord>,
}

impl GoldCorpus {
    pub fn parse(source: &str) -> Result<Self, CorpusError> {
        let mut records = Vec::new();
        for (i, raw) in source.lines().enumerate() {
            let line = i + 1;
            let text = raw.split('#').next().unwrap().trim();
            if text.is_empty() {
                continue;
            }
            let malformed = |message: String| CorpusError::Malformed { line, message };
            let (lhs, rhs) = text
                .split_once("::")
                .ok_or_else(|| malformed("missing `::` separator".into()))?;
            let tokens: Vec<String> = lhs.split_whitespace().map(str::to_string).collect();
            if tokens.is_empty() {
                return Err(malformed("record has no tokens".into()));
            }
            let mut gold = BTreeSet::new();
            for part in rhs.split(';') {
                let fields: Vec<&str> = part.split_whitespace().collect();
                match fields.as_slice() {
                    [] => continue,
                    [h, c, d] => {
                        let pos = |s: &str| {
                            s.parse::<usize>()
                                .map_err(|_| malformed(format!("invalid position `{s}`")))
                        };
                        if !gold.insert((pos(h)?, c.to_string(), pos(d)?)) {
                            return Err(malformed(format!("duplicate gold edge `{}`", part.trim())));
                        }
                    }
                    _ => return Err(malformed(format!("expected `head case dependent`, got `{}`", part.trim()))),
                }
            }
            records.push(GoldRecord { line, tokens, gold });
        }
        if records.is_empty() {
            return Err(CorpusError::Empty);
        }
        Ok(GoldCorpus { records })
    }

    /// Checks that every record resolves against `lex` and that its gold
    /// edges form a valid interpretation.
    pub fn validate(&self, lex: &Lexicon) -> Result<(), CorpusError> {
        for r in &self.records {
            let mismatch = |message: String| CorpusError::Mismatch { line: r.line, message };
            InputSequence::from_names(lex, &r.tokens).map_err(|e| mismatch(e.to_string()))?;
            let mut keys = Vec::with_capacity(r.gold.len());
            for (h, c, d) in &r.gold {
                let case = lex
                    .case_id(c)
                    .ok_or_else(|| mismatch(format!("unknown case `{c}`")))?;
                keys.push((*h, case, *d));
            }
            check_structure(r.tokens.len(), &keys).map_err(|e| mismatch(e.to_string()))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecordResult {
    pub line: usize,
    pub tokens: Vec<String>,
    pub matched: bool,
    pub predicted: Vec<GoldEdge>,
    pub gold: Vec<GoldEdge>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub records: Vec<RecordResult>,
    pub correct: usize,
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
}

pub fn evaluate(lex: &Lexicon, corpus: &GoldCorpus, config: &ParseConfig) -> Result<EvalReport, CorpusError> {
    corpus.validate(lex)?;
    let mut records = Vec::with_capacity(corpus.records.len());
    let (mut hit, mut predicted_total, mut gold_total) = (0usize, 0usize, 0usize);
    for r in &corpus.records {
        let mismatch = |message: String| CorpusError::Mismatch { line: r.line, message };
        let seq = InputSequence::from_names(lex, &r.tokens).map_err(|e| mismatch(e.to_string()))?;
        let analysis = analyze(lex, &seq, config).map_err(|e| mismatch(e.to_string()))?;
        let predicted: BTreeSet<GoldEdge> = analysis
            .best()
            .edges
            .iter()
            .map(|e| (e.head, lex.case_name(e.case).to_string(), e.dependent))
            .collect();
        hit += predicted.intersection(&r.gold).count();
        predicted_total += predicted.len();
        gold_total += r.gold.len();
        records.push(RecordResult {
            line: r.line,
            tokens: r.tokens.clone(),
            matched: predicted == r.gold,
            predicted: predicted.into_iter().collect(),
            gold: r.gold.iter().cloned().collect(),
        });
    }
    let correct = records.iter().filter(|r| r.matched).count();
    let ratio = |num: usize, den: usize| if den == 0 { 1.0 } else { num as f64 / den as f64 };
    Ok(EvalReport {
        correct,
        accuracy: 100.0 * correct as f64 / records.len() as f64,
        precision: ratio(hit, predicted_total),
        recall: ratio(hit, gold_total),
        records,
    })
}

fn edges_text(edges: &[GoldEdge], tokens: &[String]) -> String {
    if edges.is_empty() {
        return "(none)".into();
    }
    edges
        .iter()
        .map(|(h, c, d)| {
            let name = |p: usize| tokens.get(p).map_or("?", String::as_str);
            format!("{}@{h} —{c}→ {}@{d}", name(*h), name(*d))
        })
        .collect::<Vec<_>>()
        .join("; ")
}

impl fmt::Display for EvalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "# accuracy = exact edge-set match between the top-1 interpretation and gold")?;
        for r in &self.records {
            if r.matched {
                writeln!(f, "ok    line {:>3}: {}", r.line, r.tokens.join(" "))?;
            } else {
                writeln!(f, "MISS  line {:>3}: {}", r.line, r.tokens.join(" "))?;
                writeln!(f, "        gold: {}", edges_text(&r.gold, &r.tokens))?;
                writeln!(f, "        got:  {}", edges_text(&r.predicted, &r.tokens))?;
            }
        }
        writeln!(f, "edge precision: {:.4}", self.precision)?;
        writeln!(f, "edge recall:    {:.4}", self.recall)?;
        write!(
            f,
            "accuracy: {:.2}% ({}/{})",
            self.accuracy,
            self.correct,
            self.records.len()
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use concept_parser_core::fixtures::toy_lexicon;

    #[test]
    fn parses_records() {
        let c = GoldCorpus::parse("# c\ncat drink milk :: 1 agent 0 ; 1 object 2\n\ncat ::\n").unwrap();
        assert_eq!(c.records.len(), 2);
        assert_eq!(c.records[0].line, 2);
        assert_eq!(c.records[0].gold.len(), 2);
        assert!(c.records[1].gold.is_empty());
    }

    #[test]
    fn rejects_bad_records() {
        assert_eq!(GoldCorpus::parse("# nothing\n"), Err(CorpusError::Empty));
        assert!(matches!(GoldCorpus::parse("cat drink"), Err(CorpusError::Malformed { line: 1, .. })));
        assert!(matches!(GoldCorpus::parse("cat :: 1 agent"), Err(CorpusError::Malformed { .. })));
        assert!(matches!(GoldCorpus::parse("cat :: x agent 0"), Err(CorpusError::Malformed { .. })));
    }

    #[test]
    fn validation_catches_mismatches() {
        let lex = toy_lexicon();
        let unknown = GoldCorpus::parse("cat unicorn ::\n").unwrap();
        assert!(matches!(unknown.validate(&lex), Err(CorpusError::Mismatch { line: 1, .. })));
        let bad_case = GoldCorpus::parse("cat drink :: 1 patient 0\n").unwrap();
        assert!(bad_case.validate(&lex).is_err());
        let two_govs = GoldCorpus::parse("cat drink drink :: 1 agent 0 ; 2 agent 0\n").unwrap();
        assert!(two_govs.validate(&lex).is_err());
    }

    #[test]
    fn scores_exact_matches() {
        let lex = toy_lexicon();
        let c = GoldCorpus::parse("cat drink milk :: 1 agent 0 ; 1 object 2\ncat drink milk :: 1 agent 2 ; 1 object 0\n").unwrap();
        let report = evaluate(&lex, &c, &ParseConfig::default()).unwrap();
        assert_eq!(report.correct, 1);
        assert_eq!(report.accuracy, 50.0);
        assert_eq!(report.precision, 0.5);
        assert!(report.to_string().contains("accuracy: 50.00% (1/2)"));
    }
}
