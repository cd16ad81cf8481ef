//! JSON, DOT and plain-text renderings of interpretations.

use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::{EdgeKey, InputSequence, Interpretation, ParseError};
use crate::lexicon::Lexicon;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeDoc {
    pub head: usize,
    pub case: String,
    pub dependent: usize,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterpretationDoc {
    pub tokens: Vec<String>,
    pub edges: Vec<EdgeDoc>,
    pub total_score: f64,
    pub exact: bool,
    pub rank: usize,
    pub gamma: f64,
}

impl InterpretationDoc {
    pub fn new(
        lex: &Lexicon,
        seq: &InputSequence,
        interp: &Interpretation,
        rank: usize,
        exact: bool,
        gamma: f64,
    ) -> Self {
        InterpretationDoc {
            tokens: seq.names(lex).into_iter().map(str::to_string).collect(),
            edges: interp
                .edges
                .iter()
                .map(|e| EdgeDoc {
                    head: e.head,
                    case: lex.case_name(e.case).to_string(),
                    dependent: e.dependent,
                    score: e.score,
                })
                .collect(),
            total_score: interp.total_score,
            exact,
            rank,
            gamma,
        }
    }

    /// Resolves the document back into a sequence and edge keys.
    pub fn resolve(&self, lex: &Lexicon) -> Result<(InputSequence, Vec<EdgeKey>), ParseError> {
        let seq = InputSequence::from_names(lex, &self.tokens)?;
        let edges = self
            .edges
            .iter()
            .map(|e| {
                let case = lex
                    .case_id(&e.case)
                    .ok_or_else(|| ParseError::UnknownToken(e.case.clone()))?;
                Ok((e.head, case, e.dependent))
            })
            .collect::<Result<Vec<_>, ParseError>>()?;
        Ok((seq, edges))
    }
}

/// `drink —agent→ cat; drink —object→ milk`
pub fn to_text(lex: &Lexicon, seq: &InputSequence, interp: &Interpretation) -> String {
    if interp.edges.is_empty() {
        return "(no relations)".to_string();
    }
    let names = seq.names(lex);
    interp
        .edges
        .iter()
        .map(|e| format!("{} —{}→ {}", names[e.head], lex.case_name(e.case), names[e.dependent]))
        .collect::<Vec<_>>()
        .join("; ")
}

/// Graphviz digraph with one node per position and case-labelled edges.
pub fn to_dot(lex: &Lexicon, seq: &InputSequence, interp: &Interpretation, graph_name: &str) -> String {
    let mut out = String::new();
    writeln!(out, "digraph {graph_name} {{").unwrap();
    for (i, name) in seq.names(lex).iter().enumerate() {
        writeln!(out, "  n{i} [label=\"{name}\"];").unwrap();
    }
    for e in &interp.edges {
        writeln!(
            out,
            "  n{} -> n{} [label=\"{}\", score=\"{}\"];",
            e.head,
            e.dependent,
            lex.case_name(e.case),
            e.score
        )
        .unwrap();
    }
    out.push('}');
    out
}
