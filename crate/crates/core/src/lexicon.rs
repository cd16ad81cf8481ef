//! Concept lexicon: intrinsic features, case frames, oppositions and the
//! multiple-inheritance graph built from positive intrinsic features.
//!
//! Concept labels and feature attributes live in a single namespace. A
//! positive intrinsic feature `<b, +1>` declared on concept `a` is at the
//! same time an inheritance link `a => b`.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

mod format;

pub use format::parse_lexicon;

/// Reserved attribute used to attenuate decomposed expectations. It never
/// matches anything but itself and no concept may declare it.
pub const DUMMY_SYMBOL: &str = "dummy_symbol";

/// Interned attribute (or concept label) identifier.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AttributeId(u32);

impl AttributeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Interned case (semantic role) identifier. Ids are assigned in
/// lexicographic order of the case names, so comparing ids compares names.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CaseId(u32);

impl CaseId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Feature {
    pub attribute: AttributeId,
    pub value: f64,
}

impl Feature {
    pub fn new(attribute: AttributeId, value: f64) -> Self {
        Feature { attribute, value }
    }
}

/// A selectional expectation placed by a predicative concept on the filler
/// of one of its cases.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExtrinsicFeature {
    pub case: CaseId,
    pub expected: Feature,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConceptEntry {
    pub id: AttributeId,
    /// Declared intrinsic features, values are exactly +1 or -1.
    pub intrinsic: Vec<Feature>,
    pub extrinsic: Vec<ExtrinsicFeature>,
    pub gloss: Option<String>,
}

impl ConceptEntry {
    pub fn is_predicative(&self) -> bool {
        !self.extrinsic.is_empty()
    }
}

/// A case frame: expectations grouped by case, in case-name order.
pub type CaseFrame = BTreeMap<CaseId, Vec<Feature>>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LexiconError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{context} references undeclared attribute `{name}`{}", line_suffix(*.line))]
    DanglingReference {
        name: String,
        context: String,
        line: Option<usize>,
    },
    #[error("inheritance cycle through {}", .members.join(", "))]
    Cycle { members: Vec<String> },
    #[error("concept `{concept}` declares attribute `{attribute}` more than once{}", line_suffix(*.line))]
    DuplicateFeature {
        concept: String,
        attribute: String,
        line: Option<usize>,
    },
    #[error("concept `{concept}` declares `{attribute}` with value {value}; intrinsic values must be +1 or -1{}", line_suffix(*.line))]
    InvalidIntrinsicValue {
        concept: String,
        attribute: String,
        value: f64,
        line: Option<usize>,
    },
    #[error("expectation `{case} {attribute}` on `{concept}` has non-finite value{}", line_suffix(*.line))]
    NonFiniteValue {
        concept: String,
        case: String,
        attribute: String,
        line: Option<usize>,
    },
    #[error("attribute `{attribute}` cannot be opposed to itself{}", line_suffix(*.line))]
    SelfOpposition {
        attribute: String,
        line: Option<usize>,
    },
    #[error("concept `{name}` is declared more than once{}", line_suffix(*.line))]
    DuplicateConcept { name: String, line: Option<usize> },
    #[error("`{DUMMY_SYMBOL}` is reserved and cannot be used in {context}{}", line_suffix(*.line))]
    ReservedSymbol { context: String, line: Option<usize> },
    #[error("unknown concept or attribute `{0}`")]
    Unknown(String),
    #[error("attribute `{0}` is primitive and cannot be decomposed")]
    Primitive(String),
}

fn line_suffix(line: Option<usize>) -> String {
    match line {
        Some(l) => format!(" (line {l})"),
        None => String::new(),
    }
}

/// Validated, immutable concept lexicon.
#[derive(Debug, Clone)]
pub struct Lexicon {
    names: Vec<String>,
    index: HashMap<String, AttributeId>,
    case_names: Vec<String>,
    case_index: HashMap<String, CaseId>,
    entries: Vec<ConceptEntry>,
    oppositions: BTreeSet<(AttributeId, AttributeId)>,
    parents: Vec<Vec<AttributeId>>,
    // strict positive closure, sorted
    ancestors: Vec<Vec<AttributeId>>,
    // attributes each concept contradicts (opposition or declared negation
    // anywhere in its reflexive closure), sorted
    contradicted: Vec<Vec<AttributeId>>,
    heights: Vec<usize>,
    warnings: Vec<String>,
}

impl Lexicon {
    /// Lexicon holding only the reserved dummy symbol.
    pub fn empty() -> Self {
        LexiconBuilder::new()
            .build()
            .expect("empty lexicon is always valid")
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    /// Number of entries other than the reserved dummy symbol.
    pub fn declared_len(&self) -> usize {
        self.entries.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.declared_len() == 0
    }

    pub fn dummy(&self) -> AttributeId {
        AttributeId(0)
    }

    pub fn id(&self, name: &str) -> Result<AttributeId, LexiconError> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| LexiconError::Unknown(name.to_string()))
    }

    pub fn name(&self, id: AttributeId) -> &str {
        &self.names[id.index()]
    }

    pub fn case_id(&self, name: &str) -> Option<CaseId> {
        self.case_index.get(name).copied()
    }

    pub fn case_name(&self, id: CaseId) -> &str {
        &self.case_names[id.index()]
    }

    /// The case system: every case used by some extrinsic feature.
    pub fn cases(&self) -> impl Iterator<Item = CaseId> + '_ {
        (0..self.case_names.len() as u32).map(CaseId)
    }

    pub fn entry(&self, id: AttributeId) -> &ConceptEntry {
        &self.entries[id.index()]
    }

    pub fn entries(&self) -> impl Iterator<Item = &ConceptEntry> {
        self.entries.iter()
    }

    pub fn ids(&self) -> impl Iterator<Item = AttributeId> {
        (0..self.entries.len() as u32).map(AttributeId)
    }

    pub fn oppositions(&self) -> impl Iterator<Item = (AttributeId, AttributeId)> + '_ {
        self.oppositions.iter().copied()
    }

    pub fn are_opposed(&self, a: AttributeId, b: AttributeId) -> bool {
        self.oppositions.contains(&ordered(a, b))
    }

    /// Load-time diagnostics that do not prevent loading, such as attribute
    /// pairs that both imply and contradict each other.
    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn is_predicative(&self, id: AttributeId) -> bool {
        // inherited frames count too
        self.reflexive_closure(id)
            .any(|x| self.entries[x.index()].is_predicative())
    }

    /// Direct positive parents.
    pub fn parents(&self, id: AttributeId) -> &[AttributeId] {
        &self.parents[id.index()]
    }

    /// Strict positive closure (all ancestors, excluding `id`).
    pub fn ancestors(&self, id: AttributeId) -> &[AttributeId] {
        &self.ancestors[id.index()]
    }

    fn reflexive_closure(&self, id: AttributeId) -> impl Iterator<Item = AttributeId> + '_ {
        std::iter::once(id).chain(self.ancestors(id).iter().copied())
    }

    /// Length of the longest positive path starting at `id`.
    pub fn height(&self, id: AttributeId) -> usize {
        self.heights[id.index()]
    }

    /// Height of the whole inheritance graph.
    pub fn max_height(&self) -> usize {
        self.heights.iter().copied().max().unwrap_or(0)
    }

    pub fn implies(&self, a1: AttributeId, a2: AttributeId) -> bool {
        self.ancestors(a1).binary_search(&a2).is_ok()
    }

    pub fn contradicts(&self, a1: AttributeId, a2: AttributeId) -> bool {
        self.contradicted[a1.index()].binary_search(&a2).is_ok()
    }

    pub fn is_primitive(&self, a: AttributeId) -> bool {
        self.parents(a).is_empty()
    }

    /// One inheritance level of decomposition: the direct parents of `a`.
    pub fn decompose(&self, a: AttributeId) -> Result<&[AttributeId], LexiconError> {
        if self.is_primitive(a) {
            return Err(LexiconError::Primitive(self.name(a).to_string()));
        }
        Ok(self.parents(a))
    }

    /// Aggregated intrinsic features of a concept. Its own label and every
    /// distinct positively reachable ancestor contribute +1; each declared
    /// negative feature of the concept or of an ancestor contributes -1.
    /// Contributions on the same attribute are summed, so contradictory
    /// inheritance can leave an attribute at 0.
    pub fn effective_intrinsic(&self, c: AttributeId) -> Vec<Feature> {
        let mut sums: BTreeMap<AttributeId, f64> = BTreeMap::new();
        for x in self.reflexive_closure(c) {
            *sums.entry(x).or_insert(0.0) += 1.0;
        }
        for x in self.reflexive_closure(c) {
            for f in &self.entries[x.index()].intrinsic {
                if f.value < 0.0 {
                    *sums.entry(f.attribute).or_insert(0.0) += f.value;
                }
            }
        }
        sums.into_iter()
            .map(|(attribute, value)| Feature { attribute, value })
            .collect()
    }

    /// Own and inherited extrinsic features grouped by case. Expectations on
    /// the same (case, attribute) coming from distinct ancestors are summed.
    pub fn case_frame(&self, c: AttributeId) -> CaseFrame {
        let mut sums: BTreeMap<CaseId, BTreeMap<AttributeId, f64>> = BTreeMap::new();
        for x in self.reflexive_closure(c) {
            for ef in &self.entries[x.index()].extrinsic {
                *sums
                    .entry(ef.case)
                    .or_default()
                    .entry(ef.expected.attribute)
                    .or_insert(0.0) += ef.expected.value;
            }
        }
        sums.into_iter()
            .map(|(case, feats)| {
                let feats = feats
                    .into_iter()
                    .map(|(attribute, value)| Feature { attribute, value })
                    .collect();
                (case, feats)
            })
            .collect()
    }

    pub fn common_ancestors(&self, c1: AttributeId, c2: AttributeId) -> BTreeSet<AttributeId> {
        let first: BTreeSet<AttributeId> = self.reflexive_closure(c1).collect();
        self.reflexive_closure(c2)
            .filter(|x| first.contains(x))
            .collect()
    }

    /// Name-based convenience for [`Lexicon::effective_intrinsic`].
    pub fn effective_intrinsic_of(&self, name: &str) -> Result<Vec<Feature>, LexiconError> {
        Ok(self.effective_intrinsic(self.id(name)?))
    }

    pub fn case_frame_of(&self, name: &str) -> Result<CaseFrame, LexiconError> {
        Ok(self.case_frame(self.id(name)?))
    }

    pub fn implies_by_name(&self, a1: &str, a2: &str) -> Result<bool, LexiconError> {
        Ok(self.implies(self.id(a1)?, self.id(a2)?))
    }

    pub fn contradicts_by_name(&self, a1: &str, a2: &str) -> Result<bool, LexiconError> {
        Ok(self.contradicts(self.id(a1)?, self.id(a2)?))
    }

    pub fn describe_feature(&self, f: &Feature) -> String {
        format!("<{}, {}>", self.name(f.attribute), f.value)
    }
}

fn ordered(a: AttributeId, b: AttributeId) -> (AttributeId, AttributeId) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Mutable declaration of one concept inside a [`LexiconBuilder`].
#[derive(Debug, Clone, Default)]
pub struct ConceptDecl {
    name: String,
    line: Option<usize>,
    intrinsic: Vec<(String, f64, Option<usize>)>,
    extrinsic: Vec<(String, String, f64, Option<usize>)>,
    gloss: Option<String>,
}

impl ConceptDecl {
    /// Declares an intrinsic feature (inheritance link when positive).
    pub fn has(&mut self, attribute: &str, value: f64) -> &mut Self {
        self.intrinsic.push((attribute.to_string(), value, None));
        self
    }

    /// Declares an extrinsic feature on `case`.
    pub fn expects(&mut self, case: &str, attribute: &str, value: f64) -> &mut Self {
        self.extrinsic
            .push((case.to_string(), attribute.to_string(), value, None));
        self
    }

    pub fn gloss(&mut self, text: &str) -> &mut Self {
        self.gloss = Some(text.to_string());
        self
    }

    fn has_at(&mut self, attribute: &str, value: f64, line: usize) {
        self.intrinsic.push((attribute.to_string(), value, Some(line)));
    }

    fn expects_at(&mut self, case: &str, attribute: &str, value: f64, line: usize) {
        self.extrinsic
            .push((case.to_string(), attribute.to_string(), value, Some(line)));
    }
}

/// Collects declarations and validates them into a [`Lexicon`].
#[derive(Debug, Clone, Default)]
pub struct LexiconBuilder {
    concepts: Vec<ConceptDecl>,
    oppositions: Vec<(String, String, Option<usize>)>,
}

impl LexiconBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn concept(&mut self, name: &str) -> &mut ConceptDecl {
        self.concepts.push(ConceptDecl {
            name: name.to_string(),
            ..Default::default()
        });
        self.concepts.last_mut().unwrap()
    }

    pub fn oppose(&mut self, a: &str, b: &str) -> &mut Self {
        self.oppositions.push((a.to_string(), b.to_string(), None));
        self
    }

    #[allow(dead_code)]
    pub(crate) fn concepts_mut(&mut self, i: usize) -> &mut ConceptDecl {
        &mut self.concepts[i]
    }

    #[allow(dead_code)]
    pub(crate) fn declared_attributes(&self, i: usize) -> impl Iterator<Item = &str> {
        self.concepts[i].intrinsic.iter().map(|(a, ..)| a.as_str())
    }

    fn concept_at(&mut self, name: &str, line: usize) -> &mut ConceptDecl {
        let decl = self.concept(name);
        decl.line = Some(line);
        decl
    }

    fn oppose_at(&mut self, a: &str, b: &str, line: usize) {
        self.oppositions
            .push((a.to_string(), b.to_string(), Some(line)));
    }

    pub fn build(&self) -> Result<Lexicon, LexiconError> {
        let mut names = vec![DUMMY_SYMBOL.to_string()];
        let mut index = HashMap::new();
        index.insert(DUMMY_SYMBOL.to_string(), AttributeId(0));
        for decl in &self.concepts {
            if decl.name == DUMMY_SYMBOL {
                return Err(LexiconError::ReservedSymbol {
                    context: "a concept declaration".into(),
                    line: decl.line,
                });
            }
            if index.contains_key(&decl.name) {
                return Err(LexiconError::DuplicateConcept {
                    name: decl.name.clone(),
                    line: decl.line,
                });
            }
            index.insert(decl.name.clone(), AttributeId(names.len() as u32));
            names.push(decl.name.clone());
        }

        let resolve = |name: &str, context: &dyn Fn() -> String, line: Option<usize>| {
            if name == DUMMY_SYMBOL {
                return Err(LexiconError::ReservedSymbol {
                    context: context(),
                    line,
                });
            }
            index
                .get(name)
                .copied()
                .ok_or_else(|| LexiconError::DanglingReference {
                    name: name.to_string(),
                    context: context(),
                    line,
                })
        };

        let case_set: BTreeSet<&str> = self
            .concepts
            .iter()
            .flat_map(|d| d.extrinsic.iter().map(|(c, ..)| c.as_str()))
            .collect();
        let case_names: Vec<String> = case_set.into_iter().map(str::to_string).collect();
        let case_index: HashMap<String, CaseId> = case_names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), CaseId(i as u32)))
            .collect();

        let mut entries = vec![ConceptEntry {
            id: AttributeId(0),
            intrinsic: Vec::new(),
            extrinsic: Vec::new(),
            gloss: None,
        }];
        for (i, decl) in self.concepts.iter().enumerate() {
            let id = AttributeId(i as u32 + 1);
            let mut seen = HashSet::new();
            let mut intrinsic = Vec::with_capacity(decl.intrinsic.len());
            for (attr, value, line) in &decl.intrinsic {
                let ctx = || format!("concept `{}`", decl.name);
                let a = resolve(attr, &ctx, *line)?;
                if !seen.insert(a) {
                    return Err(LexiconError::DuplicateFeature {
                        concept: decl.name.clone(),
                        attribute: attr.clone(),
                        line: *line,
                    });
                }
                if *value != 1.0 && *value != -1.0 {
                    return Err(LexiconError::InvalidIntrinsicValue {
                        concept: decl.name.clone(),
                        attribute: attr.clone(),
                        value: *value,
                        line: *line,
                    });
                }
                intrinsic.push(Feature::new(a, *value));
            }
            let mut extrinsic = Vec::with_capacity(decl.extrinsic.len());
            for (case, attr, value, line) in &decl.extrinsic {
                let ctx = || format!("case `{}` of concept `{}`", case, decl.name);
                let a = resolve(attr, &ctx, *line)?;
                if !value.is_finite() {
                    return Err(LexiconError::NonFiniteValue {
                        concept: decl.name.clone(),
                        case: case.clone(),
                        attribute: attr.clone(),
                        line: *line,
                    });
                }
                extrinsic.push(ExtrinsicFeature {
                    case: case_index[case],
                    expected: Feature::new(a, *value),
                });
            }
            entries.push(ConceptEntry {
                id,
                intrinsic,
                extrinsic,
                gloss: decl.gloss.clone(),
            });
        }

        let mut oppositions = BTreeSet::new();
        for (a, b, line) in &self.oppositions {
            let ctx = || "an opposition".to_string();
            let ia = resolve(a, &ctx, *line)?;
            let ib = resolve(b, &ctx, *line)?;
            if ia == ib {
                return Err(LexiconError::SelfOpposition {
                    attribute: a.clone(),
                    line: *line,
                });
            }
            oppositions.insert(ordered(ia, ib));
        }

        let parents: Vec<Vec<AttributeId>> = entries
            .iter()
            .map(|e| {
                let mut ps: Vec<AttributeId> = e
                    .intrinsic
                    .iter()
                    .filter(|f| f.value > 0.0)
                    .map(|f| f.attribute)
                    .collect();
                ps.sort();
                ps
            })
            .collect();

        let order = topological_order(&parents).map_err(|cycle| LexiconError::Cycle {
            members: cycle.iter().map(|id| names[id.index()].clone()).collect(),
        })?;

        // parents come before children in `order`
        let mut ancestors: Vec<Vec<AttributeId>> = vec![Vec::new(); entries.len()];
        let mut heights = vec![0usize; entries.len()];
        for &id in &order {
            let mut set = BTreeSet::new();
            let mut h = 0;
            for &p in &parents[id.index()] {
                set.insert(p);
                set.extend(ancestors[p.index()].iter().copied());
                h = h.max(heights[p.index()] + 1);
            }
            ancestors[id.index()] = set.into_iter().collect();
            heights[id.index()] = h;
        }

        let mut contradicted: Vec<Vec<AttributeId>> = Vec::with_capacity(entries.len());
        let mut opposed_to: HashMap<AttributeId, Vec<AttributeId>> = HashMap::new();
        for &(a, b) in &oppositions {
            opposed_to.entry(a).or_default().push(b);
            opposed_to.entry(b).or_default().push(a);
        }
        for e in &entries {
            let mut set = BTreeSet::new();
            let closure = std::iter::once(e.id).chain(ancestors[e.id.index()].iter().copied());
            for x in closure {
                if let Some(opp) = opposed_to.get(&x) {
                    set.extend(opp.iter().copied());
                }
                set.extend(
                    entries[x.index()]
                        .intrinsic
                        .iter()
                        .filter(|f| f.value < 0.0)
                        .map(|f| f.attribute),
                );
            }
            contradicted.push(set.into_iter().collect());
        }

        let mut warnings = Vec::new();
        for e in &entries {
            for a2 in &contradicted[e.id.index()] {
                if ancestors[e.id.index()].binary_search(a2).is_ok() {
                    warnings.push(format!(
                        "`{}` both implies and contradicts `{}`; subtype matching takes precedence",
                        names[e.id.index()],
                        names[a2.index()]
                    ));
                }
            }
        }

        Ok(Lexicon {
            names,
            index,
            case_names,
            case_index,
            entries,
            oppositions,
            parents,
            ancestors,
            contradicted,
            heights,
            warnings,
        })
    }
}

/// Orders nodes so that every parent precedes its children, or returns the
/// members of one cycle.
fn topological_order(parents: &[Vec<AttributeId>]) -> Result<Vec<AttributeId>, Vec<AttributeId>> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        New,
        Active,
        Done,
    }
    let n = parents.len();
    let mut marks = vec![Mark::New; n];
    let mut order = Vec::with_capacity(n);
    let mut path: Vec<AttributeId> = Vec::new();

    for start in 0..n {
        if marks[start] != Mark::New {
            continue;
        }
        // iterative DFS: (node, next parent index)
        let mut stack = vec![(start, 0usize)];
        marks[start] = Mark::Active;
        path.push(AttributeId(start as u32));
        while let Some(&mut (node, ref mut next)) = stack.last_mut() {
            if let Some(&p) = parents[node].get(*next) {
                *next += 1;
                match marks[p.index()] {
                    Mark::New => {
                        marks[p.index()] = Mark::Active;
                        path.push(p);
                        stack.push((p.index(), 0));
                    }
                    Mark::Active => {
                        let pos = path.iter().position(|&x| x == p).unwrap();
                        let mut cycle = path[pos..].to_vec();
                        cycle.sort();
                        return Err(cycle);
                    }
                    Mark::Done => {}
                }
            } else {
                marks[node] = Mark::Done;
                order.push(AttributeId(node as u32));
                path.pop();
                stack.pop();
            }
        }
    }
    Ok(order)
}

/// Human-readable summary used by the `validate` command.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct LexiconSummary {
    pub concepts: usize,
    pub predicative: usize,
    pub cases: Vec<String>,
    pub oppositions: usize,
    pub max_height: usize,
    pub warnings: Vec<String>,
}

impl Lexicon {
    pub fn summary(&self) -> LexiconSummary {
        LexiconSummary {
            concepts: self.declared_len(),
            predicative: self
                .entries
                .iter()
                .filter(|e| e.is_predicative())
                .count(),
            cases: self.case_names.clone(),
            oppositions: self.oppositions.len(),
            max_height: self.max_height(),
            warnings: self.warnings.clone(),
        }
    }
}

impl fmt::Display for LexiconSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "concepts:    {}", self.concepts)?;
        writeln!(f, "predicative: {}", self.predicative)?;
        writeln!(f, "cases:       {{{}}}", self.cases.join(", "))?;
        writeln!(f, "oppositions: {}", self.oppositions)?;
        write!(f, "height:      {}", self.max_height)?;
        for w in &self.warnings {
            write!(f, "\nwarning: {w}")?;
        }
        Ok(())
    }
}
