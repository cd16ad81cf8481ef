//! Checks the matcher against a direct transcription of the matching rules
//! that works only from declared lexicon data (no precomputed closures, no
//! coefficient factoring, no chart).

use std::collections::{BTreeMap, BTreeSet};

use concept_parser_core::fixtures::{random_lexicon, toy_lexicon, RandomLexiconParams};
use concept_parser_core::{
    match_feature, set_compatibility, AttributeId, Feature, InputSequence, Lexicon, ParseConfig, ScoreChart,
};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

struct Oracle<'a> {
    lex: &'a Lexicon,
}

impl Oracle<'_> {
    fn parents(&self, a: AttributeId) -> Vec<AttributeId> {
        self.lex
            .entry(a)
            .intrinsic
            .iter()
            .filter(|f| f.value > 0.0)
            .map(|f| f.attribute)
            .collect()
    }

    fn reachable(&self, from: AttributeId) -> BTreeSet<AttributeId> {
        let mut seen = BTreeSet::new();
        let mut stack = self.parents(from);
        while let Some(x) = stack.pop() {
            if seen.insert(x) {
                stack.extend(self.parents(x));
            }
        }
        seen
    }

    fn contradicts(&self, a1: AttributeId, a2: AttributeId) -> bool {
        let opposed: BTreeSet<(AttributeId, AttributeId)> = self.lex.oppositions().collect();
        std::iter::once(a1).chain(self.reachable(a1)).any(|x| {
            opposed.contains(&(x, a2))
                || opposed.contains(&(a2, x))
                || self
                    .lex
                    .entry(x)
                    .intrinsic
                    .iter()
                    .any(|f| f.attribute == a2 && f.value < 0.0)
        })
    }

    fn f(&self, a1: AttributeId, v1: f64, a2: AttributeId, v2: f64) -> f64 {
        if a1 == a2 {
            v1 * v2
        } else if self.reachable(a1).contains(&a2) {
            if v1 < 0.0 {
                0.0
            } else {
                v1 * v2
            }
        } else if self.contradicts(a1, a2) {
            if v1 < 0.0 {
                0.0
            } else {
                -v1 * v2
            }
        } else {
            let parents = self.parents(a2);
            if parents.is_empty() {
                0.0
            } else {
                let mut sf: Vec<(AttributeId, f64)> = parents.into_iter().map(|p| (p, v2)).collect();
                sf.push((self.lex.dummy(), v2));
                self.c(&[(a1, v1)], &sf)
            }
        }
    }

    fn c(&self, filtered: &[(AttributeId, f64)], filtering: &[(AttributeId, f64)]) -> f64 {
        if filtering.is_empty() {
            return 0.0;
        }
        let mut sum = 0.0;
        for &(a2, v2) in filtering {
            for &(a1, v1) in filtered {
                sum += self.f(a1, v1, a2, v2);
            }
        }
        sum / filtering.len() as f64
    }

    fn effective(&self, c: AttributeId) -> BTreeMap<AttributeId, f64> {
        let mut out = BTreeMap::new();
        let closure: Vec<AttributeId> = std::iter::once(c).chain(self.reachable(c)).collect();
        for &x in &closure {
            *out.entry(x).or_insert(0.0) += 1.0;
        }
        for &x in &closure {
            for f in &self.lex.entry(x).intrinsic {
                if f.value < 0.0 {
                    *out.entry(f.attribute).or_insert(0.0) -= 1.0;
                }
            }
        }
        out
    }

    fn pair(&self, head: AttributeId, case: &str, cand: AttributeId) -> f64 {
        let mut expected: BTreeMap<AttributeId, f64> = BTreeMap::new();
        let closure: Vec<AttributeId> = std::iter::once(head).chain(self.reachable(head)).collect();
        for x in closure {
            for ef in &self.lex.entry(x).extrinsic {
                if self.lex.case_name(ef.case) == case {
                    *expected.entry(ef.expected.attribute).or_insert(0.0) += ef.expected.value;
                }
            }
        }
        let sf: Vec<(AttributeId, f64)> = expected.into_iter().collect();
        let filtered: Vec<(AttributeId, f64)> = self.effective(cand).into_iter().collect();
        self.c(&filtered, &sf)
    }
}

fn id(lex: &Lexicon, n: &str) -> AttributeId {
    lex.id(n).unwrap()
}

#[test]
fn oracle_reproduces_frozen_toy_values() {
    let lex = toy_lexicon();
    let o = Oracle { lex: &lex };
    let drink = id(&lex, "drink");
    let bark = id(&lex, "bark");

    assert_eq!(o.f(id(&lex, "animal"), 1.0, id(&lex, "dog"), 1.0), 0.5);
    assert_eq!(o.pair(drink, "agent", id(&lex, "cat")), 3.5);
    assert_eq!(o.pair(drink, "agent", id(&lex, "milk")), -1.0);
    assert_eq!(o.pair(drink, "object", id(&lex, "milk")), 2.5);
    assert!((o.pair(bark, "agent", id(&lex, "dog")) - 29.0 / 12.0).abs() < 1e-15);
    assert!((o.pair(bark, "agent", id(&lex, "cat")) - 25.0 / 12.0).abs() < 1e-15);
}

#[test]
fn matcher_agrees_with_oracle_on_toy_lexicon() {
    let lex = toy_lexicon();
    let o = Oracle { lex: &lex };
    let mut chart = ScoreChart::new();
    let ids: Vec<AttributeId> = lex.ids().collect();
    for &a1 in &ids {
        for &a2 in &ids {
            for (v1, v2) in [(1.0, 1.0), (-1.0, 1.0), (2.0, -0.5), (0.0, 1.0), (-3.0, -2.0)] {
                let got = match_feature(&lex, &mut chart, Feature::new(a1, v1), Feature::new(a2, v2)).unwrap();
                let want = o.f(a1, v1, a2, v2);
                assert!(
                    (got.score - want).abs() < 1e-12,
                    "f(<{}, {v1}>, <{}, {v2}>) = {} but oracle says {want}",
                    lex.name(a1),
                    lex.name(a2),
                    got.score
                );
            }
        }
    }
}

#[test]
fn matcher_agrees_with_oracle_on_random_lexicons() {
    let mut rng = StdRng::seed_from_u64(0x5eed);
    for _ in 0..40 {
        let params = RandomLexiconParams {
            concepts: rng.gen_range(6..24),
            levels: rng.gen_range(2..7),
            max_parents: 3,
            oppositions: 4,
            ..Default::default()
        };
        let lex = random_lexicon(&mut rng, &params);
        let o = Oracle { lex: &lex };
        let mut chart = ScoreChart::new();
        let ids: Vec<AttributeId> = lex.ids().skip(1).collect();
        for _ in 0..60 {
            let c = ids[rng.gen_range(0..ids.len())];
            let eff = lex.effective_intrinsic(c);
            let want_eff = o.effective(c);
            let got_eff: BTreeMap<AttributeId, f64> = eff.iter().map(|f| (f.attribute, f.value)).collect();
            assert_eq!(got_eff, want_eff);

            let k = rng.gen_range(1..4);
            let sf: Vec<Feature> = (0..k)
                .map(|_| Feature::new(ids[rng.gen_range(0..ids.len())], rng.gen_range(-1.5..1.5)))
                .collect();
            let got = set_compatibility(&lex, &mut chart, &eff, &sf).unwrap();
            let filtered: Vec<(AttributeId, f64)> = want_eff.into_iter().collect();
            let filtering: Vec<(AttributeId, f64)> = sf.iter().map(|f| (f.attribute, f.value)).collect();
            let want = o.c(&filtered, &filtering);
            assert!((got - want).abs() < 1e-9, "C mismatch: {got} vs {want}");
        }
    }
}

#[test]
fn analyze_edge_scores_match_oracle() {
    let lex = toy_lexicon();
    let o = Oracle { lex: &lex };
    let seq = InputSequence::from_names(&lex, &["dog", "milk", "bark", "cat", "drink"]).unwrap();
    let cfg = ParseConfig::default().with_gamma(1.0).with_top_k(4);
    let a = concept_parser_core::analyze(&lex, &seq, &cfg).unwrap();
    for interp in &a.interpretations {
        for e in &interp.edges {
            let want = o.pair(
                seq.tokens()[e.head],
                lex.case_name(e.case),
                seq.tokens()[e.dependent],
            );
            assert!((e.score - want).abs() < 1e-12);
        }
    }
}
