//! Shipped fixtures and random lexicon generation for tests and benchmarks.

use crate::lexicon::{parse_lexicon, Lexicon};

pub const TOY_LEXICON: &str = include_str!("../data/toy.lex");
pub const TOY_CORPUS: &str = include_str!("../data/toy.corpus");

pub fn toy_lexicon() -> Lexicon {
    parse_lexicon(TOY_LEXICON).expect("toy lexicon is valid")
}

#[cfg(feature = "random")]
pub use random::{random_lexicon, RandomLexiconParams};

#[cfg(feature = "random")]
mod random {
    use rand::seq::SliceRandom;
    use rand::Rng;

    use crate::lexicon::{Lexicon, LexiconBuilder};

    #[derive(Clone, Debug)]
    pub struct RandomLexiconParams {
        pub concepts: usize,
        /// Number of inheritance levels; the DAG height is at most `levels - 1`.
        pub levels: usize,
        pub max_parents: usize,
        pub negative_probability: f64,
        pub predicative_fraction: f64,
        pub cases: usize,
        pub max_expectations: usize,
        pub oppositions: usize,
    }

    impl Default for RandomLexiconParams {
        fn default() -> Self {
            RandomLexiconParams {
                concepts: 16,
                levels: 4,
                max_parents: 2,
                negative_probability: 0.1,
                predicative_fraction: 0.3,
                cases: 2,
                max_expectations: 2,
                oppositions: 2,
            }
        }
    }

    /// Builds a random acyclic lexicon. Concepts are spread over levels and
    /// only link to concepts on strictly lower levels.
    pub fn random_lexicon<R: Rng>(rng: &mut R, p: &RandomLexiconParams) -> Lexicon {
        let n = p.concepts.max(2);
        let levels = p.levels.max(1);
        let names: Vec<String> = (0..n).map(|i| format!("c{i}")).collect();
        // guarantee at least one concept on each level when possible
        let level_of: Vec<usize> = (0..n)
            .map(|i| if i < levels { i } else { rng.gen_range(0..levels) })
            .collect();
        let case_names: Vec<String> = (0..p.cases.max(1)).map(|i| format!("r{i}")).collect();

        let mut b = LexiconBuilder::new();
        for i in 0..n {
            let decl = b.concept(&names[i]);
            let lower: Vec<usize> = (0..n).filter(|&j| level_of[j] < level_of[i]).collect();
            if !lower.is_empty() {
                // keep the chain through every level so the height is reached
                let below: Vec<usize> = lower
                    .iter()
                    .copied()
                    .filter(|&j| level_of[j] + 1 == level_of[i])
                    .collect();
                let mut chosen: Vec<usize> = Vec::new();
                if let Some(&j) = below.choose(rng) {
                    chosen.push(j);
                }
                let extra = rng.gen_range(0..p.max_parents.max(1));
                for _ in 0..extra {
                    let j = *lower.choose(rng).unwrap();
                    if !chosen.contains(&j) {
                        chosen.push(j);
                    }
                }
                for j in chosen {
                    decl.has(&names[j], 1.0);
                }
            }
            if rng.gen_bool(p.negative_probability) {
                let j = rng.gen_range(0..n);
                if j != i && !decl_mentions(&b, i, &names[j]) {
                    b.concepts_mut(i).has(&names[j], -1.0);
                }
            }
            if rng.gen_bool(p.predicative_fraction) {
                let count = rng.gen_range(1..=p.max_expectations.max(1));
                let mut used = Vec::new();
                for _ in 0..count {
                    let case = case_names.choose(rng).unwrap().clone();
                    let attr = rng.gen_range(0..n);
                    if used.contains(&(case.clone(), attr)) {
                        continue;
                    }
                    let value = if rng.gen_bool(0.8) {
                        rng.gen_range(0.25..=1.5)
                    } else {
                        -rng.gen_range(0.25..=1.0)
                    };
                    b.concepts_mut(i).expects(&case, &names[attr], value);
                    used.push((case, attr));
                }
            }
        }
        for _ in 0..p.oppositions {
            let a = rng.gen_range(0..n);
            let c = rng.gen_range(0..n);
            if a != c {
                b.oppose(&names[a], &names[c]);
            }
        }
        b.build().expect("generated lexicon is valid")
    }

    fn decl_mentions(b: &LexiconBuilder, i: usize, name: &str) -> bool {
        b.declared_attributes(i).any(|a| a == name)
    }
}
