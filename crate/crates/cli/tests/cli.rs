use std::path::PathBuf;
use std::process::{Command, Output};

use concept_parser_core::fixtures::toy_lexicon;
use concept_parser_core::parser::export::InterpretationDoc;
use concept_parser_core::{rescore, ParseConfig};

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../core/data")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_concept-parser"))
        .args(args)
        .env_remove("CONCEPT_PARSER_LEXICON")
        .output()
        .expect("spawn concept-parser")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn tmp_file(name: &str, contents: &str) -> String {
    let p = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name);
    std::fs::write(&p, contents).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn parse_text_output() {
    let o = run(&["parse", &data("toy.lex"), "cat", "drink", "milk"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().next().unwrap(), "drink —agent→ cat; drink —object→ milk\t(score 6)");
}

#[test]
fn lexicon_from_flag_and_env() {
    let flag = run(&["parse", "-l", &data("toy.lex"), "dog", "bark"]);
    assert_eq!(flag.status.code(), Some(0));
    let env = Command::new(env!("CARGO_BIN_EXE_concept-parser"))
        .args(["parse", "dog", "bark"])
        .env("CONCEPT_PARSER_LEXICON", data("toy.lex"))
        .output()
        .unwrap();
    assert_eq!(env.status.code(), Some(0));
    assert_eq!(stdout(&flag), stdout(&env));
    assert!(stdout(&env).starts_with("bark —agent→ dog"));
}

#[test]
fn parse_top_k_is_ranked() {
    let o = run(&["parse", &data("toy.lex"), "cat", "drink", "milk", "--top-k", "3", "--json"]);
    let docs: Vec<InterpretationDoc> = stdout(&o).lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(docs.len(), 3);
    assert!(docs.windows(2).all(|w| w[0].total_score >= w[1].total_score));
    assert_eq!(docs.iter().map(|d| d.rank).collect::<Vec<_>>(), [1, 2, 3]);
}

#[test]
fn json_output_round_trips_through_rescore() {
    let o = run(&["parse", &data("toy.lex"), "dog", "milk", "bark", "cat", "drink", "--json", "--top-k", "4"]);
    assert_eq!(o.status.code(), Some(0));
    let lex = toy_lexicon();
    for line in stdout(&o).lines() {
        let doc: InterpretationDoc = serde_json::from_str(line).unwrap();
        let (seq, keys) = doc.resolve(&lex).unwrap();
        let again = rescore(&lex, &seq, &keys, &ParseConfig::default().with_gamma(doc.gamma)).unwrap();
        assert_eq!(again.total_score.to_bits(), doc.total_score.to_bits());
    }
}

#[test]
fn parse_dot_output() {
    let o = run(&["parse", &data("toy.lex"), "cat", "drink", "milk", "--dot"]);
    let text = stdout(&o);
    assert!(text.starts_with("digraph interpretation_1 {"));
    assert!(text.contains("n1 -> n0 [label=\"agent\", score=\"3.5\"];"));
    assert!(text.contains("n1 -> n2 [label=\"object\", score=\"2.5\"];"));
    assert!(text.trim_end().ends_with('}'));
}

#[test]
fn single_token_has_no_relations() {
    let o = run(&["parse", &data("toy.lex"), "cat"]);
    assert_eq!(stdout(&o).lines().next().unwrap(), "(no relations)\t(score 0)");
}

#[test]
fn chart_flag_does_not_change_parses() {
    let args = ["parse", &data("toy.lex"), "cat", "drink", "milk", "dog", "bark", "--top-k", "5", "--json"];
    let with = run(&args);
    let mut off = args.to_vec();
    off.push("--no-chart");
    assert_eq!(stdout(&with), stdout(&run(&off)));
}

#[test]
fn exit_codes() {
    let lex = data("toy.lex");
    assert_eq!(run(&["parse", "/no/such/lexicon.lex", "cat"]).status.code(), Some(1));
    let o = run(&["parse", &lex, "unicorn"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unicorn"));
    assert_eq!(run(&["parse", &lex, "dummy_symbol"]).status.code(), Some(2));
    assert_eq!(run(&["parse", &lex, "cat", "--bogus"]).status.code(), Some(64));
    assert_eq!(run(&["parse", &lex, "cat", "--gamma", "1.5"]).status.code(), Some(64));
    assert_eq!(run(&["parse", &lex, "cat", "--top-k", "0"]).status.code(), Some(64));
    assert_eq!(run(&["parse"]).status.code(), Some(64));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&["--version"]).status.code(), Some(0));
}

#[test]
fn broken_lexicon_is_a_data_error() {
    let bad = tmp_file("cycle.lex", "concept a\n  has b +1\nconcept b\n  has a +1\n");
    let o = run(&["validate", &bad]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("cycle"));
}

#[test]
fn validate_summarizes() {
    let o = run(&["validate", &data("toy.lex")]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("concepts:    12"));
    assert!(text.contains("height:      3"));
}

#[test]
fn explain_shows_the_derivation() {
    let lex = data("toy.lex");
    let o = run(&["explain", &lex, "bark", "agent", "cat"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().last().unwrap(), "sum / 1 = 2.083333333333333");

    let o = run(&["explain", &lex, "drink", "agent", "dog"]);
    assert!(stdout(&o).contains("dog ⇒ animal: 1  [Subtype; 1 × 1]"));

    let o = run(&["explain", &lex, "drink", "agent", "milk"]);
    let text = stdout(&o);
    assert!(text.contains("milk ⇒ ¬living_being: -1  [Contradiction; 1 × 1]"));
    assert_eq!(text.lines().last().unwrap(), "sum / 1 = -1");
}

#[test]
fn explain_rejects_missing_case() {
    let o = run(&["explain", &data("toy.lex"), "bark", "object", "cat"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(run(&["explain", &data("toy.lex"), "bark", "agent"]).status.code(), Some(64));
}

#[test]
fn explain_json_is_valid() {
    let o = run(&["explain", &data("toy.lex"), "drink", "object", "milk", "--json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["score"], 2.5);
}

#[test]
fn eval_shipped_corpus() {
    let o = run(&["eval", &data("toy.lex"), &data("toy.corpus")]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("# accuracy = exact edge-set match"));
    assert!(text.trim_end().ends_with("accuracy: 100.00% (20/20)"));
}

#[test]
fn eval_reports_misses() {
    let corpus = tmp_file("miss.corpus", "cat drink milk :: 1 agent 2 ; 1 object 0\ndog bark :: 1 agent 0\n");
    let o = run(&["eval", &data("toy.lex"), &corpus, "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["accuracy"], 50.0);
    assert_eq!(v["records"][0]["matched"], false);
}

#[test]
fn eval_rejects_empty_and_invalid_corpora() {
    let empty = tmp_file("empty.corpus", "# nothing here\n");
    let o = run(&["eval", &data("toy.lex"), &empty]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("empty corpus"));
    let unknown = tmp_file("unknown.corpus", "cat unicorn ::\n");
    assert_eq!(run(&["eval", &data("toy.lex"), &unknown]).status.code(), Some(2));
}

#[test]
fn bench_usage_errors() {
    let lex = data("toy.lex");
    assert_eq!(run(&["bench", &lex, "--trials", "0"]).status.code(), Some(64));
    assert_eq!(run(&["bench", &lex, "--min-n", "9", "--max-n", "8"]).status.code(), Some(64));
    assert_eq!(run(&["bench", &lex, "--max-n", "33"]).status.code(), Some(64));
}

#[test]
fn bench_is_seeded_and_chart_only_saves_work() {
    let lex = data("toy.lex");
    let args = ["bench", &lex, "--min-n", "4", "--max-n", "16", "--trials", "5", "--seed", "7", "--json"];
    let a: serde_json::Value = serde_json::from_str(&stdout(&run(&args))).unwrap();
    let b: serde_json::Value = serde_json::from_str(&stdout(&run(&args))).unwrap();
    assert_eq!(a["rows"].as_array().unwrap().len(), 3);
    assert_eq!(a["pair_exponent"], b["pair_exponent"]);

    let mut off = args.to_vec();
    off.push("--no-chart");
    let c: serde_json::Value = serde_json::from_str(&stdout(&run(&off))).unwrap();
    for (on, off) in a["rows"].as_array().unwrap().iter().zip(c["rows"].as_array().unwrap()) {
        assert_eq!(on["mean_pair_scores"], off["mean_pair_scores"]);
        assert!(off["mean_feature_evaluations"].as_f64() > on["mean_feature_evaluations"].as_f64());
    }
}
