//! Argument parsing and command dispatch.
//!
//! Exit codes: 0 success, 1 unreadable file, 2 lexicon/token/corpus
//! resolution errors, 64 usage errors.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use concept_parser_core::parser::export::{to_dot, to_text, InterpretationDoc};
use concept_parser_core::{
    analyze_with_chart, explain_set, parse_lexicon, Decomposition, InputSequence, Lexicon, MatchCase, MatchOptions,
    MatchTrace, ParseConfig, ScoreChart,
};
use thiserror::Error;

use crate::bench::{self, BenchConfig, BenchError};
use crate::corpus::{evaluate, CorpusError, GoldCorpus};

pub const LEXICON_ENV: &str = "CONCEPT_PARSER_LEXICON";

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {}: {source}", .path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Usage(String),
    #[error("write failed: {0}")]
    Output(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } | CliError::Output(_) => EXIT_IO,
            CliError::Data(_) => EXIT_DATA,
            CliError::Usage(_) => EXIT_USAGE,
        }
    }
}

impl From<CorpusError> for CliError {
    fn from(e: CorpusError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<BenchError> for CliError {
    fn from(e: BenchError) -> Self {
        match e {
            BenchError::BadRange { .. } | BenchError::NoTrials => CliError::Usage(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "concept-parser", version, about = "Semantic dependency parsing of concept sequences")]
pub struct Cli {
    /// Lexicon file. When omitted, the first operand is taken as the lexicon path.
    #[arg(long, short = 'l', global = true, env = LEXICON_ENV)]
    pub lexicon: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DecomposeArg {
    Parents,
    Closure,
}

#[derive(Debug, Args)]
pub struct MatchArgs {
    /// Case-4 decomposition of non-primitive expectations.
    #[arg(long, value_enum, default_value = "parents")]
    pub decompose: DecomposeArg,
}

impl MatchArgs {
    fn options(&self) -> MatchOptions {
        MatchOptions {
            decomposition: match self.decompose {
                DecomposeArg::Parents => Decomposition::DirectParents,
                DecomposeArg::Closure => Decomposition::FullClosure,
            },
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse a token sequence and print the best interpretations.
    Parse {
        /// [LEXICON] TOKEN...
        #[arg(required = true)]
        operands: Vec<String>,
        #[arg(long, default_value_t = concept_parser_core::parser::DEFAULT_GAMMA)]
        gamma: f64,
        #[arg(long, default_value_t = 1)]
        top_k: usize,
        #[arg(long, conflicts_with_all = ["dot", "text"])]
        json: bool,
        #[arg(long, conflicts_with = "text")]
        dot: bool,
        #[arg(long)]
        text: bool,
        #[arg(long)]
        no_chart: bool,
        #[command(flatten)]
        matching: MatchArgs,
    },
    /// Show how a candidate matches one case of a predicate.
    Explain {
        /// [LEXICON] HEAD CASE CANDIDATE
        #[arg(required = true)]
        operands: Vec<String>,
        #[arg(long)]
        json: bool,
        #[command(flatten)]
        matching: MatchArgs,
    },
    /// Load a lexicon and report its shape and warnings.
    Validate {
        /// [LEXICON]
        operands: Vec<String>,
    },
    /// Score top-1 parses against a gold corpus.
    Eval {
        /// [LEXICON] CORPUS
        #[arg(required = true)]
        operands: Vec<String>,
        #[arg(long, default_value_t = concept_parser_core::parser::DEFAULT_GAMMA)]
        gamma: f64,
        #[arg(long)]
        json: bool,
        #[command(flatten)]
        matching: MatchArgs,
    },
    /// Measure pair-score growth on random sequences.
    Bench {
        /// [LEXICON]
        operands: Vec<String>,
        #[arg(long, default_value_t = 8)]
        min_n: usize,
        #[arg(long, default_value_t = 32)]
        max_n: usize,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = concept_parser_core::parser::DEFAULT_GAMMA)]
        gamma: f64,
        #[arg(long)]
        no_chart: bool,
        #[arg(long)]
        json: bool,
        #[command(flatten)]
        matching: MatchArgs,
    },
}

/// Runs the tool on `args` (including the program name) and returns the
/// exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{e}");
                    EXIT_USAGE
                }
            };
        }
    };
    match dispatch(cli, out) {
        Ok(()) => EXIT_OK,
        // downstream reader went away (e.g. `| head`)
        Err(CliError::Output(e)) if e.kind() == std::io::ErrorKind::BrokenPipe => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn split_operands(lexicon: Option<PathBuf>, mut operands: Vec<String>) -> Result<(PathBuf, Vec<String>), CliError> {
    match lexicon {
        Some(p) => Ok((p, operands)),
        None if !operands.is_empty() => {
            let p = PathBuf::from(operands.remove(0));
            Ok((p, operands))
        }
        None => Err(CliError::Usage(format!("no lexicon given (pass a path or set {LEXICON_ENV})"))),
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn load(path: &Path) -> Result<Lexicon, CliError> {
    let text = read(path)?;
    parse_lexicon(&text).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn parse_config(gamma: f64, top_k: usize, matching: &MatchArgs) -> Result<ParseConfig, CliError> {
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(CliError::Usage(format!("--gamma must lie in (0, 1], got {gamma}")));
    }
    if top_k < 1 {
        return Err(CliError::Usage("--top-k must be at least 1".into()));
    }
    Ok(ParseConfig {
        gamma,
        top_k,
        match_options: matching.options(),
        ..Default::default()
    })
}

fn dispatch(cli: Cli, out: &mut dyn Write) -> Result<(), CliError> {
    match cli.command {
        Command::Parse { operands, gamma, top_k, json, dot, text: _, no_chart, matching } => {
            let config = parse_config(gamma, top_k, &matching)?;
            let (path, tokens) = split_operands(cli.lexicon, operands)?;
            if tokens.is_empty() {
                return Err(CliError::Usage("no tokens to parse".into()));
            }
            let lex = load(&path)?;
            let seq = InputSequence::from_names(&lex, &tokens).map_err(|e| CliError::Data(e.to_string()))?;
            let mut chart = if no_chart {
                ScoreChart::disabled(config.match_options)
            } else {
                ScoreChart::with_options(config.match_options)
            };
            let analysis =
                analyze_with_chart(&lex, &seq, &config, &mut chart).map_err(|e| CliError::Data(e.to_string()))?;
            for (i, interp) in analysis.interpretations.iter().enumerate() {
                let rank = i + 1;
                if json {
                    let doc = InterpretationDoc::new(&lex, &seq, interp, rank, analysis.exact, config.gamma);
                    writeln!(out, "{}", serde_json::to_string(&doc).expect("serializable"))?;
                } else if dot {
                    writeln!(out, "{}", to_dot(&lex, &seq, interp, &format!("interpretation_{rank}")))?;
                } else {
                    let flag = if analysis.exact { "" } else { " [beam]" };
                    writeln!(out, "{}\t(score {}){flag}", to_text(&lex, &seq, interp), interp.total_score)?;
                }
            }
            Ok(())
        }
        Command::Explain { operands, json, matching } => {
            let (path, args) = split_operands(cli.lexicon, operands)?;
            let [head, case, candidate] = args.as_slice() else {
                return Err(CliError::Usage("explain expects HEAD CASE CANDIDATE".into()));
            };
            let lex = load(&path)?;
            let resolve = |n: &str| lex.id(n).map_err(|e| CliError::Data(e.to_string()));
            let (head_id, cand_id) = (resolve(head)?, resolve(candidate)?);
            let frame = lex.case_frame(head_id);
            let expectations = lex
                .case_id(case)
                .and_then(|c| frame.get(&c))
                .ok_or_else(|| CliError::Data(format!("`{head}` has no case `{case}` in its frame")))?;
            let filtered = lex.effective_intrinsic(cand_id);
            let mut chart = ScoreChart::with_options(matching.options());
            let explanation =
                explain_set(&lex, &mut chart, &filtered, expectations).map_err(|e| CliError::Data(e.to_string()))?;
            if json {
                writeln!(out, "{}", serde_json::to_string_pretty(&explanation).expect("serializable"))?;
            } else {
                writeln!(
                    out,
                    "C({candidate} | {head}.{case}): {} filtered x {} filtering features",
                    filtered.len(),
                    expectations.len()
                )?;
                for term in &explanation.terms {
                    write_trace(out, term, 1)?;
                }
                writeln!(out, "sum / {} = {}", explanation.denominator, explanation.score)?;
            }
            Ok(())
        }
        Command::Validate { operands } => {
            let (path, rest) = split_operands(cli.lexicon, operands)?;
            if !rest.is_empty() {
                return Err(CliError::Usage("validate takes a single lexicon".into()));
            }
            let lex = load(&path)?;
            writeln!(out, "{}: ok", path.display())?;
            writeln!(out, "{}", lex.summary())?;
            Ok(())
        }
        Command::Eval { operands, gamma, json, matching } => {
            let config = parse_config(gamma, 1, &matching)?;
            let (path, rest) = split_operands(cli.lexicon, operands)?;
            let [corpus_path] = rest.as_slice() else {
                return Err(CliError::Usage("eval expects a corpus path".into()));
            };
            let lex = load(&path)?;
            let corpus = GoldCorpus::parse(&read(Path::new(corpus_path))?)?;
            let report = evaluate(&lex, &corpus, &config)?;
            if json {
                writeln!(out, "{}", serde_json::to_string_pretty(&report).expect("serializable"))?;
            } else {
                writeln!(out, "{report}")?;
            }
            Ok(())
        }
        Command::Bench { operands, min_n, max_n, trials, seed, gamma, no_chart, json, matching } => {
            let parse = parse_config(gamma, 1, &matching)?;
            let (path, rest) = split_operands(cli.lexicon, operands)?;
            if !rest.is_empty() {
                return Err(CliError::Usage("bench takes a single lexicon".into()));
            }
            let cfg = BenchConfig { min_n, max_n, trials, seed, use_chart: !no_chart, parse };
            // range problems are usage errors even before the lexicon is read
            cfg.validate()?;
            let lex = load(&path)?;
            let report = bench::run(&lex, &cfg)?;
            if json {
                writeln!(out, "{}", serde_json::to_string_pretty(&report).expect("serializable"))?;
            } else {
                writeln!(out, "{report}")?;
            }
            Ok(())
        }
    }
}

fn write_trace(out: &mut dyn Write, t: &MatchTrace, indent: usize) -> std::io::Result<()> {
    let (a1, a2) = (&t.filtered.attribute, &t.filtering.attribute);
    let relation = match t.case_used {
        MatchCase::Equal => format!("{a1} = {a2}"),
        MatchCase::Subtype => format!("{a1} ⇒ {a2}"),
        MatchCase::Contradiction => format!("{a1} ⇒ ¬{a2}"),
        MatchCase::Decomposed => format!("{a1} ~ {a2}"),
        MatchCase::PrimitiveMiss => format!("{a1} ≠ {a2}"),
    };
    writeln!(
        out,
        "{}{relation}: {}  [{:?}; {} × {}]",
        "  ".repeat(indent),
        t.score,
        t.case_used,
        t.filtered.value,
        t.filtering.value
    )?;
    for c in &t.children {
        write_trace(out, c, indent + 1)?;
    }
    Ok(())
}
