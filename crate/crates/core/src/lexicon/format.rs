//! Line-oriented lexicon text format.
//!
//! ```text
//! # comment
//! concept drink
//!   has action +1
//!   case agent animal 1
//!   case object beverage 1
//!   gloss "to swallow a liquid"
//! oppose object living_being
//! ```

use super::{LexiconBuilder, LexiconError, Lexicon};

pub fn parse_lexicon(source: &str) -> Result<Lexicon, LexiconError> {
    let mut builder = LexiconBuilder::new();
    let mut current: Option<usize> = None;

    for (i, raw) in source.lines().enumerate() {
        let line_no = i + 1;
        let line = strip_comment(raw);
        if line.trim().is_empty() {
            continue;
        }
        let indented = line.starts_with([' ', '\t']);
        let tokens = tokenize(line, line_no)?;
        let (head, head_col) = (&tokens[0].0, tokens[0].1);
        let err = |column: usize, message: String| LexiconError::Syntax {
            line: line_no,
            column,
            message,
        };

        if !indented {
            match head.as_str() {
                "concept" => {
                    let [_, (id, col)] = expect_arity::<2>(&tokens, line_no, "concept <id>")?;
                    check_ident(id, *col, line_no)?;
                    builder.concept_at(id, line_no);
                    current = Some(builder.concepts.len() - 1);
                }
                "oppose" => {
                    let [_, (a, ca), (b, cb)] = expect_arity::<3>(&tokens, line_no, "oppose <attr> <attr>")?;
                    check_ident(a, *ca, line_no)?;
                    check_ident(b, *cb, line_no)?;
                    builder.oppose_at(a, b, line_no);
                    current = None;
                }
                other => return Err(err(head_col, format!("unknown directive `{other}`"))),
            }
            continue;
        }

        let Some(idx) = current else {
            return Err(err(head_col, format!("`{head}` outside of a concept block")));
        };
        match head.as_str() {
            "has" => {
                let [_, (attr, ca), (value, cv)] = expect_arity::<3>(&tokens, line_no, "has <attr> <+1|-1>")?;
                check_ident(attr, *ca, line_no)?;
                let v = match value.as_str() {
                    "+1" | "1" => 1.0,
                    "-1" => -1.0,
                    other => match parse_real(other) {
                        // let validation report the offending value
                        Some(v) => v,
                        None => return Err(err(*cv, format!("invalid value `{other}`"))),
                    },
                };
                builder.concepts[idx].has_at(attr, v, line_no);
            }
            "case" => {
                let [_, (case, cc), (attr, ca), (value, cv)] =
                    expect_arity::<4>(&tokens, line_no, "case <case> <attr> <real>")?;
                check_ident(case, *cc, line_no)?;
                check_ident(attr, *ca, line_no)?;
                let v = parse_real(value).ok_or_else(|| err(*cv, format!("invalid value `{value}`")))?;
                builder.concepts[idx].expects_at(case, attr, v, line_no);
            }
            "gloss" => {
                if tokens.len() != 2 || !tokens[1].2 {
                    return Err(err(head_col, "expected gloss \"<text>\"".into()));
                }
                builder.concepts[idx].gloss(&tokens[1].0);
            }
            other => return Err(err(head_col, format!("unknown directive `{other}`"))),
        }
    }
    builder.build()
}

fn parse_real(s: &str) -> Option<f64> {
    s.parse::<f64>().ok().filter(|v| v.is_finite())
}

fn check_ident(s: &str, column: usize, line: usize) -> Result<(), LexiconError> {
    let mut chars = s.chars();
    let ok = matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_');
    if ok {
        Ok(())
    } else {
        Err(LexiconError::Syntax {
            line,
            column,
            message: format!("invalid identifier `{s}`"),
        })
    }
}

fn expect_arity<'a, const N: usize>(
    tokens: &'a [(String, usize, bool)],
    line: usize,
    usage: &str,
) -> Result<[(&'a String, &'a usize); N], LexiconError> {
    if tokens.len() != N || tokens.iter().any(|t| t.2) {
        let column = tokens.get(N).or(tokens.last()).map(|t| t.1).unwrap_or(1);
        return Err(LexiconError::Syntax {
            line,
            column,
            message: format!("expected `{usage}`"),
        });
    }
    Ok(std::array::from_fn(|i| (&tokens[i].0, &tokens[i].1)))
}

/// Removes a trailing `#` comment, ignoring `#` inside quoted strings.
fn strip_comment(line: &str) -> &str {
    let mut in_quotes = false;
    let mut escaped = false;
    for (i, c) in line.char_indices() {
        match c {
            _ if escaped => escaped = false,
            '\\' if in_quotes => escaped = true,
            '"' => in_quotes = !in_quotes,
            '#' if !in_quotes => return &line[..i],
            _ => {}
        }
    }
    line
}

/// Splits a line into (text, 1-based column, was_quoted) tokens.
fn tokenize(line: &str, line_no: usize) -> Result<Vec<(String, usize, bool)>, LexiconError> {
    let mut tokens = Vec::new();
    let mut chars = line.char_indices().peekable();
    while let Some(&(start, c)) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
            continue;
        }
        let column = line[..start].chars().count() + 1;
        if c == '"' {
            chars.next();
            let mut text = String::new();
            let mut closed = false;
            while let Some((_, c)) = chars.next() {
                match c {
                    '"' => {
                        closed = true;
                        break;
                    }
                    '\\' => match chars.next() {
                        Some((_, e)) => text.push(e),
                        None => break,
                    },
                    c => text.push(c),
                }
            }
            if !closed {
                return Err(LexiconError::Syntax {
                    line: line_no,
                    column,
                    message: "unterminated string".into(),
                });
            }
            tokens.push((text, column, true));
        } else {
            let mut text = String::new();
            while let Some(&(_, c)) = chars.peek() {
                if c.is_whitespace() {
                    break;
                }
                text.push(c);
                chars.next();
            }
            tokens.push((text, column, false));
        }
    }
    Ok(tokens)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_all_directives() {
        let src = r#"
# animals
concept living_being
concept animal   # trailing comment
  has living_being +1
  gloss "a \"living\" # thing"
concept object
concept drink
  case agent animal 1
  case object object -0.5
oppose object living_being
"#;
        let lex = parse_lexicon(src).unwrap();
        assert_eq!(lex.declared_len(), 4);
        let animal = lex.entry(lex.id("animal").unwrap());
        assert_eq!(animal.gloss.as_deref(), Some("a \"living\" # thing"));
        let drink = lex.case_frame_of("drink").unwrap();
        assert_eq!(drink[&lex.case_id("object").unwrap()][0].value, -0.5);
        assert!(lex.are_opposed(lex.id("living_being").unwrap(), lex.id("object").unwrap()));
    }

    #[test]
    fn syntax_errors_carry_positions() {
        let e = parse_lexicon("concept a\n  has\n").unwrap_err();
        assert!(matches!(e, LexiconError::Syntax { line: 2, .. }));

        let e = parse_lexicon("  has a +1\n").unwrap_err();
        assert!(matches!(e, LexiconError::Syntax { line: 1, column: 3, .. }));

        let e = parse_lexicon("concept 9a\n").unwrap_err();
        assert!(matches!(e, LexiconError::Syntax { line: 1, column: 9, .. }));

        let e = parse_lexicon("concept a\n  case agent a lots\n").unwrap_err();
        assert!(matches!(e, LexiconError::Syntax { line: 2, column: 16, .. }));

        let e = parse_lexicon("concept a\n  gloss \"open\n").unwrap_err();
        assert!(matches!(e, LexiconError::Syntax { line: 2, .. }));

        let e = parse_lexicon("frobnicate a\n").unwrap_err();
        assert!(matches!(e, LexiconError::Syntax { line: 1, column: 1, .. }));

        let e = parse_lexicon("concept a\n  case agent a inf\n").unwrap_err();
        assert!(matches!(e, LexiconError::Syntax { .. }));
    }

    #[test]
    fn oppose_closes_concept_block() {
        let e = parse_lexicon("concept a\nconcept b\noppose a b\n  has a +1\n").unwrap_err();
        assert!(matches!(e, LexiconError::Syntax { line: 4, .. }));
    }
}
