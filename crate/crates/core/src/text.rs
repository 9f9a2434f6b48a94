//! Line-based text format for programs.
//!
//! ```text
//! start S
//! S = A 'c' B          # quoted tokens are letters, bare ones variables
//! A = 'a' 'b'
//! B = cut A 0 1        # compressed indices into the derived word
//! C = rawcut A 1 2     # letter positions
//! D = tether A | a b | c |
//! ```

use std::collections::HashMap;
use std::fmt::Write as _;
use std::str::FromStr;
use std::sync::Arc;

use num_bigint::BigUint;
use thiserror::Error;

use crate::alphabet::{Alphabet, LetterId};
use crate::extensions::{CutKind, ExtError, Rhs, Tcslp};
use crate::slp::{Slp, SlpError, Symbol, VarId};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("missing `start` line")]
    MissingStart,
    #[error(transparent)]
    Program(#[from] ExtError),
    #[error(transparent)]
    Slp(#[from] SlpError),
}

const KEYWORDS: [&str; 4] = ["start", "cut", "rawcut", "tether"];

#[derive(Debug, Clone, PartialEq, Eq)]
enum Token {
    Letter(String),
    Word(String),
    Eq,
    Bar,
}

fn syntax(line: usize, message: impl Into<String>) -> ParseError {
    ParseError::Syntax {
        line,
        message: message.into(),
    }
}

fn tokenize(line_no: usize, line: &str) -> Result<Vec<Token>, ParseError> {
    let mut out = Vec::new();
    let mut chars = line.char_indices().peekable();
    while let Some(&(i, c)) = chars.peek() {
        match c {
            '#' => break,
            c if c.is_whitespace() => {
                chars.next();
            }
            '=' => {
                chars.next();
                out.push(Token::Eq);
            }
            '|' => {
                chars.next();
                out.push(Token::Bar);
            }
            '\'' => {
                chars.next();
                let rest = &line[i + 1..];
                let end = rest
                    .find('\'')
                    .ok_or_else(|| syntax(line_no, "unterminated quoted letter"))?;
                let name = &rest[..end];
                if name.is_empty() {
                    return Err(syntax(line_no, "empty quoted letter"));
                }
                out.push(Token::Letter(name.to_string()));
                for _ in 0..name.chars().count() + 1 {
                    chars.next();
                }
            }
            _ => {
                let rest = &line[i..];
                let end = rest
                    .find(|ch: char| ch.is_whitespace() || "=|'#".contains(ch))
                    .unwrap_or(rest.len());
                let word = &rest[..end];
                out.push(Token::Word(word.to_string()));
                for _ in 0..word.chars().count() {
                    chars.next();
                }
            }
        }
    }
    Ok(out)
}

/// Letters either come from a fixed alphabet or are interned on sight.
struct Letters {
    fixed: Option<Arc<Alphabet>>,
    fresh: Alphabet,
}

impl Letters {
    fn letter(&mut self, line: usize, name: &str) -> Result<LetterId, ParseError> {
        match &self.fixed {
            Some(a) => a
                .get(name)
                .ok_or_else(|| syntax(line, format!("unknown letter `{name}`"))),
            None => self
                .fresh
                .intern(name)
                .map_err(|e| syntax(line, e.to_string())),
        }
    }

    fn finish(self) -> Arc<Alphabet> {
        self.fixed.unwrap_or_else(|| Arc::new(self.fresh))
    }
}

struct Parsed {
    alphabet: Arc<Alphabet>,
    rules: Vec<Rhs>,
    start: VarId,
}

fn parse_number(line: usize, tok: Option<&Token>) -> Result<BigUint, ParseError> {
    match tok {
        Some(Token::Word(w)) => {
            BigUint::from_str(w).map_err(|_| syntax(line, format!("expected a nonnegative integer, found `{w}`")))
        }
        _ => Err(syntax(line, "expected a nonnegative integer")),
    }
}

fn parse_program(text: &str, alphabet: Option<Arc<Alphabet>>) -> Result<Parsed, ParseError> {
    let lines: Vec<(usize, Vec<Token>)> = text
        .lines()
        .enumerate()
        .map(|(i, l)| tokenize(i + 1, l).map(|t| (i + 1, t)))
        .filter(|r| !matches!(r, Ok((_, t)) if t.is_empty()))
        .collect::<Result<_, _>>()?;

    // first pass: declare variables
    let mut names: HashMap<String, VarId> = HashMap::new();
    let mut start_name: Option<(usize, String)> = None;
    for (line, toks) in &lines {
        match toks.as_slice() {
            [Token::Word(kw), Token::Word(name)] if kw == "start" => {
                if start_name.is_some() {
                    return Err(syntax(*line, "duplicate `start` line"));
                }
                start_name = Some((*line, name.clone()));
            }
            [Token::Word(name), Token::Eq, ..] => {
                if KEYWORDS.contains(&name.as_str()) {
                    return Err(syntax(*line, format!("`{name}` is reserved")));
                }
                if names.contains_key(name) {
                    return Err(syntax(*line, format!("variable `{name}` defined twice")));
                }
                let id = VarId(names.len() as u32);
                names.insert(name.clone(), id);
            }
            _ => return Err(syntax(*line, "expected `start NAME` or `NAME = ...`")),
        }
    }
    let (start_line, start_name) = start_name.ok_or(ParseError::MissingStart)?;
    let start = *names
        .get(&start_name)
        .ok_or_else(|| syntax(start_line, format!("unknown variable `{start_name}`")))?;

    let var = |line: usize, name: &str| {
        names
            .get(name)
            .copied()
            .ok_or_else(|| syntax(line, format!("unknown variable `{name}`")))
    };
    let mut letters = Letters {
        fixed: alphabet,
        fresh: Alphabet::new(),
    };
    let mut rules = Vec::with_capacity(names.len());
    for (line, toks) in &lines {
        let line = *line;
        if toks.len() == 2 && matches!(&toks[0], Token::Word(k) if k == "start") {
            continue;
        }
        let rhs = &toks[2..];
        let rule = match rhs.first() {
            Some(Token::Word(kw)) if kw == "cut" || kw == "rawcut" => {
                if rhs.len() != 4 {
                    return Err(syntax(line, format!("expected `{kw} VAR START END`")));
                }
                let Token::Word(target) = &rhs[1] else {
                    return Err(syntax(line, "expected a variable after the cut keyword"));
                };
                Rhs::Cut {
                    var: var(line, target)?,
                    start: parse_number(line, rhs.get(2))?,
                    end: parse_number(line, rhs.get(3))?,
                    kind: if kw == "cut" {
                        CutKind::Compressed
                    } else {
                        CutKind::Raw
                    },
                }
            }
            Some(Token::Word(kw)) if kw == "tether" => {
                let Some(Token::Word(target)) = rhs.get(1) else {
                    return Err(syntax(line, "expected a variable after `tether`"));
                };
                let target = var(line, target)?;
                let mut words: Vec<Vec<LetterId>> = Vec::new();
                let mut cur: Option<Vec<LetterId>> = None;
                for tok in &rhs[2..] {
                    match tok {
                        Token::Bar => {
                            if let Some(w) = cur.take() {
                                words.push(w);
                            }
                            cur = Some(Vec::new());
                        }
                        Token::Letter(n) | Token::Word(n) => match cur.as_mut() {
                            Some(w) => w.push(letters.letter(line, n)?),
                            None => return Err(syntax(line, "tether words must follow `|`")),
                        },
                        Token::Eq => return Err(syntax(line, "unexpected `=`")),
                    }
                }
                if let Some(w) = cur.take() {
                    if !w.is_empty() || words.len() < 2 {
                        words.push(w);
                    }
                }
                if words.len() != 2 {
                    return Err(syntax(line, "expected `tether VAR | LEFT | RIGHT`"));
                }
                let right = words.pop().unwrap_or_default();
                let left = words.pop().unwrap_or_default();
                Rhs::Tether {
                    var: target,
                    left,
                    right,
                }
            }
            _ => {
                let mut syms = Vec::with_capacity(rhs.len());
                for tok in rhs {
                    syms.push(match tok {
                        Token::Letter(n) => Symbol::Letter(letters.letter(line, n)?),
                        Token::Word(n) => Symbol::Var(var(line, n)?),
                        Token::Eq | Token::Bar => return Err(syntax(line, "unexpected symbol in right-hand side")),
                    });
                }
                Rhs::Seq(syms)
            }
        };
        rules.push(rule);
    }
    Ok(Parsed {
        alphabet: letters.finish(),
        rules,
        start,
    })
}

pub(crate) fn parse_slp(text: &str, alphabet: Option<Arc<Alphabet>>) -> Result<Slp, ParseError> {
    let p = parse_program(text, alphabet)?;
    let mut rules = Vec::with_capacity(p.rules.len());
    for rhs in p.rules {
        match rhs {
            Rhs::Seq(s) => rules.push(s),
            _ => {
                return Err(ParseError::Syntax {
                    line: 0,
                    message: "cut and tether rules are not allowed in a plain program".into(),
                })
            }
        }
    }
    Ok(Slp::from_rules(p.alphabet, rules, p.start)?)
}

pub(crate) fn parse_tcslp(text: &str, alphabet: Option<Arc<Alphabet>>, tether_bound: usize) -> Result<Tcslp, ParseError> {
    let p = parse_program(text, alphabet)?;
    Ok(Tcslp::from_rules(p.alphabet, p.rules, p.start, tether_bound)?)
}

fn write_seq(out: &mut String, alphabet: &Alphabet, syms: &[Symbol]) {
    for s in syms {
        match *s {
            Symbol::Letter(l) => {
                let _ = write!(out, " '{}'", alphabet.name(l));
            }
            Symbol::Var(v) => {
                let _ = write!(out, " {v}");
            }
        }
    }
}

pub(crate) fn write_slp(p: &Slp) -> String {
    let mut out = format!("start {}\n", p.start());
    for (i, rhs) in p.rules().iter().enumerate() {
        let _ = write!(out, "{} =", VarId(i as u32));
        write_seq(&mut out, p.alphabet(), rhs);
        out.push('\n');
    }
    out
}

pub(crate) fn write_tcslp(p: &Tcslp) -> String {
    let a = p.alphabet();
    let mut out = format!("start {}\n", p.start());
    for (i, rhs) in p.rules().iter().enumerate() {
        let _ = write!(out, "{} =", VarId(i as u32));
        match rhs {
            Rhs::Seq(s) => write_seq(&mut out, a, s),
            Rhs::Cut {
                var,
                start,
                end,
                kind,
            } => {
                let kw = match kind {
                    CutKind::Compressed => "cut",
                    CutKind::Raw => "rawcut",
                };
                let _ = write!(out, " {kw} {var} {start} {end}");
            }
            Rhs::Tether { var, left, right } => {
                let _ = write!(out, " tether {var} |");
                for &l in left {
                    let _ = write!(out, " '{}'", a.name(l));
                }
                out.push_str(" |");
                for &l in right {
                    let _ = write!(out, " '{}'", a.name(l));
                }
                out.push_str(" |");
            }
        }
        out.push('\n');
    }
    out
}
