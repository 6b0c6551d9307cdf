//! Text forms of productions and grammars.
//!
//! Productions read `T1($1) -> (e/L :Pivot $1 :Theme T0)`. A left-hand
//! argument written as the right-hand variable's sort letter binds the
//! node itself, as in `T1(x) -> (x/L :PartOf T0)`. Constant labels are
//! quoted: `T0 -> (x/"speaker")`.
//!
//! A grammar file holds `# instances N` and `# failures N` headers, then one
//! `COUNT PRODUCTION` line per production and one `COUNT L -> LABEL` line per
//! label.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use super::{EdgeItem, Grammar, LabelSlot, Production, ProductionError, Target};
use crate::graph::{NodeLabel, Sort, BOX_LEMMA};

fn write_args(f: &mut fmt::Formatter<'_>, args: impl Iterator<Item = String>) -> fmt::Result {
    let args: Vec<String> = args.collect();
    if !args.is_empty() {
        write!(f, "({})", args.join(", "))?;
    }
    Ok(())
}

impl fmt::Display for Production {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "T{}", self.lhs_rank)?;
        write_args(
            f,
            (1..=self.lhs_rank).map(|k| if self.root_binds == Some(k) { self.root_sort.to_string() } else { format!("${k}") }),
        )?;
        write!(f, " -> ({}/{}", self.root_sort, self.label)?;
        for item in &self.items {
            write!(f, " :{} ", item.label)?;
            match &item.target {
                Target::Ref(k) => write!(f, "${k}")?,
                Target::Call(args) => {
                    write!(f, "T{}", args.len())?;
                    write_args(f, args.iter().map(|k| format!("${k}")))?;
                }
            }
        }
        f.write_str(")")
    }
}

#[derive(Debug, Clone, thiserror::Error, PartialEq, Eq)]
pub enum ProductionParseError {
    #[error("at column {pos}: expected {expected}")]
    Expected { pos: usize, expected: &'static str },
    #[error("left-hand argument {pos} must be ${pos} or the root variable")]
    BadArgument { pos: usize },
    #[error("nonterminal T{rank} has {args} arguments")]
    RankMismatch { rank: usize, args: usize },
    #[error("invalid label `{0}`")]
    BadLabel(String),
    #[error(transparent)]
    Invalid(#[from] ProductionError),
}

struct Cursor<'a> {
    chars: Vec<char>,
    pos: usize,
    _src: &'a str,
}

impl<'a> Cursor<'a> {
    fn new(src: &'a str) -> Self {
        Cursor { chars: src.chars().collect(), pos: 0, _src: src }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char, what: &'static str) -> Result<(), ProductionParseError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.error(what))
        }
    }

    fn error(&self, expected: &'static str) -> ProductionParseError {
        ProductionParseError::Expected { pos: self.pos, expected }
    }

    fn number(&mut self) -> Result<usize, ProductionParseError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.chars.len() && self.chars[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        let s: String = self.chars[start..self.pos].iter().collect();
        s.parse().map_err(|_| ProductionParseError::Expected { pos: start, expected: "a number" })
    }

    /// Characters up to whitespace or a closing bracket.
    fn word(&mut self) -> String {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.chars.len() && !self.chars[self.pos].is_whitespace() && self.chars[self.pos] != ')' {
            self.pos += 1;
        }
        self.chars[start..self.pos].iter().collect()
    }

    fn at_end(&mut self) -> bool {
        self.peek().is_none()
    }
}

/// Parses `T<n>` with an optional argument list; each argument is returned
/// verbatim.
fn nonterminal(c: &mut Cursor) -> Result<(usize, Vec<String>), ProductionParseError> {
    c.expect('T', "a nonterminal `T<n>`")?;
    let rank = c.number()?;
    let mut args = Vec::new();
    if c.eat('(') {
        loop {
            c.skip_ws();
            let start = c.pos;
            while c.pos < c.chars.len() && !matches!(c.chars[c.pos], ',' | ')') && !c.chars[c.pos].is_whitespace() {
                c.pos += 1;
            }
            if start == c.pos {
                return Err(c.error("an argument"));
            }
            args.push(c.chars[start..c.pos].iter().collect());
            if c.eat(')') {
                break;
            }
            c.expect(',', "`,` or `)`")?;
        }
    }
    if args.len() != rank {
        return Err(ProductionParseError::RankMismatch { rank, args: args.len() });
    }
    Ok((rank, args))
}

fn reference(s: &str) -> Option<usize> {
    s.strip_prefix('$')?.parse().ok().filter(|&k| k > 0)
}

impl FromStr for Production {
    type Err = ProductionParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut c = Cursor::new(s);
        let (lhs_rank, lhs_args) = nonterminal(&mut c)?;
        c.expect('-', "`->`")?;
        if c.chars.get(c.pos) != Some(&'>') {
            return Err(c.error("`->`"));
        }
        c.pos += 1;
        c.expect('(', "`(`")?;
        let root = c.peek().ok_or_else(|| c.error("a variable sort"))?;
        c.pos += 1;
        c.expect('/', "`/`")?;
        let label = match c.peek() {
            Some('"') => {
                c.pos += 1;
                let start = c.pos;
                while c.pos < c.chars.len() && c.chars[c.pos] != '"' {
                    c.pos += 1;
                }
                let text: String = c.chars[start..c.pos].iter().collect();
                c.expect('"', "closing `\"`")?;
                LabelSlot::Constant(NodeLabel::parse(&text).ok_or(ProductionParseError::BadLabel(text))?)
            }
            _ => match c.word().as_str() {
                "L" => LabelSlot::Open,
                BOX_LEMMA => LabelSlot::Box,
                other => return Err(ProductionParseError::BadLabel(other.to_string())),
            },
        };

        let mut root_binds = None;
        for (i, a) in lhs_args.iter().enumerate() {
            let pos = i + 1;
            if a.chars().eq(std::iter::once(root)) && root_binds.is_none() {
                root_binds = Some(pos);
            } else if reference(a) != Some(pos) {
                return Err(ProductionParseError::BadArgument { pos });
            }
        }

        let mut items = Vec::new();
        while c.eat(':') {
            let edge = c.word();
            if edge.is_empty() {
                return Err(c.error("an edge label"));
            }
            let target = match c.peek() {
                Some('$') => {
                    let w = c.word();
                    Target::Ref(reference(&w).ok_or_else(|| c.error("a reference `$k`"))?)
                }
                Some('T') => {
                    let (_, args) = nonterminal(&mut c)?;
                    let args = args.iter().map(|a| reference(a).ok_or_else(|| c.error("a reference `$k`"))).collect::<Result<_, _>>()?;
                    Target::Call(args)
                }
                _ => return Err(c.error("a reference or nonterminal")),
            };
            items.push(EdgeItem { label: edge, target });
        }
        c.expect(')', "`)`")?;
        if !c.at_end() {
            return Err(c.error("end of input"));
        }
        let p = Production { lhs_rank, root_sort: Sort(root), label, root_binds, items };
        p.check()?;
        Ok(p)
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum GrammarFileError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: {source}")]
    Production {
        line: usize,
        #[source]
        source: ProductionParseError,
    },
}

pub fn write_grammar(g: &Grammar) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# instances {}", g.instances());
    let _ = writeln!(out, "# failures {}", g.failures());
    for (p, c) in g.production_counts() {
        let _ = writeln!(out, "{c} {p}");
    }
    for (l, c) in g.label_counts() {
        let _ = writeln!(out, "{c} L -> {l}");
    }
    out
}

pub fn read_grammar(text: &str) -> Result<Grammar, GrammarFileError> {
    let mut g = Grammar::new();
    let (mut instances, mut failures) = (0, 0);
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() {
            continue;
        }
        let syntax = |message: &str| GrammarFileError::Syntax { line, message: message.to_string() };
        if let Some(comment) = trimmed.strip_prefix('#') {
            let mut parts = comment.split_whitespace();
            match (parts.next(), parts.next().map(str::parse::<usize>)) {
                (Some("instances"), Some(Ok(n))) => instances = n,
                (Some("failures"), Some(Ok(n))) => failures = n,
                (Some("instances" | "failures"), _) => return Err(syntax("bad header count")),
                _ => {}
            }
            continue;
        }
        let (count, rest) = trimmed.split_once(' ').ok_or_else(|| syntax("expected `COUNT ENTRY`"))?;
        let count: u64 = count.parse().map_err(|_| syntax("bad count"))?;
        let rest = rest.trim();
        if let Some(label) = rest.strip_prefix("L -> ") {
            let label = NodeLabel::parse(label.trim()).ok_or_else(|| syntax("bad label"))?;
            g.add_label(label, count);
        } else {
            let p: Production = rest.parse().map_err(|source| GrammarFileError::Production { line, source })?;
            g.add_production(p, count);
        }
    }
    g.set_counts(instances, failures);
    Ok(g)
}
