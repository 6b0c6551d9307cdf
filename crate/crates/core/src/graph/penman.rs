//! PENMAN-style bracketed serialization.
//!
//! ```text
//! (b1/□ :Imp1 (b2/□ :Drs (x1/ship :PartOf (x2/dock^p))) :Imp2 ...)
//! ```
//!
//! The first textual occurrence of a variable is its defining subtree; later
//! bare occurrences are reentrant edges.

use std::collections::HashMap;
use std::fmt::Write as _;

use super::{Graph, GraphBuilder, NodeLabel, SortSet};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum PenmanError {
    #[error("unbalanced brackets at byte {0}")]
    Unbalanced(usize),
    #[error("unexpected token `{token}` at byte {offset}")]
    UnexpectedToken { token: String, offset: usize },
    #[error("unexpected end of input")]
    UnexpectedEnd,
    #[error("unbound variable {0}")]
    UnboundVariable(String),
    #[error("duplicate definition of variable {0}")]
    DuplicateVariable(String),
    #[error("empty relation :{0}")]
    EmptyRelation(String),
    #[error("variable {0} has an unknown sort")]
    UnknownSort(String),
    #[error("invalid label `{label}` for variable {var}")]
    InvalidLabel { var: String, label: String },
    #[error("graph {index} (line {line}): {source}")]
    InBlock {
        index: usize,
        line: usize,
        #[source]
        source: Box<PenmanError>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok<'a> {
    Open,
    Close,
    Slash,
    Role(&'a str),
    Symbol(&'a str),
}

fn tokenize(text: &str) -> Vec<(Tok<'_>, usize)> {
    let mut out = Vec::new();
    let bytes = text.as_bytes();
    let mut i = 0;
    let is_delim = |c: char| c.is_whitespace() || matches!(c, '(' | ')' | '/' | ':');
    while i < text.len() {
        let c = text[i..].chars().next().unwrap();
        match c {
            c if c.is_whitespace() => i += c.len_utf8(),
            '(' => {
                out.push((Tok::Open, i));
                i += 1;
            }
            ')' => {
                out.push((Tok::Close, i));
                i += 1;
            }
            '/' => {
                out.push((Tok::Slash, i));
                i += 1;
            }
            _ => {
                let start = i;
                let role = bytes[i] == b':';
                if role {
                    i += 1;
                }
                while i < text.len() {
                    let c = text[i..].chars().next().unwrap();
                    if is_delim(c) {
                        break;
                    }
                    i += c.len_utf8();
                }
                if role {
                    out.push((Tok::Role(&text[start + 1..i]), start));
                } else {
                    out.push((Tok::Symbol(&text[start..i]), start));
                }
            }
        }
    }
    out
}

struct Parser<'a, 's> {
    toks: Vec<(Tok<'a>, usize)>,
    pos: usize,
    sorts: &'s SortSet,
    builder: GraphBuilder,
    defined: HashMap<&'a str, usize>,
}

impl<'a> Parser<'a, '_> {
    fn peek(&self) -> Option<&Tok<'a>> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn next(&mut self) -> Result<(Tok<'a>, usize), PenmanError> {
        let t = self.toks.get(self.pos).cloned().ok_or(PenmanError::UnexpectedEnd)?;
        self.pos += 1;
        Ok(t)
    }

    fn unexpected(tok: &Tok<'_>, offset: usize) -> PenmanError {
        let token = match tok {
            Tok::Open => "(".to_string(),
            Tok::Close => ")".to_string(),
            Tok::Slash => "/".to_string(),
            Tok::Role(r) => format!(":{r}"),
            Tok::Symbol(s) => s.to_string(),
        };
        PenmanError::UnexpectedToken { token, offset }
    }

    /// node := '(' VAR '/' LABEL (ROLE (node | VAR))* ')'
    fn node(&mut self) -> Result<usize, PenmanError> {
        match self.next()? {
            (Tok::Open, _) => {}
            (t, o) => return Err(Self::unexpected(&t, o)),
        }
        let var = match self.next()? {
            (Tok::Symbol(s), _) => s,
            (t, o) => return Err(Self::unexpected(&t, o)),
        };
        let sort = self.sorts.sort_of(var).ok_or_else(|| PenmanError::UnknownSort(var.to_string()))?;
        if self.defined.contains_key(var) {
            return Err(PenmanError::DuplicateVariable(var.to_string()));
        }
        match self.next()? {
            (Tok::Slash, _) => {}
            (t, o) => return Err(Self::unexpected(&t, o)),
        }
        let label_text = match self.next()? {
            (Tok::Symbol(s), _) => s,
            (t, o) => return Err(Self::unexpected(&t, o)),
        };
        let label = NodeLabel::parse(label_text)
            .filter(|l| sort.is_box() == l.is_box() && !(l.is_box() && (l.sense.is_some() || l.presupposed)))
            .ok_or_else(|| PenmanError::InvalidLabel { var: var.to_string(), label: label_text.to_string() })?;
        let index = self.builder.node(var, label);
        self.defined.insert(var, index);
        loop {
            match self.next()? {
                (Tok::Close, _) => return Ok(index),
                (Tok::Role(role), o) => {
                    if role.is_empty() {
                        return Err(Self::unexpected(&Tok::Role(role), o));
                    }
                    let target = match self.peek() {
                        Some(Tok::Open) => self.node()?,
                        Some(Tok::Symbol(s)) => {
                            let s = *s;
                            self.pos += 1;
                            *self.defined.get(s).ok_or_else(|| PenmanError::UnboundVariable(s.to_string()))?
                        }
                        _ => return Err(PenmanError::EmptyRelation(role.to_string())),
                    };
                    self.builder.edge(index, role, target);
                }
                (t, o) => return Err(Self::unexpected(&t, o)),
            }
        }
    }
}

/// Parses one graph using the default sort set.
pub fn parse_penman(text: &str) -> Result<Graph, PenmanError> {
    parse_penman_with(text, &SortSet::default())
}

pub fn parse_penman_with(text: &str, sorts: &SortSet) -> Result<Graph, PenmanError> {
    let toks = tokenize(text);
    // Bracket balance is checked up front so that truncated input reports
    // as unbalanced rather than as an arbitrary unexpected token.
    let mut depth: i64 = 0;
    for (t, o) in &toks {
        match t {
            Tok::Open => depth += 1,
            Tok::Close => {
                depth -= 1;
                if depth < 0 {
                    return Err(PenmanError::Unbalanced(*o));
                }
            }
            _ => {}
        }
    }
    if depth != 0 {
        return Err(PenmanError::Unbalanced(text.len()));
    }
    let mut p = Parser { toks, pos: 0, sorts, builder: GraphBuilder::new(), defined: HashMap::new() };
    let root = p.node()?;
    if let Some((t, o)) = p.toks.get(p.pos) {
        return Err(Parser::unexpected(t, *o));
    }
    Ok(p.builder.build(root).expect("parser only creates edges to defined nodes"))
}

/// Parses a corpus: graphs separated by blank lines, `#` comment lines.
pub fn parse_corpus(text: &str) -> Result<Vec<Graph>, PenmanError> {
    parse_corpus_with(text, &SortSet::default())
}

pub fn parse_corpus_with(text: &str, sorts: &SortSet) -> Result<Vec<Graph>, PenmanError> {
    let mut graphs = Vec::new();
    for (line, block) in blocks(text) {
        let g = parse_penman_with(&block, sorts).map_err(|e| PenmanError::InBlock {
            index: graphs.len(),
            line,
            source: Box::new(e),
        })?;
        graphs.push(g);
    }
    Ok(graphs)
}

/// Parses every block independently, keeping failures in place.
pub fn parse_corpus_lenient(text: &str) -> Vec<Result<Graph, PenmanError>> {
    let sorts = SortSet::default();
    blocks(text).into_iter().map(|(_, block)| parse_penman_with(&block, &sorts)).collect()
}

/// Splits text into blank-line separated blocks with comments removed.
/// Yields the 1-based line number where each block starts.
pub(crate) fn blocks(text: &str) -> Vec<(usize, String)> {
    let mut out = Vec::new();
    let mut current = String::new();
    let mut start = 0;
    for (i, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.starts_with('#') {
            continue;
        }
        if trimmed.is_empty() {
            if !current.is_empty() {
                out.push((start, std::mem::take(&mut current)));
            }
            continue;
        }
        if current.is_empty() {
            start = i + 1;
        }
        current.push_str(line);
        current.push('\n');
    }
    if !current.is_empty() {
        out.push((start, current));
    }
    out
}

/// Canonical printing: one relation per line, four-space indentation, each
/// node written as a subtree at its first depth-first occurrence.
pub fn print_penman(g: &Graph) -> String {
    let mut out = String::new();
    let mut written = vec![false; g.len()];
    write_node(g, g.root(), 0, &mut written, &mut out);
    out
}

fn write_node(g: &Graph, index: usize, depth: usize, written: &mut [bool], out: &mut String) {
    written[index] = true;
    let node = g.node(index);
    let _ = write!(out, "({}/{}", node.id, node.label);
    for e in &node.edges {
        out.push('\n');
        for _ in 0..=depth {
            out.push_str("    ");
        }
        let _ = write!(out, ":{} ", e.label);
        if written[e.target] {
            out.push_str(&g.node(e.target).id);
        } else {
            write_node(g, e.target, depth + 1, written, out);
        }
    }
    out.push(')');
}

/// Prints graphs separated by blank lines.
pub fn print_corpus<'a>(graphs: impl IntoIterator<Item = &'a Graph>) -> String {
    let mut out = String::new();
    for g in graphs {
        out.push_str(&print_penman(g));
        out.push_str("\n\n");
    }
    out
}
