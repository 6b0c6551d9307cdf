use std::collections::HashSet;
use std::fmt::Write as _;

use super::{BoxStructure, Condition, DrsBox, OperatorClause, PresupLink};
use crate::graph::{Sort, SortSet};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum ClauseError {
    #[error("line {line}: unknown keyword `{keyword}`")]
    UnknownKeyword { line: usize, keyword: String },
    #[error("line {line}: {keyword} takes {expected}, got {got}")]
    Arity { line: usize, keyword: &'static str, expected: &'static str, got: usize },
    #[error("line {line}: undeclared box {name}")]
    UndeclaredBox { line: usize, name: String },
    #[error("line {line}: {name} is not a referent of any box")]
    UndeclaredReferent { line: usize, name: String },
    #[error("line {line}: referent {name} is declared twice")]
    DuplicateReferent { line: usize, name: String },
    #[error("line {line}: bad name `{name}`")]
    BadName { line: usize, name: String },
    #[error("document {index}: {source}")]
    InDocument {
        index: usize,
        #[source]
        source: Box<ClauseError>,
    },
}

/// Parses one document with the default sort set.
pub fn parse_clauses(text: &str) -> Result<BoxStructure, ClauseError> {
    parse_clauses_at(text, 1, &SortSet::default())
}

fn is_box_name(name: &str, sorts: &SortSet) -> bool {
    sorts.sort_of(name) == Some(Sort::BOX)
}

fn is_var_name(name: &str, sorts: &SortSet) -> bool {
    sorts.sort_of(name).is_some_and(|s| !s.is_box())
}

fn parse_clauses_at(text: &str, first_line: usize, sorts: &SortSet) -> Result<BoxStructure, ClauseError> {
    let mut bs = BoxStructure::default();
    // Box and variable references are resolved after the whole document is
    // read; remember where each was used.
    let mut box_uses: Vec<(usize, String)> = Vec::new();
    let mut var_uses: Vec<(usize, String)> = Vec::new();
    let mut referents: HashSet<String> = HashSet::new();

    for (offset, raw) in text.lines().enumerate() {
        let line = first_line + offset;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split(' ').filter(|f| !f.is_empty()).collect();
        let subject = fields[0];
        if !is_box_name(subject, sorts) {
            return Err(ClauseError::BadName { line, name: subject.to_string() });
        }
        let keyword = fields.get(1).copied().unwrap_or("");
        let args = &fields[fields.len().min(2)..];
        let index = match bs.boxes.iter().position(|b| b.id == subject) {
            Some(i) => i,
            None => {
                bs.boxes.push(DrsBox::new(subject));
                bs.boxes.len() - 1
            }
        };
        match keyword {
            "REF" => {
                if args.is_empty() {
                    return Err(ClauseError::Arity { line, keyword: "REF", expected: "at least 1 referent", got: 0 });
                }
                for &v in args {
                    if !is_var_name(v, sorts) {
                        return Err(ClauseError::BadName { line, name: v.to_string() });
                    }
                    if !referents.insert(v.to_string()) {
                        return Err(ClauseError::DuplicateReferent { line, name: v.to_string() });
                    }
                    bs.boxes[index].referents.push(v.to_string());
                }
            }
            "COND" => {
                if !(2..=3).contains(&args.len()) {
                    return Err(ClauseError::Arity {
                        line,
                        keyword: "COND",
                        expected: "a predicate and 1-2 arguments",
                        got: args.len().saturating_sub(1),
                    });
                }
                let (predicate, sense) = match args[0].split_once('~') {
                    Some((p, s)) => (p, Some(s.to_string())),
                    None => (args[0], None),
                };
                if predicate.is_empty() || sense.as_deref() == Some("") {
                    return Err(ClauseError::BadName { line, name: args[0].to_string() });
                }
                for &v in &args[1..] {
                    if !is_var_name(v, sorts) {
                        return Err(ClauseError::BadName { line, name: v.to_string() });
                    }
                    var_uses.push((line, v.to_string()));
                }
                bs.boxes[index].conditions.push(Condition {
                    predicate: predicate.to_string(),
                    sense,
                    args: args[1..].iter().map(|s| s.to_string()).collect(),
                });
            }
            "OP" => {
                if !(2..=3).contains(&args.len()) {
                    return Err(ClauseError::Arity {
                        line,
                        keyword: "OP",
                        expected: "a name and 1-2 box arguments",
                        got: args.len().saturating_sub(1),
                    });
                }
                let name = args[0];
                if !name.chars().all(|c| c.is_ascii_uppercase()) || name.is_empty() {
                    return Err(ClauseError::BadName { line, name: name.to_string() });
                }
                for &b in &args[1..] {
                    box_uses.push((line, b.to_string()));
                }
                bs.operators.push(OperatorClause {
                    scope: subject.to_string(),
                    name: name.to_string(),
                    args: args[1..].iter().map(|s| s.to_string()).collect(),
                });
            }
            "PRESUP" => {
                if args.len() != 1 {
                    return Err(ClauseError::Arity { line, keyword: "PRESUP", expected: "1 anchor box", got: args.len() });
                }
                box_uses.push((line, args[0].to_string()));
                bs.presuppositions.push(PresupLink { presupposed: subject.to_string(), anchor: args[0].to_string() });
            }
            other => return Err(ClauseError::UnknownKeyword { line, keyword: other.to_string() }),
        }
    }

    for (line, name) in box_uses {
        if bs.get(&name).is_none() {
            return Err(ClauseError::UndeclaredBox { line, name });
        }
    }
    for (line, name) in var_uses {
        if !referents.contains(&name) {
            return Err(ClauseError::UndeclaredReferent { line, name });
        }
    }
    Ok(bs)
}

/// Parses blank-line separated documents.
pub fn parse_clause_corpus(text: &str) -> Result<Vec<BoxStructure>, ClauseError> {
    let sorts = SortSet::default();
    crate::graph::blocks(text)
        .into_iter()
        .enumerate()
        .map(|(index, (line, block))| {
            parse_clauses_at(&block, line, &sorts).map_err(|e| ClauseError::InDocument { index, source: Box::new(e) })
        })
        .collect()
}

/// Prints a document: per box its referents and conditions, then operators,
/// then presupposition links.
pub fn print_clauses(bs: &BoxStructure) -> String {
    let mut out = String::new();
    for b in &bs.boxes {
        if !b.referents.is_empty() {
            let _ = writeln!(out, "{} REF {}", b.id, b.referents.join(" "));
        }
        for c in &b.conditions {
            let _ = write!(out, "{} COND {}", b.id, c.predicate);
            if let Some(s) = &c.sense {
                let _ = write!(out, "~{s}");
            }
            let _ = writeln!(out, " {}", c.args.join(" "));
        }
    }
    for op in &bs.operators {
        let _ = writeln!(out, "{} OP {} {}", op.scope, op.name, op.args.join(" "));
    }
    for p in &bs.presuppositions {
        let _ = writeln!(out, "{} PRESUP {}", p.presupposed, p.anchor);
    }
    out
}

pub fn print_clause_corpus<'a>(docs: impl IntoIterator<Item = &'a BoxStructure>) -> String {
    let mut out = String::new();
    for d in docs {
        out.push_str(&print_clauses(d));
        out.push('\n');
    }
    out
}
