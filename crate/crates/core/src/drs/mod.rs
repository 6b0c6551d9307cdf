//! Discourse representation structures: the box data model, a line-oriented
//! clause format and conversion to and from graphs.
//!
//! Clause format, one clause per line, fields separated by single spaces:
//!
//! ```text
//! b2 REF x1
//! b2 COND ship~n.01 x1
//! b2 COND PartOf x1 x2
//! b1 OP IMP b2 b3
//! b4 PRESUP b2
//! ```
//!
//! A box is declared by appearing as the subject of a clause. Documents are
//! separated by blank lines; `#` starts a comment line.

mod clauses;
mod convert;

use serde::{Deserialize, Serialize};

pub use clauses::{parse_clause_corpus, parse_clauses, print_clause_corpus, print_clauses, ClauseError};
pub use convert::{
    boxes_to_graph, boxes_to_graph_with, clause_triples, graph_to_boxes, graph_to_boxes_with, Conversion,
    ConversionError, ConversionOptions,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConditionKind {
    Unary,
    Binary,
}

/// A unary predicate `ship(x1)` or a binary relation `PartOf(x1, x2)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Condition {
    pub predicate: String,
    pub sense: Option<String>,
    pub args: Vec<String>,
}

impl Condition {
    pub fn unary(predicate: impl Into<String>, arg: impl Into<String>) -> Self {
        Condition { predicate: predicate.into(), sense: None, args: vec![arg.into()] }
    }

    pub fn binary(predicate: impl Into<String>, a: impl Into<String>, b: impl Into<String>) -> Self {
        Condition { predicate: predicate.into(), sense: None, args: vec![a.into(), b.into()] }
    }

    pub fn with_sense(mut self, sense: impl Into<String>) -> Self {
        self.sense = Some(sense.into());
        self
    }

    pub fn kind(&self) -> ConditionKind {
        if self.args.len() == 1 {
            ConditionKind::Unary
        } else {
            ConditionKind::Binary
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DrsBox {
    pub id: String,
    pub referents: Vec<String>,
    pub conditions: Vec<Condition>,
}

impl DrsBox {
    pub fn new(id: impl Into<String>) -> Self {
        DrsBox { id: id.into(), referents: Vec::new(), conditions: Vec::new() }
    }
}

/// A logical operator or discourse relation over boxes, e.g. `b1 OP IMP b2 b3`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OperatorClause {
    pub scope: String,
    pub name: String,
    pub args: Vec<String>,
}

/// `presupposed PRESUP anchor`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PresupLink {
    pub presupposed: String,
    pub anchor: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoxStructure {
    pub boxes: Vec<DrsBox>,
    pub operators: Vec<OperatorClause>,
    pub presuppositions: Vec<PresupLink>,
}

impl BoxStructure {
    pub fn is_empty(&self) -> bool {
        self.boxes.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&DrsBox> {
        self.boxes.iter().find(|b| b.id == id)
    }

    pub fn is_presuppositional(&self, id: &str) -> bool {
        self.presuppositions.iter().any(|p| p.presupposed == id)
    }

    /// Box owning a referent.
    pub fn owner_of(&self, var: &str) -> Option<&DrsBox> {
        self.boxes.iter().find(|b| b.referents.iter().any(|r| r == var))
    }

    pub fn conditions(&self) -> impl Iterator<Item = (&DrsBox, &Condition)> {
        self.boxes.iter().flat_map(|b| b.conditions.iter().map(move |c| (b, c)))
    }
}
