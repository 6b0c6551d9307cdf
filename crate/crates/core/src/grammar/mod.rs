//! Restricted DAG grammars.
//!
//! A [`Production`] rewrites a ranked nonterminal `T_i($1, ..., $i)` into a
//! single node with its outgoing edges. Each edge points either at a
//! nonterminal call over variable references or at a bare reference.
//! [`extract_derivation`] decomposes a graph into its unique production
//! sequence; [`Grammar`] aggregates sequences over a corpus.

mod extract;
mod text;

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::graph::{Graph, NodeLabel, Sort};

pub use extract::{extract_derivation, Derivation, DerivationTree, ExtractError};
pub use text::{read_grammar, write_grammar, GrammarFileError, ProductionParseError};

/// What the right-hand-side node is labelled with.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LabelSlot {
    /// The label nonterminal `L`, rewritten by a separate step.
    Open,
    /// A fixed label.
    Constant(NodeLabel),
    /// The box label `□`.
    Box,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Target {
    /// `T_n($a, $b, ...)`; the rank is the argument count.
    Call(Vec<usize>),
    /// A bare reference `$k`.
    Ref(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EdgeItem {
    pub label: String,
    pub target: Target,
}

impl EdgeItem {
    pub fn call(label: impl Into<String>, args: Vec<usize>) -> Self {
        EdgeItem { label: label.into(), target: Target::Call(args) }
    }

    pub fn reference(label: impl Into<String>, k: usize) -> Self {
        EdgeItem { label: label.into(), target: Target::Ref(k) }
    }
}

/// `T_rank(...) -> (v/label :e1 t1 :e2 t2 ...)`.
///
/// Reference indices start at 1. Indices `1..=lhs_rank` are the left-hand
/// side arguments; larger ones are local to the right-hand side.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Production {
    pub lhs_rank: usize,
    pub root_sort: Sort,
    pub label: LabelSlot,
    /// The left-hand side argument naming the right-hand-side node, as in
    /// `T1(x) -> (x/L ...)`.
    pub root_binds: Option<usize>,
    pub items: Vec<EdgeItem>,
}

#[derive(Debug, Clone, thiserror::Error, PartialEq, Eq)]
pub enum ProductionError {
    #[error("reference ${0} is out of range")]
    OutOfRange(usize),
    #[error("argument ${0} never occurs on the right-hand side")]
    UnusedArgument(usize),
    #[error("local reference ${0} occurs fewer than twice")]
    LonelyLocal(usize),
    #[error("call repeats reference ${0}")]
    RepeatedArgument(usize),
    #[error("root-bound reference ${0} reappears on the right-hand side")]
    RootReused(usize),
    #[error("box label on a non-box node")]
    BoxSort,
}

impl Production {
    pub fn leaf(sort: Sort, label: LabelSlot) -> Self {
        Production { lhs_rank: 0, root_sort: sort, label, root_binds: None, items: Vec::new() }
    }

    pub fn with_item(mut self, item: EdgeItem) -> Self {
        self.items.push(item);
        self
    }

    pub fn binding_root(mut self, rank: usize, k: usize) -> Self {
        self.lhs_rank = rank;
        self.root_binds = Some(k);
        self
    }

    pub fn with_rank(mut self, rank: usize) -> Self {
        self.lhs_rank = rank;
        self
    }

    /// Highest reference index used anywhere.
    pub fn slot_count(&self) -> usize {
        let mut n = self.lhs_rank.max(self.root_binds.unwrap_or(0));
        for item in &self.items {
            match &item.target {
                Target::Call(args) => n = n.max(args.iter().copied().max().unwrap_or(0)),
                Target::Ref(k) => n = n.max(*k),
            }
        }
        n
    }

    pub fn calls(&self) -> impl Iterator<Item = &[usize]> {
        self.items.iter().filter_map(|i| match &i.target {
            Target::Call(args) => Some(args.as_slice()),
            Target::Ref(_) => None,
        })
    }

    pub fn call_count(&self) -> usize {
        self.calls().count()
    }

    pub fn has_open_label(&self) -> bool {
        self.label == LabelSlot::Open
    }

    /// Children of this fragment in the derivation tree: the label leaf, if
    /// any, then one per call.
    pub fn child_count(&self) -> usize {
        self.call_count() + usize::from(self.has_open_label())
    }

    /// References in right-hand-side order: the root binding, then item
    /// targets and call arguments left to right.
    pub fn occurrences(&self) -> Vec<usize> {
        let mut out: Vec<usize> = self.root_binds.into_iter().collect();
        for item in &self.items {
            match &item.target {
                Target::Call(args) => out.extend(args),
                Target::Ref(k) => out.push(*k),
            }
        }
        out
    }

    /// Checks the reference discipline of a well-formed production.
    pub fn check(&self) -> Result<(), ProductionError> {
        if self.label == LabelSlot::Box && !self.root_sort.is_box() {
            return Err(ProductionError::BoxSort);
        }
        let n = self.slot_count();
        let mut counts = vec![0usize; n + 1];
        if let Some(k) = self.root_binds {
            if k == 0 || k > self.lhs_rank {
                return Err(ProductionError::OutOfRange(k));
            }
        }
        for k in self.occurrences() {
            if k == 0 {
                return Err(ProductionError::OutOfRange(0));
            }
            counts[k] += 1;
        }
        for args in self.calls() {
            for (i, a) in args.iter().enumerate() {
                if args[..i].contains(a) {
                    return Err(ProductionError::RepeatedArgument(*a));
                }
            }
        }
        if let Some(k) = self.root_binds {
            if counts[k] > 1 {
                return Err(ProductionError::RootReused(k));
            }
        }
        for (k, &c) in counts.iter().enumerate().skip(1) {
            if k <= self.lhs_rank {
                if c == 0 {
                    return Err(ProductionError::UnusedArgument(k));
                }
            } else if c < 2 {
                return Err(ProductionError::LonelyLocal(k));
            }
        }
        Ok(())
    }
}

/// Aggregate statistics of a grammar.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrammarStats {
    pub instances: usize,
    pub failures: usize,
    pub fragments: usize,
    /// Mean rank over production types.
    pub avg_rank: f64,
    /// Mean rank over production occurrences.
    pub avg_rank_tokens: f64,
}

impl GrammarStats {
    /// Tabular rendering with columns `#inst. #frags avg. rank`.
    pub fn table(&self, per_token: bool) -> String {
        let rank = if per_token { self.avg_rank_tokens } else { self.avg_rank };
        format!("{:>8} {:>8} {:>10}\n{:>8} {:>8} {:>10.2}\n", "#inst.", "#frags", "avg. rank", self.instances, self.fragments, rank)
    }
}

/// Productions and labels with occurrence counts, in first-seen order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Grammar {
    productions: Vec<(Production, u64)>,
    labels: Vec<(NodeLabel, u64)>,
    production_index: HashMap<Production, usize>,
    label_index: HashMap<NodeLabel, usize>,
    instances: usize,
    failures: usize,
}

impl Grammar {
    pub fn new() -> Self {
        Grammar::default()
    }

    /// Builds a grammar from an explicit list of productions and labels,
    /// each counted once.
    pub fn from_parts(productions: impl IntoIterator<Item = Production>, labels: impl IntoIterator<Item = NodeLabel>) -> Self {
        let mut g = Grammar::new();
        for p in productions {
            g.add_production(p, 1);
        }
        for l in labels {
            g.add_label(l, 1);
        }
        g
    }

    pub fn add_production(&mut self, p: Production, count: u64) -> usize {
        match self.production_index.get(&p) {
            Some(&i) => {
                self.productions[i].1 += count;
                i
            }
            None => {
                let i = self.productions.len();
                self.production_index.insert(p.clone(), i);
                self.productions.push((p, count));
                i
            }
        }
    }

    pub fn add_label(&mut self, l: NodeLabel, count: u64) -> usize {
        match self.label_index.get(&l) {
            Some(&i) => {
                self.labels[i].1 += count;
                i
            }
            None => {
                let i = self.labels.len();
                self.label_index.insert(l.clone(), i);
                self.labels.push((l, count));
                i
            }
        }
    }

    /// Adds every step of a derivation and counts one instance.
    pub fn add_derivation(&mut self, d: &Derivation) {
        for p in d.productions() {
            self.add_production(p.clone(), 1);
        }
        for l in d.labels() {
            self.add_label(l.clone(), 1);
        }
        self.instances += 1;
    }

    pub fn record_failure(&mut self) {
        self.failures += 1;
    }

    pub(crate) fn set_counts(&mut self, instances: usize, failures: usize) {
        self.instances = instances;
        self.failures = failures;
    }

    pub fn len(&self) -> usize {
        self.productions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.productions.is_empty()
    }

    pub fn production(&self, i: usize) -> &Production {
        &self.productions[i].0
    }

    pub fn productions(&self) -> impl Iterator<Item = &Production> {
        self.productions.iter().map(|(p, _)| p)
    }

    pub fn production_counts(&self) -> impl Iterator<Item = (&Production, u64)> {
        self.productions.iter().map(|(p, c)| (p, *c))
    }

    pub fn find(&self, p: &Production) -> Option<usize> {
        self.production_index.get(p).copied()
    }

    pub fn label(&self, i: usize) -> &NodeLabel {
        &self.labels[i].0
    }

    pub fn labels(&self) -> impl Iterator<Item = &NodeLabel> {
        self.labels.iter().map(|(l, _)| l)
    }

    pub fn label_counts(&self) -> impl Iterator<Item = (&NodeLabel, u64)> {
        self.labels.iter().map(|(l, c)| (l, *c))
    }

    pub fn label_count(&self) -> usize {
        self.labels.len()
    }

    pub fn find_label(&self, l: &NodeLabel) -> Option<usize> {
        self.label_index.get(l).copied()
    }

    pub fn instances(&self) -> usize {
        self.instances
    }

    pub fn failures(&self) -> usize {
        self.failures
    }

    pub fn max_rank(&self) -> usize {
        self.productions()
            .flat_map(|p| std::iter::once(p.lhs_rank).chain(p.calls().map(<[usize]>::len)))
            .max()
            .unwrap_or(0)
    }

    pub fn stats(&self) -> GrammarStats {
        let types = self.productions.len();
        let tokens: u64 = self.productions.iter().map(|(_, c)| c).sum();
        let rank_sum: usize = self.productions().map(|p| p.lhs_rank).sum();
        let token_rank_sum: u64 = self.productions.iter().map(|(p, c)| p.lhs_rank as u64 * c).sum();
        GrammarStats {
            instances: self.instances,
            failures: self.failures,
            fragments: types,
            avg_rank: if types == 0 { 0.0 } else { rank_sum as f64 / types as f64 },
            avg_rank_tokens: if tokens == 0 { 0.0 } else { token_rank_sum as f64 / tokens as f64 },
        }
    }
}

/// A graph that could not be decomposed.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtractionFailure {
    pub index: usize,
    pub error: ExtractError,
}

/// Extracts every graph and aggregates the productions. Graphs that fail
/// extraction are skipped, logged and counted.
pub fn build_grammar<'a>(corpus: impl IntoIterator<Item = &'a Graph>) -> (Grammar, Vec<ExtractionFailure>) {
    let mut grammar = Grammar::new();
    let mut failures = Vec::new();
    for (index, g) in corpus.into_iter().enumerate() {
        match extract_derivation(g) {
            Ok(d) => grammar.add_derivation(&d),
            Err(error) => {
                log::warn!("graph {index}: {error}");
                grammar.record_failure();
                failures.push(ExtractionFailure { index, error });
            }
        }
    }
    (grammar, failures)
}

impl fmt::Display for LabelSlot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LabelSlot::Open => f.write_str("L"),
            LabelSlot::Box => f.write_str(crate::graph::BOX_LEMMA),
            LabelSlot::Constant(l) => write!(f, "\"{l}\""),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r6() -> Production {
        Production::leaf(Sort('e'), LabelSlot::Open)
            .with_rank(1)
            .with_item(EdgeItem::reference("Pivot", 1))
            .with_item(EdgeItem::call("Theme", vec![]))
    }

    #[test]
    fn reference_discipline() {
        assert_eq!(r6().check(), Ok(()));
        let r1 = Production::leaf(Sort::BOX, LabelSlot::Box)
            .with_item(EdgeItem::call("Imp1", vec![1]))
            .with_item(EdgeItem::call("Imp2", vec![1]));
        assert_eq!(r1.check(), Ok(()));
        let lonely = Production::leaf(Sort::BOX, LabelSlot::Box).with_item(EdgeItem::call("Imp1", vec![1]));
        assert_eq!(lonely.check(), Err(ProductionError::LonelyLocal(1)));
        let unused = Production::leaf(Sort('x'), LabelSlot::Open).with_rank(1);
        assert_eq!(unused.check(), Err(ProductionError::UnusedArgument(1)));
        let reused = Production::leaf(Sort('x'), LabelSlot::Open).binding_root(1, 1).with_item(EdgeItem::reference("A", 1));
        assert_eq!(reused.check(), Err(ProductionError::RootReused(1)));
        let repeated = Production::leaf(Sort('x'), LabelSlot::Open)
            .with_rank(1)
            .with_item(EdgeItem::call("A", vec![1, 1]));
        assert_eq!(repeated.check(), Err(ProductionError::RepeatedArgument(1)));
        let boxed = Production::leaf(Sort('x'), LabelSlot::Box);
        assert_eq!(boxed.check(), Err(ProductionError::BoxSort));
    }

    #[test]
    fn counts_and_stats() {
        let mut g = Grammar::new();
        assert_eq!(g.stats().fragments, 0);
        assert_eq!(g.stats().avg_rank, 0.0);
        g.add_production(r6(), 3);
        g.add_production(Production::leaf(Sort('x'), LabelSlot::Open), 1);
        g.add_production(r6(), 1);
        assert_eq!(g.len(), 2);
        let s = g.stats();
        assert_eq!(s.avg_rank, 0.5);
        assert_eq!(s.avg_rank_tokens, 0.8);
        assert!(s.table(false).contains("avg. rank"));
    }
}
