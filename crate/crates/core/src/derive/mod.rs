//! Leftmost string rewriting over a grammar.
//!
//! A [`DerivationState`] holds the partially derived graph and a stack of
//! pending functions whose top is always the leftmost one. `GenFrag`
//! rewrites a `T_i` with a production, `GenLabel` rewrites an `L`, and a
//! reduce event fires automatically whenever a fragment has no pending
//! children left. Every completed derivation is a well-formed DAG: edges
//! either point into the subtree being derived or at nodes whose subtrees
//! are already complete, so no edge can close a cycle.

mod feasibility;
mod sample;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::grammar::{Grammar, LabelSlot, Production, ProductionParseError, Target};
use crate::graph::{Graph, GraphBuilder, NodeLabel, Sort};

pub use feasibility::Feasibility;
pub use sample::{parse_trace, replay, sample, trace, SampleError, TraceError};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Action {
    GenFrag(Production),
    GenLabel(NodeLabel),
    /// Never chosen; reduces are emitted by [`DerivationState::apply`].
    Reduce,
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::GenFrag(p) => write!(f, "FRAG {p}"),
            Action::GenLabel(l) => write!(f, "LABEL {l}"),
            Action::Reduce => f.write_str("REDUCE"),
        }
    }
}

#[derive(Debug, Clone, thiserror::Error, PartialEq, Eq)]
pub enum ActionParseError {
    #[error("unknown action `{0}`")]
    Unknown(String),
    #[error("bad label `{0}`")]
    Label(String),
    #[error(transparent)]
    Production(#[from] ProductionParseError),
}

impl FromStr for Action {
    type Err = ActionParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s == "REDUCE" {
            return Ok(Action::Reduce);
        }
        if let Some(p) = s.strip_prefix("FRAG ") {
            return Ok(Action::GenFrag(p.parse()?));
        }
        if let Some(l) = s.strip_prefix("LABEL ") {
            return NodeLabel::parse(l.trim()).map(Action::GenLabel).ok_or_else(|| ActionParseError::Label(l.to_string()));
        }
        Err(ActionParseError::Unknown(s.to_string()))
    }
}

/// A fragment whose subtree was completed by the last action.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Reduced {
    /// Index of the emitted node, in emission order.
    pub node: usize,
    /// Derivation-tree children of the fragment, label leaf included.
    pub children: usize,
}

#[derive(Debug, Clone, thiserror::Error, PartialEq, Eq)]
pub enum DeriveError {
    #[error("derivation is complete")]
    Complete,
    #[error("derivation is not complete")]
    Incomplete,
    #[error("production of rank {production} applied to T{frame}")]
    RankMismatch { frame: usize, production: usize },
    #[error("label action on a fragment nonterminal")]
    LabelOnFragment,
    #[error("fragment action on a label nonterminal")]
    FragmentOnLabel,
    #[error("reduce is applied automatically")]
    ExplicitReduce,
    #[error("reference ${0} is bound before its node is generated")]
    AlreadyBound(usize),
    #[error("reference ${0} is used before it can be bound")]
    UnboundReference(usize),
    #[error("invalid production: {0}")]
    InvalidProduction(String),
    #[error("empty label")]
    EmptyLabel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ItemTarget {
    Slot(usize),
    Hole(usize),
}

#[derive(Debug, Clone)]
struct Emitted {
    id: String,
    sort: Sort,
    label: Option<NodeLabel>,
    items: Vec<(String, ItemTarget)>,
    parent: Option<usize>,
    children: usize,
    pending: usize,
}

/// A nonterminal call site; hole 0 is the start symbol.
#[derive(Debug, Clone)]
struct Hole {
    args: Vec<usize>,
    filled: Option<usize>,
    depth: usize,
    parent: Option<usize>,
    incoming: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Frame {
    T(usize),
    L(usize),
}

/// The leftmost pending function.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Pending<'a> {
    Fragment {
        rank: usize,
        /// Per argument, whether it is already bound to a node.
        bound: Vec<bool>,
        depth: usize,
        /// Label of the edge leading here; `None` for the start symbol.
        incoming: Option<&'a str>,
    },
    Label {
        node: usize,
        sort: Sort,
    },
}

#[derive(Debug, Clone)]
pub struct DerivationState {
    nodes: Vec<Emitted>,
    slots: Vec<Option<usize>>,
    holes: Vec<Hole>,
    stack: Vec<Frame>,
    counters: BTreeMap<Sort, usize>,
    frags: usize,
    reduces: usize,
}

impl Default for DerivationState {
    fn default() -> Self {
        DerivationState::start()
    }
}

impl DerivationState {
    /// A single pending `T0`.
    pub fn start() -> Self {
        DerivationState {
            nodes: Vec::new(),
            slots: Vec::new(),
            holes: vec![Hole { args: Vec::new(), filled: None, depth: 0, parent: None, incoming: None }],
            stack: vec![Frame::T(0)],
            counters: BTreeMap::new(),
            frags: 0,
            reduces: 0,
        }
    }

    pub fn is_complete(&self) -> bool {
        self.stack.is_empty()
    }

    pub fn frag_count(&self) -> usize {
        self.frags
    }

    pub fn reduce_count(&self) -> usize {
        self.reduces
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn pending_count(&self) -> usize {
        self.stack.len()
    }

    pub fn node_id(&self, node: usize) -> &str {
        &self.nodes[node].id
    }

    pub fn top(&self) -> Option<Pending<'_>> {
        Some(match *self.stack.last()? {
            Frame::T(h) => {
                let hole = &self.holes[h];
                Pending::Fragment {
                    rank: hole.args.len(),
                    bound: hole.args.iter().map(|&s| self.slots[s].is_some()).collect(),
                    depth: hole.depth,
                    incoming: hole.incoming.as_deref(),
                }
            }
            Frame::L(n) => Pending::Label { node: n, sort: self.nodes[n].sort },
        })
    }

    /// Productions allowed by the nonterminal alone: all of them, or with
    /// `restrict` only those whose rank matches the pending `T_i`.
    pub fn applicable_productions(&self, grammar: &Grammar, restrict: bool) -> Result<Vec<usize>, DeriveError> {
        match self.top().ok_or(DeriveError::Complete)? {
            Pending::Fragment { rank, .. } => {
                Ok((0..grammar.len()).filter(|&i| !restrict || grammar.production(i).lhs_rank == rank).collect())
            }
            Pending::Label { .. } => Ok(Vec::new()),
        }
    }

    /// Actions for the pending nonterminal. Labels come from the grammar
    /// vocabulary followed by `extra_labels` not already in it.
    pub fn applicable_actions(&self, grammar: &Grammar, restrict: bool, extra_labels: &[NodeLabel]) -> Result<Vec<Action>, DeriveError> {
        match self.top().ok_or(DeriveError::Complete)? {
            Pending::Fragment { .. } => Ok(self
                .applicable_productions(grammar, restrict)?
                .into_iter()
                .map(|i| Action::GenFrag(grammar.production(i).clone()))
                .collect()),
            Pending::Label { .. } => {
                let mut labels: Vec<NodeLabel> = grammar.labels().cloned().collect();
                for l in extra_labels {
                    if grammar.find_label(l).is_none() && !labels.contains(l) {
                        labels.push(l.clone());
                    }
                }
                Ok(labels.into_iter().map(Action::GenLabel).collect())
            }
        }
    }

    fn fresh(&mut self, sort: Sort) -> String {
        let c = self.counters.entry(sort).or_insert(0);
        *c += 1;
        format!("{sort}{c}")
    }

    /// Checks `p` against the pending `T` frame without changing anything.
    pub fn check_production(&self, p: &Production) -> Result<(), DeriveError> {
        let hole = match self.stack.last() {
            None => return Err(DeriveError::Complete),
            Some(Frame::L(_)) => return Err(DeriveError::FragmentOnLabel),
            Some(&Frame::T(h)) => &self.holes[h],
        };
        if p.lhs_rank != hole.args.len() {
            return Err(DeriveError::RankMismatch { frame: hole.args.len(), production: p.lhs_rank });
        }
        p.check().map_err(|e| DeriveError::InvalidProduction(e.to_string()))?;
        let bound = |k: usize| k <= p.lhs_rank && self.slots[hole.args[k - 1]].is_some();
        check_bindings(p, bound)
    }

    /// Applies a generation action and returns the reduce events it
    /// triggered, innermost first. On error the state is unchanged.
    pub fn apply(&mut self, action: &Action) -> Result<Vec<Reduced>, DeriveError> {
        match action {
            Action::Reduce => Err(DeriveError::ExplicitReduce),
            Action::GenLabel(label) => self.apply_label(label),
            Action::GenFrag(p) => self.apply_frag(p),
        }
    }

    fn apply_label(&mut self, label: &NodeLabel) -> Result<Vec<Reduced>, DeriveError> {
        let node = match self.stack.last() {
            None => return Err(DeriveError::Complete),
            Some(Frame::T(_)) => return Err(DeriveError::LabelOnFragment),
            Some(&Frame::L(n)) => n,
        };
        if label.lemma.is_empty() {
            return Err(DeriveError::EmptyLabel);
        }
        self.stack.pop();
        self.nodes[node].label = Some(label.clone());
        let mut events = Vec::new();
        self.child_done(node, &mut events);
        Ok(events)
    }

    fn apply_frag(&mut self, p: &Production) -> Result<Vec<Reduced>, DeriveError> {
        self.check_production(p)?;
        let Some(Frame::T(h)) = self.stack.pop() else { unreachable!() };
        let depth = self.holes[h].depth;
        let parent = self.holes[h].parent;

        let mut slot_of: Vec<usize> = Vec::with_capacity(p.slot_count());
        slot_of.extend(&self.holes[h].args);
        while slot_of.len() < p.slot_count() {
            slot_of.push(self.slots.len());
            self.slots.push(None);
        }
        let node = self.nodes.len();
        let id = self.fresh(p.root_sort);
        if let Some(k) = p.root_binds {
            self.slots[slot_of[k - 1]] = Some(node);
        }
        let mut items = Vec::with_capacity(p.items.len());
        let mut calls = Vec::new();
        for item in &p.items {
            let target = match &item.target {
                Target::Ref(k) => ItemTarget::Slot(slot_of[k - 1]),
                Target::Call(args) => {
                    let hole = self.holes.len();
                    self.holes.push(Hole {
                        args: args.iter().map(|k| slot_of[k - 1]).collect(),
                        filled: None,
                        depth: depth + 1,
                        parent: Some(node),
                        incoming: Some(item.label.clone()),
                    });
                    calls.push(hole);
                    ItemTarget::Hole(hole)
                }
            };
            items.push((item.label.clone(), target));
        }
        let label = match &p.label {
            LabelSlot::Open => None,
            LabelSlot::Box => Some(NodeLabel::boxed()),
            LabelSlot::Constant(l) => Some(l.clone()),
        };
        let children = p.child_count();
        self.nodes.push(Emitted { id, sort: p.root_sort, label, items, parent, children, pending: children });
        self.holes[h].filled = Some(node);
        self.frags += 1;

        for &hole in calls.iter().rev() {
            self.stack.push(Frame::T(hole));
        }
        if p.has_open_label() {
            self.stack.push(Frame::L(node));
        }
        let mut events = Vec::new();
        if children == 0 {
            self.reduce(node, &mut events);
        }
        Ok(events)
    }

    fn child_done(&mut self, node: usize, events: &mut Vec<Reduced>) {
        self.nodes[node].pending -= 1;
        if self.nodes[node].pending == 0 {
            self.reduce(node, events);
        }
    }

    fn reduce(&mut self, node: usize, events: &mut Vec<Reduced>) {
        self.reduces += 1;
        events.push(Reduced { node, children: self.nodes[node].children });
        if let Some(parent) = self.nodes[node].parent {
            self.child_done(parent, events);
        }
    }

    /// The derived graph of a complete state.
    pub fn finish(&self) -> Result<Graph, DeriveError> {
        if !self.is_complete() {
            return Err(DeriveError::Incomplete);
        }
        let mut b = GraphBuilder::new();
        for n in &self.nodes {
            b.node(n.id.clone(), n.label.clone().expect("complete states label every node"));
        }
        for (i, n) in self.nodes.iter().enumerate() {
            for (label, target) in &n.items {
                let t = match *target {
                    ItemTarget::Slot(s) => self.slots[s].expect("complete states bind every reference"),
                    ItemTarget::Hole(h) => self.holes[h].filled.expect("complete states fill every call"),
                };
                b.edge(i, label.clone(), t);
            }
        }
        Ok(b.build(0).expect("complete states emit at least the root"))
    }

    /// The partially derived string: pending calls print as `T1($1)` with
    /// bound references shown by variable name, pending labels as `L`.
    pub fn render(&self) -> String {
        let mut out = String::new();
        self.render_hole(0, &mut out);
        out
    }

    fn slot_name(&self, s: usize) -> String {
        match self.slots[s] {
            Some(n) => self.nodes[n].id.clone(),
            None => format!("${}", s + 1),
        }
    }

    fn render_hole(&self, h: usize, out: &mut String) {
        let hole = &self.holes[h];
        match hole.filled {
            Some(n) => self.render_node(n, out),
            None => {
                out.push_str(&format!("T{}", hole.args.len()));
                if !hole.args.is_empty() {
                    let args: Vec<String> = hole.args.iter().map(|&s| self.slot_name(s)).collect();
                    out.push_str(&format!("({})", args.join(", ")));
                }
            }
        }
    }

    fn render_node(&self, n: usize, out: &mut String) {
        let node = &self.nodes[n];
        out.push('(');
        out.push_str(&node.id);
        out.push('/');
        match &node.label {
            Some(l) => out.push_str(&l.to_string()),
            None => out.push('L'),
        }
        for (label, target) in &node.items {
            out.push_str(" :");
            out.push_str(label);
            out.push(' ');
            match *target {
                ItemTarget::Slot(s) => out.push_str(&self.slot_name(s)),
                ItemTarget::Hole(h) => self.render_hole(h, out),
            }
        }
        out.push(')');
    }
}

/// Reference discipline at application time: the root may only bind an
/// unbound reference, and every unbound reference must be bound by the root
/// or handed to a call before a bare reference uses it.
fn check_bindings(p: &Production, bound: impl Fn(usize) -> bool) -> Result<(), DeriveError> {
    let mut will_bind = vec![false; p.slot_count() + 1];
    if let Some(k) = p.root_binds {
        if bound(k) {
            return Err(DeriveError::AlreadyBound(k));
        }
        will_bind[k] = true;
    }
    for item in &p.items {
        match &item.target {
            Target::Ref(k) => {
                if !bound(*k) && !will_bind[*k] {
                    return Err(DeriveError::UnboundReference(*k));
                }
            }
            Target::Call(args) => {
                for &k in args {
                    will_bind[k] = true;
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::{extract_derivation, EdgeItem};
    use crate::graph::{parse_penman, validate};
    use crate::worked_example;

    fn frag(s: &str) -> Action {
        Action::GenFrag(s.parse().unwrap())
    }

    fn label(s: &str) -> Action {
        Action::GenLabel(NodeLabel::parse(s).unwrap())
    }

    #[test]
    fn start_state() {
        let s = DerivationState::start();
        assert!(!s.is_complete());
        assert_eq!(s.render(), "T0");
        assert_eq!(s.finish(), Err(DeriveError::Incomplete));
    }

    #[test]
    fn single_node() {
        let mut s = DerivationState::start();
        assert!(s.apply(&frag("T0 -> (x/L)")).unwrap().is_empty());
        assert_eq!(s.render(), "(x1/L)");
        let events = s.apply(&label("ship")).unwrap();
        assert_eq!(events, [Reduced { node: 0, children: 1 }]);
        assert!(s.is_complete());
        assert_eq!(s.finish().unwrap(), parse_penman("(x1/ship)").unwrap());
        assert_eq!(s.apply(&label("ship")), Err(DeriveError::Complete));
    }

    #[test]
    fn misapplied_actions_leave_the_state_alone() {
        let mut s = DerivationState::start();
        s.apply(&frag("T0 -> (b/□ :Imp1 T1($1) :Imp2 T1($1))")).unwrap();
        let before = s.render();
        assert_eq!(s.apply(&frag("T0 -> (x/L)")), Err(DeriveError::RankMismatch { frame: 1, production: 0 }));
        assert_eq!(s.apply(&label("ship")), Err(DeriveError::LabelOnFragment));
        assert_eq!(s.apply(&Action::Reduce), Err(DeriveError::ExplicitReduce));
        let bad_ref = Production::leaf(Sort('e'), LabelSlot::Open).with_rank(1).with_item(EdgeItem::reference("A", 1));
        assert_eq!(s.apply(&Action::GenFrag(bad_ref)), Err(DeriveError::UnboundReference(1)));
        assert_eq!(s.render(), before);
        s.apply(&frag("T1(x) -> (x/L)")).unwrap();
        assert_eq!(s.apply(&frag("T0 -> (x/L)")), Err(DeriveError::FragmentOnLabel));
        s.apply(&label("cat")).unwrap();
        assert_eq!(s.apply(&frag("T1(x) -> (x/L)")), Err(DeriveError::AlreadyBound(1)));
    }

    #[test]
    fn worked_example_partial_strings() {
        let g = parse_penman(worked_example::PENMAN).unwrap();
        let d = extract_derivation(&g).unwrap();
        let mut s = DerivationState::start();
        let mut rendered = vec![s.render()];
        let mut reduces = Vec::new();
        for a in &d.actions {
            reduces.push(s.apply(a).unwrap().len());
            rendered.push(s.render());
        }
        assert_eq!(rendered[1], "(b1/□ :Imp1 T1($1) :Imp2 T1($1))");
        assert_eq!(rendered[2], "(b1/□ :Imp1 (b2/□ :Drs T1($1)) :Imp2 T1($1))");
        assert_eq!(rendered[3], "(b1/□ :Imp1 (b2/□ :Drs (x1/L :PartOf T0)) :Imp2 T1(x1))");
        assert_eq!(reduces[5], 3);
        assert_eq!(s.reduce_count(), s.frag_count());
        let out = s.finish().unwrap();
        assert!(validate(&out).is_well_formed());
        assert_eq!(out, g.canonicalize());
    }

    #[test]
    fn deferred_reference_resolves_downwards() {
        let mut s = DerivationState::start();
        for a in [
            frag("T0 -> (e/L :A T1($1) :C $1)"),
            label("a"),
            frag("T1($1) -> (e/L :B T1($1))"),
            label("b"),
            frag("T1(x) -> (x/L)"),
            label("c"),
        ] {
            s.apply(&a).unwrap();
        }
        let g = s.finish().unwrap();
        assert_eq!(g, parse_penman("(e1/a :A (e2/b :B (x1/c)) :C x1)").unwrap());
    }

    #[test]
    fn trace_lines_parse() {
        for line in ["FRAG T1(x) -> (x/L :PartOf T0)", "LABEL dock~n.01^p", "REDUCE"] {
            assert_eq!(line.parse::<Action>().unwrap().to_string(), line);
        }
        assert!("JUMP".parse::<Action>().is_err());
    }
}
