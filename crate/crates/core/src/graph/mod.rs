//! Node- and edge-labelled, edge-ordered, single-rooted DAGs.
//!
//! A [`Graph`] owns its nodes; each node owns its ordered list of outgoing
//! edges. Edge targets are node indices. Graphs are built with
//! [`GraphBuilder`] and are not mutated afterwards.

mod penman;
mod triples;
mod validate;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

pub use penman::{
    parse_corpus, parse_corpus_lenient, parse_corpus_with, parse_penman, parse_penman_with, print_corpus, print_penman, PenmanError,
};
pub(crate) use penman::blocks;
pub use triples::{to_triples, INSTANCE, PRESUPPOSED, SENSE, Attribute, Instance, Relation, TripleSet};
pub use validate::{validate, Violation, ViolationKind, WellFormednessReport};

/// Lemma used for box nodes (rendered `□`).
pub const BOX_LEMMA: &str = "□";

/// A variable sort: the leading letter of a variable name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Sort(pub char);

impl Sort {
    pub const BOX: Sort = Sort('b');

    pub fn is_box(self) -> bool {
        self == Sort::BOX
    }

    pub fn letter(self) -> char {
        self.0
    }
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// The set of admissible variable sorts. Defaults to `b x e s t`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SortSet {
    letters: Vec<char>,
}

impl SortSet {
    pub fn new(letters: impl IntoIterator<Item = char>) -> Self {
        let mut letters: Vec<char> = letters.into_iter().collect();
        letters.sort_unstable();
        letters.dedup();
        SortSet { letters }
    }

    pub fn contains(&self, sort: Sort) -> bool {
        self.letters.contains(&sort.0)
    }

    /// Sort of a variable name, if its leading letter is admissible and the
    /// remainder is non-empty.
    pub fn sort_of(&self, var: &str) -> Option<Sort> {
        let mut chars = var.chars();
        let first = chars.next()?;
        let rest = chars.as_str();
        if rest.is_empty() || !rest.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
            return None;
        }
        let sort = Sort(first);
        self.contains(sort).then_some(sort)
    }
}

impl Default for SortSet {
    fn default() -> Self {
        SortSet::new(['b', 'x', 'e', 's', 't'])
    }
}

/// A node label: lemma, optional sense tag and presupposition flag.
///
/// Text form is `lemma[~sense][^p]`, e.g. `dock~n.01^p`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NodeLabel {
    pub lemma: String,
    pub sense: Option<String>,
    pub presupposed: bool,
}

impl NodeLabel {
    pub fn new(lemma: impl Into<String>) -> Self {
        NodeLabel { lemma: lemma.into(), sense: None, presupposed: false }
    }

    pub fn boxed() -> Self {
        NodeLabel::new(BOX_LEMMA)
    }

    pub fn with_sense(mut self, sense: impl Into<String>) -> Self {
        self.sense = Some(sense.into());
        self
    }

    pub fn presupposed(mut self, flag: bool) -> Self {
        self.presupposed = flag;
        self
    }

    pub fn is_box(&self) -> bool {
        self.lemma == BOX_LEMMA
    }

    /// Parses `lemma[~sense][^p]`. Returns `None` on an empty lemma or sense.
    pub fn parse(text: &str) -> Option<NodeLabel> {
        let (body, presupposed) = match text.strip_suffix("^p") {
            Some(body) => (body, true),
            None => (text, false),
        };
        let (lemma, sense) = match body.split_once('~') {
            Some((lemma, sense)) => (lemma, Some(sense)),
            None => (body, None),
        };
        if lemma.is_empty() || sense.is_some_and(str::is_empty) {
            return None;
        }
        Some(NodeLabel {
            lemma: lemma.to_string(),
            sense: sense.map(str::to_string),
            presupposed,
        })
    }
}

impl fmt::Display for NodeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.lemma)?;
        if let Some(sense) = &self.sense {
            write!(f, "~{sense}")?;
        }
        if self.presupposed {
            f.write_str("^p")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Edge {
    pub label: String,
    pub target: usize,
    /// True iff this occurrence is printed as a bare reference.
    pub reentrant: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Node {
    pub id: String,
    pub sort: Sort,
    pub label: NodeLabel,
    pub edges: Vec<Edge>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Graph {
    nodes: Vec<Node>,
    root: usize,
}

impl Graph {
    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, index: usize) -> &Node {
        &self.nodes[index]
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn root_node(&self) -> &Node {
        &self.nodes[self.root]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.nodes.iter().map(|n| n.edges.len()).sum()
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n.id == id)
    }

    /// Iterates `(source, edge)` pairs in node order then edge order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, &Edge)> {
        self.nodes.iter().enumerate().flat_map(|(i, n)| n.edges.iter().map(move |e| (i, e)))
    }

    /// Number of incoming edges per node.
    pub fn in_degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.nodes.len()];
        for (_, e) in self.edges() {
            if let Some(d) = deg.get_mut(e.target) {
                *d += 1;
            }
        }
        deg
    }

    /// Depth-first pre-order from the root following edge order; each node
    /// is visited at its first occurrence. Returns, per visited node, the
    /// `(parent, edge position)` of its defining edge (`None` for the root).
    pub fn spanning_tree(&self) -> SpanningTree {
        let n = self.nodes.len();
        let mut order = Vec::with_capacity(n);
        let mut parent: Vec<Option<(usize, usize)>> = vec![None; n];
        let mut seen = vec![false; n];
        // Explicit stack of (node, next edge position).
        let mut stack = vec![(self.root, 0usize)];
        seen[self.root] = true;
        order.push(self.root);
        while let Some(top) = stack.last_mut() {
            let (node, p) = *top;
            let edges = &self.nodes[node].edges;
            if p >= edges.len() {
                stack.pop();
                continue;
            }
            top.1 += 1;
            let t = edges[p].target;
            if t < n && !seen[t] {
                seen[t] = true;
                parent[t] = Some((node, p));
                order.push(t);
                stack.push((t, 0));
            }
        }
        SpanningTree { order, parent }
    }

    /// Renames variables in depth-first visit order with per-sort counters
    /// starting at 1 and reorders nodes by visit order. Nodes unreachable
    /// from the root are appended after the reachable ones.
    pub fn canonicalize(&self) -> Graph {
        let tree = self.spanning_tree();
        let mut order = tree.order.clone();
        let mut reached = vec![false; self.nodes.len()];
        for &i in &order {
            reached[i] = true;
        }
        order.extend((0..self.nodes.len()).filter(|&i| !reached[i]));
        let mut new_index = vec![0; self.nodes.len()];
        for (k, &i) in order.iter().enumerate() {
            new_index[i] = k;
        }
        let mut counters: BTreeMap<Sort, usize> = BTreeMap::new();
        let nodes = order
            .iter()
            .map(|&i| {
                let old = &self.nodes[i];
                let c = counters.entry(old.sort).or_insert(0);
                *c += 1;
                Node {
                    id: format!("{}{}", old.sort, c),
                    sort: old.sort,
                    label: old.label.clone(),
                    edges: old
                        .edges
                        .iter()
                        .map(|e| Edge {
                            label: e.label.clone(),
                            target: new_index.get(e.target).copied().unwrap_or(usize::MAX),
                            reentrant: e.reentrant,
                        })
                        .collect(),
                }
            })
            .collect();
        Graph { nodes, root: 0 }
    }

    /// Isomorphism of edge-ordered rooted graphs: identity after canonical
    /// renaming.
    pub fn is_isomorphic(&self, other: &Graph) -> bool {
        self.canonicalize() == other.canonicalize()
    }

    /// Recomputes `reentrant` flags so that the first depth-first occurrence
    /// of every node is its defining one.
    fn mark_reentrancies(&mut self) {
        let tree = self.spanning_tree();
        for node in &mut self.nodes {
            for e in &mut node.edges {
                e.reentrant = true;
            }
        }
        for (child, link) in tree.parent.iter().enumerate() {
            if let Some((p, pos)) = *link {
                debug_assert_eq!(self.nodes[p].edges[pos].target, child);
                self.nodes[p].edges[pos].reentrant = false;
            }
        }
    }
}

/// Result of [`Graph::spanning_tree`].
#[derive(Debug, Clone)]
pub struct SpanningTree {
    /// Reachable nodes in pre-order.
    pub order: Vec<usize>,
    /// Defining edge `(parent, edge position)` per node.
    pub parent: Vec<Option<(usize, usize)>>,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum BuildError {
    #[error("graph has no nodes")]
    Empty,
    #[error("edge {label} from {source_id} points to unknown node index {target}")]
    DanglingEdge { source_id: String, label: String, target: usize },
}

/// Incremental construction of a [`Graph`].
#[derive(Debug, Default, Clone)]
pub struct GraphBuilder {
    nodes: Vec<Node>,
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a node; the sort is taken from the first character of `id`.
    pub fn node(&mut self, id: impl Into<String>, label: NodeLabel) -> usize {
        let id = id.into();
        let sort = Sort(id.chars().next().unwrap_or('?'));
        self.nodes.push(Node { id, sort, label, edges: Vec::new() });
        self.nodes.len() - 1
    }

    pub fn edge(&mut self, source: usize, label: impl Into<String>, target: usize) -> &mut Self {
        self.nodes[source].edges.push(Edge { label: label.into(), target, reentrant: false });
        self
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node_mut(&mut self, index: usize) -> &mut Node {
        &mut self.nodes[index]
    }

    /// Finishes the graph. Reentrancy flags are derived from depth-first
    /// order; no well-formedness check is made (see [`validate`]).
    pub fn build(self, root: usize) -> Result<Graph, BuildError> {
        if self.nodes.is_empty() {
            return Err(BuildError::Empty);
        }
        let n = self.nodes.len();
        for node in &self.nodes {
            for e in &node.edges {
                if e.target >= n {
                    return Err(BuildError::DanglingEdge {
                        source_id: node.id.clone(),
                        label: e.label.clone(),
                        target: e.target,
                    });
                }
            }
        }
        let mut g = Graph { nodes: self.nodes, root: root.min(n - 1) };
        g.mark_reentrancies();
        Ok(g)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn label_text_forms() {
        let l = NodeLabel::parse("dock~n.01^p").unwrap();
        assert_eq!(l.lemma, "dock");
        assert_eq!(l.sense.as_deref(), Some("n.01"));
        assert!(l.presupposed);
        assert_eq!(l.to_string(), "dock~n.01^p");
        assert_eq!(NodeLabel::parse("ship").unwrap().to_string(), "ship");
        assert!(NodeLabel::parse("").is_none());
        assert!(NodeLabel::parse("x~").is_none());
        assert!(NodeLabel::parse("^p").is_none());
    }

    #[test]
    fn sort_set_rejects_unknown_letters() {
        let sorts = SortSet::default();
        assert_eq!(sorts.sort_of("x12"), Some(Sort('x')));
        assert_eq!(sorts.sort_of("q1"), None);
        assert_eq!(sorts.sort_of("x"), None);
    }

    #[test]
    fn canonical_renaming_follows_visit_order() {
        let mut b = GraphBuilder::new();
        let e = b.node("e7", NodeLabel::new("need"));
        let x = b.node("x9", NodeLabel::new("anchor"));
        let y = b.node("x3", NodeLabel::new("ship"));
        b.edge(e, "Pivot", y).edge(e, "Theme", x);
        let g = b.build(e).unwrap().canonicalize();
        let ids: Vec<_> = g.nodes().iter().map(|n| n.id.as_str()).collect();
        assert_eq!(ids, ["e1", "x1", "x2"]);
        assert_eq!(g.node(1).label.lemma, "ship");
    }

    #[test]
    fn builder_rejects_dangling_edges() {
        let mut b = GraphBuilder::new();
        let a = b.node("x1", NodeLabel::new("a"));
        b.edge(a, "R", 5);
        assert!(matches!(b.build(a), Err(BuildError::DanglingEdge { .. })));
        assert_eq!(GraphBuilder::new().build(0), Err(BuildError::Empty));
    }
}
