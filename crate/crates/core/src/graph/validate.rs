use std::collections::HashSet;
use std::fmt;

use super::Graph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ViolationKind {
    MultipleRoots,
    Cycle,
    Disconnected,
    UnlabeledNode,
    DuplicateId,
}

impl ViolationKind {
    pub fn name(self) -> &'static str {
        match self {
            ViolationKind::MultipleRoots => "multiple-roots",
            ViolationKind::Cycle => "cycle",
            ViolationKind::Disconnected => "disconnected",
            ViolationKind::UnlabeledNode => "unlabeled-node",
            ViolationKind::DuplicateId => "duplicate-id",
        }
    }
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub kind: ViolationKind,
    pub detail: String,
}

/// Violated well-formedness criteria; empty means well-formed.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct WellFormednessReport {
    pub violations: Vec<Violation>,
}

impl WellFormednessReport {
    pub fn is_well_formed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn contains(&self, kind: ViolationKind) -> bool {
        self.violations.iter().any(|v| v.kind == kind)
    }

    pub fn kinds(&self) -> Vec<ViolationKind> {
        let mut kinds: Vec<_> = self.violations.iter().map(|v| v.kind).collect();
        kinds.sort();
        kinds.dedup();
        kinds
    }

    fn push(&mut self, kind: ViolationKind, detail: String) {
        self.violations.push(Violation { kind, detail });
    }
}

impl fmt::Display for WellFormednessReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return f.write_str("well-formed");
        }
        let parts: Vec<String> = self.violations.iter().map(|v| format!("{}: {}", v.kind, v.detail)).collect();
        f.write_str(&parts.join("; "))
    }
}

pub fn validate(g: &Graph) -> WellFormednessReport {
    let mut report = WellFormednessReport::default();
    let n = g.len();

    let mut seen = HashSet::new();
    for node in g.nodes() {
        if !seen.insert(node.id.as_str()) {
            report.push(ViolationKind::DuplicateId, node.id.clone());
        }
        if node.label.lemma.is_empty() {
            report.push(ViolationKind::UnlabeledNode, node.id.clone());
        }
    }

    let indeg = g.in_degrees();
    let roots: Vec<&str> = (0..n).filter(|&i| indeg[i] == 0).map(|i| g.node(i).id.as_str()).collect();
    if roots.len() > 1 {
        report.push(ViolationKind::MultipleRoots, roots.join(","));
    }

    if let Some(at) = find_cycle(g) {
        report.push(ViolationKind::Cycle, g.node(at).id.clone());
    }

    let reached = g.spanning_tree().order;
    if reached.len() < n {
        let mut hit = vec![false; n];
        for i in reached {
            hit[i] = true;
        }
        let missing: Vec<&str> = (0..n).filter(|&i| !hit[i]).map(|i| g.node(i).id.as_str()).collect();
        report.push(ViolationKind::Disconnected, missing.join(","));
    }
    report
}

/// Iterative three-colour DFS over all nodes; returns a node on a cycle.
fn find_cycle(g: &Graph) -> Option<usize> {
    #[derive(Clone, Copy, PartialEq)]
    enum Colour {
        White,
        Grey,
        Black,
    }
    let n = g.len();
    let mut colour = vec![Colour::White; n];
    for start in 0..n {
        if colour[start] != Colour::White {
            continue;
        }
        let mut stack = vec![(start, 0usize)];
        colour[start] = Colour::Grey;
        while let Some(top) = stack.last_mut() {
            let (node, pos) = *top;
            let edges = &g.node(node).edges;
            if pos == edges.len() {
                colour[node] = Colour::Black;
                stack.pop();
                continue;
            }
            top.1 += 1;
            let t = edges[pos].target;
            match colour[t] {
                Colour::Grey => return Some(t),
                Colour::White => {
                    colour[t] = Colour::Grey;
                    stack.push((t, 0));
                }
                Colour::Black => {}
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::super::{GraphBuilder, NodeLabel};
    use super::*;

    #[test]
    fn two_cycle_is_reported() {
        let mut b = GraphBuilder::new();
        let r = b.node("e1", NodeLabel::new("need"));
        let s = b.node("s1", NodeLabel::new("big"));
        let x = b.node("x3", NodeLabel::new("anchor"));
        b.edge(r, "Theme", x).edge(s, "Topic", x).edge(x, "TopicOf", s);
        let g = b.build(r).unwrap();
        let report = validate(&g);
        assert!(report.contains(ViolationKind::Cycle));
    }

    #[test]
    fn edgeless_pair_is_disconnected_and_multi_rooted() {
        let mut b = GraphBuilder::new();
        let a = b.node("x1", NodeLabel::new("a"));
        b.node("x2", NodeLabel::new("b"));
        let report = validate(&b.build(a).unwrap());
        assert_eq!(report.kinds(), vec![ViolationKind::MultipleRoots, ViolationKind::Disconnected]);
    }

    #[test]
    fn duplicate_and_unlabeled() {
        let mut b = GraphBuilder::new();
        let a = b.node("x1", NodeLabel::new("a"));
        let c = b.node("x1", NodeLabel::new(""));
        b.edge(a, "R", c);
        let report = validate(&b.build(a).unwrap());
        assert_eq!(report.kinds(), vec![ViolationKind::UnlabeledNode, ViolationKind::DuplicateId]);
    }
}
