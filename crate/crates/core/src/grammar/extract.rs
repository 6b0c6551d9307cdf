use std::collections::HashMap;
use std::fmt;

use super::{EdgeItem, LabelSlot, Production, Target};
use crate::derive::Action;
use crate::graph::{validate, Graph, NodeLabel};

#[derive(Debug, Clone, thiserror::Error, PartialEq, Eq)]
pub enum ExtractError {
    #[error("graph is ill-formed: {0}")]
    IllFormed(String),
}

/// The unique production sequence of a graph together with its tree shape.
#[derive(Debug, Clone, PartialEq)]
pub struct Derivation {
    /// `GenFrag` and `GenLabel` actions in leftmost-rewrite order.
    pub actions: Vec<Action>,
    pub tree: DerivationTree,
}

impl Derivation {
    pub fn productions(&self) -> impl Iterator<Item = &Production> {
        self.actions.iter().filter_map(|a| match a {
            Action::GenFrag(p) => Some(p),
            _ => None,
        })
    }

    pub fn labels(&self) -> impl Iterator<Item = &NodeLabel> {
        self.actions.iter().filter_map(|a| match a {
            Action::GenLabel(l) => Some(l),
            _ => None,
        })
    }
}

/// One production application; `label` is the rewritten `L` leaf, if the
/// production has one.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivationTree {
    pub node: String,
    pub production: Production,
    pub label: Option<NodeLabel>,
    pub children: Vec<DerivationTree>,
}

impl DerivationTree {
    pub fn arity(&self) -> usize {
        self.children.len() + usize::from(self.label.is_some())
    }

    pub fn size(&self) -> usize {
        1 + self.children.iter().map(DerivationTree::size).sum::<usize>()
    }

    fn write_indented(&self, f: &mut fmt::Formatter<'_>, depth: usize) -> fmt::Result {
        writeln!(f, "{:indent$}{}: {}", "", self.node, self.production, indent = depth * 2)?;
        if let Some(l) = &self.label {
            writeln!(f, "{:indent$}L -> {l}", "", indent = depth * 2 + 2)?;
        }
        for c in &self.children {
            c.write_indented(f, depth + 1)?;
        }
        Ok(())
    }
}

impl fmt::Display for DerivationTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_indented(f, 0)
    }
}

/// Decomposes a well-formed graph into one production per node.
///
/// Nodes are visited depth-first along edge order; the first edge reaching
/// a node defines it and becomes a nonterminal call, later edges become
/// references. A node with several incoming edges is referenced by every
/// nonterminal between the lowest common ancestor of its incoming edges and
/// its definition. References are numbered left-side arguments first, then
/// locals, each group by first occurrence.
pub fn extract_derivation(g: &Graph) -> Result<Derivation, ExtractError> {
    let report = validate(g);
    if !report.is_well_formed() {
        return Err(ExtractError::IllFormed(report.to_string()));
    }
    let n = g.len();
    let tree = g.spanning_tree();
    let parent: Vec<Option<usize>> = tree.parent.iter().map(|p| p.map(|(q, _)| q)).collect();
    let mut depth = vec![0usize; n];
    for &v in &tree.order {
        if let Some(p) = parent[v] {
            depth[v] = depth[p] + 1;
        }
    }
    let lca = |mut a: usize, mut b: usize| {
        while depth[a] > depth[b] {
            a = parent[a].unwrap();
        }
        while depth[b] > depth[a] {
            b = parent[b].unwrap();
        }
        while a != b {
            a = parent[a].unwrap();
            b = parent[b].unwrap();
        }
        a
    };

    // Lowest common ancestor of the sources of each shared node.
    let mut anchor: Vec<Option<usize>> = vec![None; n];
    let indeg = g.in_degrees();
    for (src, e) in g.edges() {
        if indeg[e.target] >= 2 {
            anchor[e.target] = Some(match anchor[e.target] {
                Some(a) => lca(a, src),
                None => src,
            });
        }
    }

    let is_tree_edge = |v: usize, pos: usize, target: usize| tree.parent[target] == Some((v, pos));

    let mut externals: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut productions: Vec<Option<Production>> = vec![None; n];
    for &v in tree.order.iter().rev() {
        let node = g.node(v);
        let mut seen: Vec<usize> = Vec::new();
        let note = |u: usize, seen: &mut Vec<usize>| {
            if !seen.contains(&u) {
                seen.push(u);
            }
        };
        if anchor[v].is_some() {
            note(v, &mut seen);
        }
        for (pos, e) in node.edges.iter().enumerate() {
            if is_tree_edge(v, pos, e.target) {
                for &u in &externals[e.target] {
                    note(u, &mut seen);
                }
            } else {
                note(e.target, &mut seen);
            }
        }
        let (outer, local): (Vec<usize>, Vec<usize>) = seen.into_iter().partition(|&u| u == v || anchor[u] != Some(v));
        let index: HashMap<usize, usize> = outer.iter().chain(&local).enumerate().map(|(k, &u)| (u, k + 1)).collect();

        let items = node
            .edges
            .iter()
            .enumerate()
            .map(|(pos, e)| EdgeItem {
                label: e.label.clone(),
                target: if is_tree_edge(v, pos, e.target) {
                    Target::Call(externals[e.target].iter().map(|u| index[u]).collect())
                } else {
                    Target::Ref(index[&e.target])
                },
            })
            .collect();
        let label = if node.sort.is_box() && node.label.is_box() { LabelSlot::Box } else { LabelSlot::Open };
        let production = Production {
            lhs_rank: outer.len(),
            root_sort: node.sort,
            label,
            root_binds: anchor[v].map(|_| index[&v]),
            items,
        };
        debug_assert_eq!(production.check(), Ok(()), "{production}");
        productions[v] = Some(production);
        externals[v] = outer;
    }

    let mut actions = Vec::with_capacity(2 * n);
    for &v in &tree.order {
        let p = productions[v].clone().unwrap();
        let open = p.has_open_label();
        actions.push(Action::GenFrag(p));
        if open {
            actions.push(Action::GenLabel(g.node(v).label.clone()));
        }
    }

    fn build(g: &Graph, v: usize, productions: &[Option<Production>], tree_children: &[Vec<usize>]) -> DerivationTree {
        let production = productions[v].clone().unwrap();
        let label = production.has_open_label().then(|| g.node(v).label.clone());
        DerivationTree {
            node: g.node(v).id.clone(),
            production,
            label,
            children: tree_children[v].iter().map(|&c| build(g, c, productions, tree_children)).collect(),
        }
    }
    let mut tree_children = vec![Vec::new(); n];
    for &v in &tree.order {
        if let Some(p) = parent[v] {
            tree_children[p].push(v);
        }
    }
    let derivation_tree = build(g, g.root(), &productions, &tree_children);
    Ok(Derivation { actions, tree: derivation_tree })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::parse_penman;
    use crate::worked_example;

    #[test]
    fn worked_example_sequence() {
        let g = parse_penman(worked_example::PENMAN).unwrap();
        let d = extract_derivation(&g).unwrap();
        let text: Vec<String> = d.actions.iter().map(|a| a.to_string()).collect();
        assert_eq!(
            text,
            [
                "FRAG T0 -> (b/□ :Imp1 T1($1) :Imp2 T1($1))",
                "FRAG T1($1) -> (b/□ :Drs T1($1))",
                "FRAG T1(x) -> (x/L :PartOf T0)",
                "LABEL ship",
                "FRAG T0 -> (x/L)",
                "LABEL dock^p",
                "FRAG T1($1) -> (b/□ :Drs T1($1))",
                "FRAG T1($1) -> (e/L :Pivot $1 :Theme T0)",
                "LABEL need",
                "FRAG T0 -> (x/L :TopicOf T0)",
                "LABEL anchor",
                "FRAG T0 -> (s/L)",
                "LABEL big",
            ]
        );
        assert_eq!(d.tree.size(), 8);
        assert_eq!(d.tree.arity(), 2);
    }

    #[test]
    fn single_node() {
        let g = parse_penman("(x1/ship)").unwrap();
        let d = extract_derivation(&g).unwrap();
        assert_eq!(d.actions.len(), 2);
        assert_eq!(d.actions[0].to_string(), "FRAG T0 -> (x/L)");
        assert_eq!(d.actions[1].to_string(), "LABEL ship");
    }

    #[test]
    fn double_edge_to_one_child() {
        let g = parse_penman("(e1/see :Agent (x1/cat) :Theme x1)").unwrap();
        let d = extract_derivation(&g).unwrap();
        let p: Vec<String> = d.productions().map(|p| p.to_string()).collect();
        assert_eq!(p, ["T0 -> (e/L :Agent T1($1) :Theme $1)", "T1(x) -> (x/L)"]);
    }

    #[test]
    fn shared_node_defined_deep() {
        let g = parse_penman("(e1/a :A (e2/b :B (x1/c)) :C x1)").unwrap();
        let d = extract_derivation(&g).unwrap();
        let p: Vec<String> = d.productions().map(|p| p.to_string()).collect();
        assert_eq!(p, ["T0 -> (e/L :A T1($1) :C $1)", "T1($1) -> (e/L :B T1($1))", "T1(x) -> (x/L)"]);
    }
}
