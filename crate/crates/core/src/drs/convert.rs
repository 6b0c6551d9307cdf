//! Box structures to graphs and back.
//!
//! Main boxes and variables become nodes; binary conditions and operators
//! become edges. Each main box points at its head variable with a `Drs`
//! edge. Variables owned by presuppositional boxes get a presupposed label.
//! Variables left without a parent are re-attached by reversing their first
//! outgoing edge and appending `Of` to its label.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::{BoxStructure, Condition, ConditionKind, DrsBox, OperatorClause, PresupLink};
use crate::graph::{validate, Graph, GraphBuilder, NodeLabel, TripleSet};

pub const DRS_EDGE: &str = "Drs";
pub const REVERSAL_SUFFIX: &str = "Of";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConversionOptions {
    /// Role names that end in `Of` in the source data and must not be read
    /// back as reversed edges.
    pub native_of_roles: BTreeSet<String>,
}

impl Default for ConversionOptions {
    fn default() -> Self {
        ConversionOptions {
            native_of_roles: ["PartOf", "MemberOf", "SubOf"].into_iter().map(String::from).collect(),
        }
    }
}

impl ConversionOptions {
    fn is_reversed(&self, label: &str) -> bool {
        label.len() > REVERSAL_SUFFIX.len() && label.ends_with(REVERSAL_SUFFIX) && !self.native_of_roles.contains(label)
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum ConversionError {
    #[error("structure has no main box")]
    NoMainBox,
    #[error("expected one top box, found {0:?}")]
    TopBoxes(Vec<String>),
    #[error("operator {name} of {scope} points at presuppositional box {arg}")]
    OperatorOnPresupposition { scope: String, name: String, arg: String },
    #[error("variable {0} has no unary predicate")]
    Uninstantiated(String),
    #[error("variable {0} has no edges to re-attach it")]
    Isolated(String),
    #[error("role {0} cannot be told apart from a reversed edge")]
    AmbiguousRole(String),
    #[error("converted graph is ill-formed: {0}")]
    IllFormed(String),
    #[error("graph root {0} is not a box")]
    NoBoxRoot(String),
}

/// A successful conversion plus notes on information it could not carry.
#[derive(Debug, Clone, PartialEq)]
pub struct Conversion<T> {
    pub value: T,
    pub notes: Vec<String>,
}

pub fn boxes_to_graph(bs: &BoxStructure) -> Result<Conversion<Graph>, ConversionError> {
    boxes_to_graph_with(bs, &ConversionOptions::default())
}

fn title_case(name: &str) -> String {
    let mut chars = name.chars();
    match chars.next() {
        Some(first) => first.to_uppercase().chain(chars.flat_map(char::to_lowercase)).collect(),
        None => String::new(),
    }
}

/// The head of a box: first argument of its first binary condition, else
/// its first referent.
fn head_variable(b: &DrsBox) -> Option<&str> {
    b.conditions
        .iter()
        .find(|c| c.kind() == ConditionKind::Binary)
        .map(|c| c.args[0].as_str())
        .or_else(|| b.referents.first().map(String::as_str))
}

pub fn boxes_to_graph_with(bs: &BoxStructure, opts: &ConversionOptions) -> Result<Conversion<Graph>, ConversionError> {
    let mut notes = Vec::new();
    let main: Vec<&DrsBox> = bs.boxes.iter().filter(|b| !bs.is_presuppositional(&b.id)).collect();
    if main.is_empty() {
        return Err(ConversionError::NoMainBox);
    }

    // Nodes: main boxes, then every referent in box order.
    let mut ids: Vec<String> = Vec::new();
    let mut labels: Vec<NodeLabel> = Vec::new();
    let mut index: HashMap<&str, usize> = HashMap::new();
    for b in &main {
        index.insert(&b.id, ids.len());
        ids.push(b.id.clone());
        labels.push(NodeLabel::boxed());
    }
    for b in &bs.boxes {
        let presupposed = bs.is_presuppositional(&b.id);
        for r in &b.referents {
            let mut concepts = bs
                .conditions()
                .filter(|(_, c)| c.kind() == ConditionKind::Unary && c.args[0] == *r)
                .map(|(_, c)| c);
            let first = concepts.next().ok_or_else(|| ConversionError::Uninstantiated(r.clone()))?;
            for extra in concepts {
                notes.push(format!("dropped second concept {}({r})", extra.predicate));
            }
            let mut label = NodeLabel::new(first.predicate.clone()).presupposed(presupposed);
            label.sense = first.sense.clone();
            index.insert(r, ids.len());
            ids.push(r.clone());
            labels.push(label);
        }
    }

    let mut edges: Vec<Vec<(String, usize)>> = vec![Vec::new(); ids.len()];
    for b in &main {
        let src = index[b.id.as_str()];
        if let Some(head) = head_variable(b) {
            edges[src].push((DRS_EDGE.to_string(), index[head]));
        }
        for op in bs.operators.iter().filter(|op| op.scope == b.id) {
            let name = title_case(&op.name);
            for (k, arg) in op.args.iter().enumerate() {
                let target = *index.get(arg.as_str()).ok_or_else(|| ConversionError::OperatorOnPresupposition {
                    scope: op.scope.clone(),
                    name: op.name.clone(),
                    arg: arg.clone(),
                })?;
                let label = if op.args.len() > 1 { format!("{name}{}", k + 1) } else { name.clone() };
                edges[src].push((label, target));
            }
        }
    }
    for (_, c) in bs.conditions().filter(|(_, c)| c.kind() == ConditionKind::Binary) {
        if opts.is_reversed(&c.predicate) {
            return Err(ConversionError::AmbiguousRole(c.predicate.clone()));
        }
        edges[index[c.args[0].as_str()]].push((c.predicate.clone(), index[c.args[1].as_str()]));
    }

    let tops: Vec<String> = {
        let mut indeg = vec![0usize; ids.len()];
        for list in &edges {
            for (_, t) in list {
                indeg[*t] += 1;
            }
        }
        main.iter().filter(|b| indeg[index[b.id.as_str()]] == 0).map(|b| b.id.clone()).collect()
    };
    if tops.len() != 1 {
        return Err(ConversionError::TopBoxes(tops));
    }
    let root = index[tops[0].as_str()];

    repair_roots(&ids, &mut edges, main.len(), root, opts)?;

    let mut builder = GraphBuilder::new();
    for (id, label) in ids.iter().zip(labels) {
        builder.node(id.clone(), label);
    }
    for (src, list) in edges.into_iter().enumerate() {
        for (label, t) in list {
            builder.edge(src, label, t);
        }
    }
    let graph = builder.build(root).expect("edges only reference declared nodes");
    let report = validate(&graph);
    if !report.is_well_formed() {
        return Err(ConversionError::IllFormed(report.to_string()));
    }
    Ok(Conversion { value: graph, notes })
}

/// Repeatedly takes the lexicographically first non-box node without a
/// parent and reverses its first outgoing edge. Bounded by the edge count.
fn repair_roots(
    ids: &[String],
    edges: &mut [Vec<(String, usize)>],
    box_count: usize,
    root: usize,
    opts: &ConversionOptions,
) -> Result<(), ConversionError> {
    let budget: usize = edges.iter().map(Vec::len).sum();
    for _ in 0..=budget {
        let mut indeg = vec![0usize; ids.len()];
        for list in edges.iter() {
            for (_, t) in list {
                indeg[*t] += 1;
            }
        }
        let Some(orphan) = (box_count..ids.len()).filter(|&i| i != root && indeg[i] == 0).min_by_key(|&i| &ids[i]) else {
            return Ok(());
        };
        if edges[orphan].is_empty() {
            return Err(ConversionError::Isolated(ids[orphan].clone()));
        }
        let (label, target) = edges[orphan].remove(0);
        let reversed = format!("{label}{REVERSAL_SUFFIX}");
        if !opts.is_reversed(&reversed) {
            return Err(ConversionError::AmbiguousRole(label));
        }
        edges[target].push((reversed, orphan));
    }
    Err(ConversionError::IllFormed("edge reversal did not converge".into()))
}

pub fn graph_to_boxes(g: &Graph) -> Result<Conversion<BoxStructure>, ConversionError> {
    graph_to_boxes_with(g, &ConversionOptions::default())
}

fn split_operator(label: &str) -> (&str, Option<usize>) {
    let digits = label.len() - label.trim_end_matches(|c: char| c.is_ascii_digit()).len();
    if digits == 0 || digits == label.len() {
        return (label, None);
    }
    let (name, idx) = label.split_at(label.len() - digits);
    (name, idx.parse().ok())
}

pub fn graph_to_boxes_with(g: &Graph, opts: &ConversionOptions) -> Result<Conversion<BoxStructure>, ConversionError> {
    let root = g.root_node();
    if !root.sort.is_box() {
        return Err(ConversionError::NoBoxRoot(root.id.clone()));
    }
    let mut notes = Vec::new();
    let tree = g.spanning_tree();

    // Nearest box ancestor on the defining path.
    let mut owner = vec![usize::MAX; g.len()];
    for &i in &tree.order {
        owner[i] = if g.node(i).sort.is_box() {
            i
        } else {
            tree.parent[i].map(|(p, _)| owner[p]).unwrap_or(usize::MAX)
        };
    }

    let mut boxes: Vec<DrsBox> = Vec::new();
    let mut box_of_node: HashMap<usize, usize> = HashMap::new();
    for &i in &tree.order {
        if g.node(i).sort.is_box() {
            box_of_node.insert(i, boxes.len());
            boxes.push(DrsBox::new(g.node(i).id.clone()));
        }
    }

    let mut taken: BTreeSet<String> = g.nodes().iter().map(|n| n.id.clone()).collect();
    let mut fresh_box = || {
        let mut k = 1;
        loop {
            let name = format!("b{k}");
            if taken.insert(name.clone()) {
                return name;
            }
            k += 1;
        }
    };

    // Presupposition boxes, one per anchoring main box, in visit order.
    let mut presup_box: BTreeMap<usize, usize> = BTreeMap::new();
    let mut presuppositions = Vec::new();
    let mut home = vec![usize::MAX; g.len()];
    for &i in &tree.order {
        let node = g.node(i);
        if node.sort.is_box() {
            continue;
        }
        let anchor = box_of_node[&owner[i]];
        home[i] = if node.label.presupposed {
            *presup_box.entry(anchor).or_insert_with(|| {
                let name = fresh_box();
                presuppositions.push(PresupLink { presupposed: name.clone(), anchor: boxes[anchor].id.clone() });
                boxes.push(DrsBox::new(name));
                boxes.len() - 1
            })
        } else {
            anchor
        };
        let b = &mut boxes[home[i]];
        b.referents.push(node.id.clone());
        b.conditions.push(Condition {
            predicate: node.label.lemma.clone(),
            sense: node.label.sense.clone(),
            args: vec![node.id.clone()],
        });
    }

    let mut operators: Vec<OperatorClause> = Vec::new();
    for &i in &tree.order {
        let node = g.node(i);
        for e in &node.edges {
            let target = g.node(e.target);
            match (node.sort.is_box(), target.sort.is_box()) {
                (true, true) => {
                    let (name, idx) = split_operator(&e.label);
                    let name = name.to_uppercase();
                    let scope = node.id.clone();
                    let existing = operators
                        .iter_mut()
                        .find(|op| op.scope == scope && op.name == name && idx.is_some() && op.args.len() + 1 == idx.unwrap());
                    match existing {
                        Some(op) => op.args.push(target.id.clone()),
                        None => operators.push(OperatorClause { scope, name, args: vec![target.id.clone()] }),
                    }
                }
                (true, false) => {
                    if e.label != DRS_EDGE {
                        notes.push(format!("box edge {} read as {DRS_EDGE}", e.label));
                    }
                }
                (false, true) => notes.push(format!("dropped edge {} from {} to box {}", e.label, node.id, target.id)),
                (false, false) => {
                    let (pred, a, b) = if opts.is_reversed(&e.label) {
                        (&e.label[..e.label.len() - REVERSAL_SUFFIX.len()], e.target, i)
                    } else {
                        (e.label.as_str(), i, e.target)
                    };
                    boxes[home[a]].conditions.push(Condition::binary(pred, g.node(a).id.clone(), g.node(b).id.clone()));
                }
            }
        }
    }

    Ok(Conversion { value: BoxStructure { boxes, operators, presuppositions }, notes })
}

/// Clause-level triples used to score conversions: box and referent
/// instances, `REF` membership, concepts and senses as attributes, binary
/// conditions, operator operands and presupposition links.
pub fn clause_triples(bs: &BoxStructure) -> TripleSet {
    let mut t = TripleSet::default();
    for b in &bs.boxes {
        t.instance(&b.id, "box");
        for r in &b.referents {
            let sort: String = r.chars().take(1).collect();
            t.instance(r, &sort);
            t.relation(&b.id, "REF", r);
        }
    }
    for (_, c) in bs.conditions() {
        match c.kind() {
            ConditionKind::Unary => {
                t.attribute(&c.args[0], "concept", &c.predicate);
                if let Some(s) = &c.sense {
                    t.attribute(&c.args[0], "sense", s);
                }
            }
            ConditionKind::Binary => t.relation(&c.args[0], &c.predicate, &c.args[1]),
        }
    }
    for op in &bs.operators {
        for (k, arg) in op.args.iter().enumerate() {
            let label = if op.args.len() > 1 { format!("{}{}", op.name, k + 1) } else { op.name.clone() };
            t.relation(&op.scope, &label, arg);
        }
    }
    for p in &bs.presuppositions {
        t.relation(&p.presupposed, "PRESUP", &p.anchor);
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::drs::parse_clauses;
    use crate::graph::{parse_penman, print_penman};
    use crate::worked_example;

    #[test]
    fn worked_example_to_graph() {
        let bs = parse_clauses(worked_example::CLAUSES).unwrap();
        let conv = boxes_to_graph(&bs).unwrap();
        assert!(conv.notes.is_empty());
        let expected = parse_penman(worked_example::PENMAN).unwrap();
        assert_eq!(print_penman(&conv.value), print_penman(&expected));
        assert!(conv.value.is_isomorphic(&expected));
    }

    #[test]
    fn worked_example_back_to_boxes() {
        let g = parse_penman(worked_example::PENMAN).unwrap();
        let bs = graph_to_boxes(&g).unwrap().value;
        assert_eq!(bs.boxes.len(), 4);
        assert_eq!(bs.operators, vec![OperatorClause { scope: "b1".into(), name: "IMP".into(), args: vec!["b2".into(), "b3".into()] }]);
        assert_eq!(bs.presuppositions, vec![PresupLink { presupposed: "b4".into(), anchor: "b2".into() }]);
        let b3 = bs.get("b3").unwrap();
        let preds: BTreeSet<&str> = b3.conditions.iter().map(|c| c.predicate.as_str()).collect();
        assert_eq!(preds, ["Pivot", "Theme", "Topic", "anchor", "big", "need"].into_iter().collect());
        let topic = b3.conditions.iter().find(|c| c.predicate == "Topic").unwrap();
        assert_eq!(topic.args, ["s1", "x3"]);
        let b2 = bs.get("b2").unwrap();
        assert!(b2.conditions.contains(&Condition::binary("PartOf", "x1", "x2")));
        assert_eq!(bs.get("b4").unwrap().referents, ["x2"]);
    }

    #[test]
    fn one_box_one_referent() {
        let bs = parse_clauses("b1 REF x1\nb1 COND cat x1\n").unwrap();
        let g = boxes_to_graph(&bs).unwrap().value;
        assert_eq!(print_penman(&g), "(b1/□\n    :Drs (x1/cat))");
        let back = graph_to_boxes(&g).unwrap().value;
        assert_eq!(back, bs);
    }

    #[test]
    fn native_of_roles_survive_round_trip() {
        let bs = parse_clauses("b1 REF x1 x2\nb1 COND PartOf x1 x2\nb1 COND wheel x1\nb1 COND car x2\n").unwrap();
        let g = boxes_to_graph(&bs).unwrap().value;
        let back = graph_to_boxes(&g).unwrap().value;
        assert_eq!(back.boxes[0].conditions[2], Condition::binary("PartOf", "x1", "x2"));
    }

    #[test]
    fn reversing_a_native_of_role_doubles_the_suffix() {
        let bs = parse_clauses(
            "b1 REF e1 x1 x2\nb1 COND run e1\nb1 COND wheel x1\nb1 COND car x2\nb1 COND Agent e1 x2\nb1 COND PartOf x1 x2\n",
        )
        .unwrap();
        let g = boxes_to_graph(&bs).unwrap().value;
        assert!(g.edges().any(|(_, e)| e.label == "PartOfOf"));
        let back = graph_to_boxes(&g).unwrap().value;
        assert!(back.boxes[0].conditions.contains(&Condition::binary("PartOf", "x1", "x2")));
    }

    #[test]
    fn referent_without_edges_cannot_be_attached() {
        let bs = parse_clauses("b1 REF x2 x1\nb1 COND car x2\nb1 COND wheel x1\n").unwrap();
        assert_eq!(boxes_to_graph(&bs), Err(ConversionError::Isolated("x1".into())));
    }

    #[test]
    fn failures_are_reported() {
        let two_tops = parse_clauses("b1 REF x1\nb1 COND a x1\nb2 REF x2\nb2 COND b x2\n").unwrap();
        assert!(matches!(boxes_to_graph(&two_tops), Err(ConversionError::TopBoxes(_))));
        let bare = parse_clauses("b1 REF x1\n").unwrap();
        assert_eq!(boxes_to_graph(&bare), Err(ConversionError::Uninstantiated("x1".into())));
        let ambiguous = parse_clauses("b1 REF x1 x2\nb1 COND a x1\nb1 COND b x2\nb1 COND TopicOf x1 x2\n").unwrap();
        assert!(matches!(boxes_to_graph(&ambiguous), Err(ConversionError::AmbiguousRole(_))));
        let g = parse_penman("(x1/a)").unwrap();
        assert!(matches!(graph_to_boxes(&g), Err(ConversionError::NoBoxRoot(_))));
    }

    #[test]
    fn second_concept_is_noted() {
        let bs = parse_clauses("b1 REF x1\nb1 COND cat x1\nb1 COND pet x1\n").unwrap();
        let conv = boxes_to_graph(&bs).unwrap();
        assert_eq!(conv.notes.len(), 1);
    }

    #[test]
    fn unary_operator_is_unnumbered() {
        let bs = parse_clauses("b2 REF x1\nb2 COND cat x1\nb1 OP NOT b2\n").unwrap();
        let g = boxes_to_graph(&bs).unwrap().value;
        assert!(g.root_node().edges.iter().any(|e| e.label == "Not"));
        let back = graph_to_boxes(&g).unwrap().value;
        assert_eq!(back.operators, bs.operators);
    }
}
