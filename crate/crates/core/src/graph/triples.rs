use serde::{Deserialize, Serialize};

use super::Graph;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Instance {
    pub var: String,
    pub concept: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Attribute {
    pub var: String,
    pub name: String,
    pub value: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Relation {
    pub source: String,
    pub label: String,
    pub target: String,
}

/// The triple decomposition of a graph used for matching.
///
/// `tops` holds the variables linked from the implicit `TOP` node.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TripleSet {
    pub instances: Vec<Instance>,
    pub attributes: Vec<Attribute>,
    pub relations: Vec<Relation>,
    pub tops: Vec<String>,
}

impl TripleSet {
    pub fn len(&self) -> usize {
        self.instances.len() + self.attributes.len() + self.relations.len() + self.tops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Variables in first-instance order.
    pub fn variables(&self) -> Vec<&str> {
        let mut vars: Vec<&str> = Vec::new();
        for i in &self.instances {
            if !vars.contains(&i.var.as_str()) {
                vars.push(&i.var);
            }
        }
        vars
    }

    pub fn instance(&mut self, var: &str, concept: &str) {
        self.instances.push(Instance { var: var.into(), concept: concept.into() });
    }

    pub fn attribute(&mut self, var: &str, name: &str, value: &str) {
        self.attributes.push(Attribute { var: var.into(), name: name.into(), value: value.into() });
    }

    pub fn relation(&mut self, source: &str, label: &str, target: &str) {
        self.relations.push(Relation { source: source.into(), label: label.into(), target: target.into() });
    }
}

pub const INSTANCE: &str = "instance";
pub const SENSE: &str = "sense";
pub const PRESUPPOSED: &str = "presupposed";

/// One instance triple per node, a `sense` attribute per sense tag, a
/// `presupposed` attribute per presupposed node, a relation per edge and a
/// top triple for the root.
pub fn to_triples(g: &Graph) -> TripleSet {
    let mut t = TripleSet::default();
    for node in g.nodes() {
        t.instance(&node.id, &node.label.lemma);
        if let Some(sense) = &node.label.sense {
            t.attribute(&node.id, SENSE, sense);
        }
        if node.label.presupposed {
            t.attribute(&node.id, PRESUPPOSED, "true");
        }
    }
    for (src, e) in g.edges() {
        t.relation(&g.node(src).id, &e.label, &g.node(e.target).id);
    }
    t.tops.push(g.root_node().id.clone());
    t
}
