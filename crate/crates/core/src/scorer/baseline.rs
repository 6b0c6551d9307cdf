use std::collections::{BTreeMap, HashSet};

use super::{decode, Decoder, Observed, ParseOptions, Parsed, ScorerError};
use crate::corpus::{Sentence, Token};
use crate::derive::{Action, DerivationState, Feasibility, Pending, Reduced};
use crate::grammar::{build_grammar, extract_derivation, Grammar};
use crate::graph::NodeLabel;

use super::model::START_EDGE;

/// Relative-frequency scorer keyed on the incoming edge label. Labels whose
/// lemma occurs in the sentence are preferred.
#[derive(Debug, Clone)]
pub struct CountModel {
    pub grammar: Grammar,
    frag: BTreeMap<(String, usize), f64>,
    prior: Vec<f64>,
    labels: BTreeMap<String, Vec<(NodeLabel, f64)>>,
    feasibility: Feasibility,
}

impl CountModel {
    pub fn new(sentences: &[Sentence]) -> CountModel {
        let (grammar, _) = build_grammar(sentences.iter().map(|s| &s.graph));
        let mut frag: BTreeMap<(String, usize), f64> = BTreeMap::new();
        let mut labels: BTreeMap<String, BTreeMap<NodeLabel, f64>> = BTreeMap::new();
        for s in sentences {
            let Ok(d) = extract_derivation(&s.graph) else { continue };
            let mut state = DerivationState::start();
            let mut edges: Vec<String> = Vec::new();
            for a in &d.actions {
                match (a, state.top()) {
                    (Action::GenFrag(p), Some(Pending::Fragment { incoming, .. })) => {
                        let edge = incoming.unwrap_or(START_EDGE).to_string();
                        if let Some(i) = grammar.find(p) {
                            *frag.entry((edge.clone(), i)).or_default() += 1.0;
                        }
                        edges.push(edge);
                    }
                    (Action::GenLabel(l), Some(Pending::Label { node, .. })) => {
                        *labels.entry(edges[node].clone()).or_default().entry(l.clone()).or_default() += 1.0;
                    }
                    _ => break,
                }
                if state.apply(a).is_err() {
                    break;
                }
            }
        }
        let labels = labels.into_iter().map(|(e, m)| (e, m.into_iter().collect())).collect();
        let feasibility = Feasibility::new(&grammar);
        let prior = grammar.production_counts().map(|(_, c)| c as f64).collect();
        CountModel { grammar, frag, prior, labels, feasibility }
    }

    pub fn parse(&self, tokens: &[Token], opts: &ParseOptions) -> Result<Parsed, ScorerError> {
        let mut s = CountSession { m: self, lemmas: tokens.iter().map(|t| t.lemma.clone()).collect(), node_edges: Vec::new(), pending: String::new() };
        decode(&mut s, &self.grammar, &self.feasibility, opts)
    }
}

struct CountSession<'a> {
    m: &'a CountModel,
    lemmas: HashSet<String>,
    node_edges: Vec<String>,
    pending: String,
}

impl Decoder for CountSession<'_> {
    fn frag_scores(&mut self, incoming: Option<&str>) -> Vec<f64> {
        let edge = incoming.unwrap_or(START_EDGE);
        self.pending = edge.to_string();
        (0..self.m.grammar.len())
            .map(|i| self.m.frag.get(&(edge.to_string(), i)).copied().unwrap_or(0.0) + 1e-3 * self.m.prior[i])
            .collect()
    }

    fn label(&mut self, node: usize) -> Result<NodeLabel, ScorerError> {
        let in_sentence = |l: &NodeLabel| if self.lemmas.contains(&l.lemma) { 1000.0 } else { 0.0 };
        let by_edge = self.m.labels.get(&self.node_edges[node]);
        let global: Vec<(NodeLabel, f64)>;
        let candidates = match by_edge {
            Some(c) => c,
            None => {
                global = self.m.grammar.label_counts().map(|(l, c)| (l.clone(), c as f64)).collect();
                &global
            }
        };
        candidates
            .iter()
            .map(|(l, c)| (l, c + in_sentence(l)))
            .fold(None::<(&NodeLabel, f64)>, |best, (l, s)| match best {
                Some((_, b)) if b >= s => best,
                _ => Some((l, s)),
            })
            .map(|(l, _)| l.clone())
            .ok_or(ScorerError::NoCandidates)
    }

    fn observe(&mut self, event: Observed<'_>, _reduced: &[Reduced]) {
        if let Observed::Frag { .. } = event {
            self.node_edges.push(std::mem::take(&mut self.pending));
        }
    }
}
