use std::collections::HashMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::features::{FeatureVocabs, TokenFeatures, Vocab, UNK};
use super::params::ParamStore;
use super::tape::{softmax_values, Tape, Var};
use super::ScorerError;
use crate::corpus::{Sentence, Token};
use crate::derive::{Action, DerivationState, Feasibility, Pending};
use crate::grammar::{extract_derivation, Grammar, LabelSlot};
use crate::graph::{Graph, NodeLabel, BOX_LEMMA};

/// Edge symbol for the start nonterminal, which has no incoming edge.
pub const START_EDGE: &str = "<start>";

/// Layer sizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct Dims {
    pub word: usize,
    pub pretrained: usize,
    /// Lemma, part-of-speech, semantic tag and dependency embeddings.
    pub feature: usize,
    /// Encoder and decoder recurrent size.
    pub hidden: usize,
    /// Fragment, terminal and edge-label embeddings.
    pub fragment: usize,
    /// Learned scalar weight per input feature class.
    pub feature_gates: bool,
}

impl Default for Dims {
    fn default() -> Self {
        Dims { word: 128, pretrained: 100, feature: 50, hidden: 150, fragment: 50, feature_gates: false }
    }
}

impl Dims {
    /// Small sizes for laptop-scale runs.
    pub fn desk() -> Self {
        Dims { word: 16, pretrained: 8, feature: 8, hidden: 24, fragment: 16, feature_gates: false }
    }

    pub fn is_valid(&self) -> bool {
        [self.word, self.pretrained, self.feature, self.hidden, self.fragment].iter().all(|&d| d > 0)
    }

    fn input(&self) -> usize {
        self.word + self.pretrained + 4 * self.feature
    }
}

/// Parameter block indices.
#[derive(Debug, Clone)]
pub(crate) struct Ids {
    pub(crate) feature_tables: [usize; 6],
    pub(crate) gates: Option<usize>,
    pub(crate) w1: usize,
    pub(crate) b1: usize,
    pub(crate) fwd: (usize, usize),
    pub(crate) bwd: (usize, usize),
    pub(crate) fragment: usize,
    pub(crate) terminal: usize,
    pub(crate) edge: usize,
    pub(crate) stack: (usize, usize),
    pub(crate) compose: (usize, usize),
    pub(crate) frag: Head,
    pub(crate) label: Head,
    pub(crate) w5: usize,
    pub(crate) gate: (usize, usize),
    pub(crate) sense: (usize, usize),
    pub(crate) presup: (usize, usize),
}

/// Attention plus output map: `y = W3·c + W4·e + b`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Head {
    pub(crate) w2: usize,
    pub(crate) w3: usize,
    pub(crate) w4: usize,
    pub(crate) b: usize,
}

const FEATURE_TABLES: [&str; 6] = ["emb.word", "emb.pretrained", "emb.lemma", "emb.pos", "emb.semtag", "emb.dep"];

impl Ids {
    fn locate(p: &ParamStore) -> Result<Ids, ScorerError> {
        let f = |name: &str| p.find(name).ok_or_else(|| ScorerError::Checkpoint(format!("missing tensor {name}")));
        let head = |prefix: &str| -> Result<Head, ScorerError> {
            Ok(Head { w2: f(&format!("{prefix}.w2"))?, w3: f(&format!("{prefix}.w3"))?, w4: f(&format!("{prefix}.w4"))?, b: f(&format!("{prefix}.b"))? })
        };
        let mut tables = [0; 6];
        for (slot, name) in tables.iter_mut().zip(FEATURE_TABLES) {
            *slot = f(name)?;
        }
        Ok(Ids {
            feature_tables: tables,
            gates: p.find("enc.gates"),
            w1: f("enc.w1")?,
            b1: f("enc.b1")?,
            fwd: (f("enc.fwd.w")?, f("enc.fwd.b")?),
            bwd: (f("enc.bwd.w")?, f("enc.bwd.b")?),
            fragment: f("emb.fragment")?,
            terminal: f("emb.terminal")?,
            edge: f("emb.edge")?,
            stack: (f("stack.w")?, f("stack.b")?),
            compose: (f("compose.w")?, f("compose.b")?),
            frag: head("frag")?,
            label: head("label")?,
            w5: f("copy.w5")?,
            gate: (f("gate.v")?, f("gate.b")?),
            sense: (f("sense.w")?, f("sense.b")?),
            presup: (f("presup.w")?, f("presup.b")?),
        })
    }
}

fn add_lstm(p: &mut ParamStore, name: &str, input: usize, hidden: usize, rng: &mut ChaCha8Rng) {
    p.add_random(&format!("{name}.w"), 4 * hidden, input + hidden, rng);
    let mut b = vec![0.0; 4 * hidden];
    b[hidden..2 * hidden].iter_mut().for_each(|x| *x = 1.0);
    p.add(&format!("{name}.b"), 4 * hidden, 1, b);
}

/// The encoder/stack-decoder action model together with its grammar and
/// vocabularies.
#[derive(Debug, Clone)]
pub struct Model {
    pub dims: Dims,
    pub grammar: Grammar,
    pub features: FeatureVocabs,
    /// Terminal embeddings, keyed by lemma.
    pub terminals: Vocab,
    /// Lemmas the generate branch can produce; item `k` is output `k - 1`.
    pub constants: Vocab,
    /// Sense tags; the empty string means no sense.
    pub senses: Vocab,
    pub edges: Vocab,
    pub params: ParamStore,
    pub(crate) ids: Ids,
    pub(crate) feasibility: Feasibility,
}

/// A training sentence with its gold decisions precomputed.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub tokens: Vec<Token>,
    pub features: Vec<TokenFeatures>,
    pub graph: Graph,
    pub(crate) steps: Vec<GoldStep>,
}

impl Prepared {
    /// Number of scored decisions.
    pub fn action_count(&self) -> usize {
        self.steps.len()
    }
}

#[derive(Debug, Clone)]
pub(crate) enum GoldStep {
    Frag {
        edge: usize,
        mask: Vec<usize>,
        target: usize,
        production: usize,
        node: usize,
        term: Option<usize>,
        reduces: Vec<usize>,
    },
    Label {
        edge: usize,
        node: usize,
        lemma: String,
        constant: Option<usize>,
        positions: Vec<usize>,
        sense: usize,
        presupposed: bool,
        term: usize,
        reduces: Vec<usize>,
    },
}

/// Loss of one sentence and how many gold decisions the model would have
/// made itself.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SentenceScore {
    pub loss: f64,
    pub actions: usize,
    pub correct: usize,
}

impl Model {
    /// Builds vocabularies from `grammar` and `sentences` and initialises
    /// parameters from `seed`.
    pub fn new(grammar: Grammar, sentences: &[Sentence], dims: Dims, seed: u64) -> Result<Model, ScorerError> {
        if !dims.is_valid() {
            return Err(ScorerError::Config("dimensions must be positive".into()));
        }
        let features = FeatureVocabs::build(sentences.iter().flat_map(|s| &s.tokens));
        let mut terminals = Vocab::default();
        let mut constants = Vocab::default();
        let mut senses = Vocab::default();
        let mut edges = Vocab::default();
        terminals.insert(BOX_LEMMA);
        senses.insert("");
        edges.insert(START_EDGE);
        for l in grammar.labels() {
            terminals.insert(&l.lemma);
            constants.insert(&l.lemma);
            senses.insert(l.sense.as_deref().unwrap_or(""));
        }
        for p in grammar.productions() {
            if let LabelSlot::Constant(l) = &p.label {
                terminals.insert(&l.lemma);
            }
            for item in &p.items {
                edges.insert(&item.label);
            }
        }
        for t in sentences.iter().flat_map(|s| &s.tokens) {
            terminals.insert(&t.lemma);
        }

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut p = ParamStore::default();
        let d = dims;
        let (h, f) = (d.hidden, d.fragment);
        let sizes = features.sizes();
        let widths = [d.word, d.pretrained, d.feature, d.feature, d.feature, d.feature];
        for ((name, rows), cols) in FEATURE_TABLES.iter().zip(sizes).zip(widths) {
            p.add_random(name, rows, cols, &mut rng);
        }
        if d.feature_gates {
            p.add_filled("enc.gates", 6, 1, 1.0);
        }
        p.add_random("enc.w1", h, d.input(), &mut rng);
        p.add_filled("enc.b1", h, 1, 0.0);
        add_lstm(&mut p, "enc.fwd", h, h, &mut rng);
        add_lstm(&mut p, "enc.bwd", h, h, &mut rng);
        p.add_random("emb.fragment", grammar.len(), f, &mut rng);
        p.add_random("emb.terminal", terminals.len(), f, &mut rng);
        p.add_random("emb.edge", edges.len(), f, &mut rng);
        add_lstm(&mut p, "stack", f, h, &mut rng);
        add_lstm(&mut p, "compose", f, f, &mut rng);
        for (prefix, out) in [("frag", grammar.len()), ("label", constants.len() - 1)] {
            p.add_random(&format!("{prefix}.w2"), 2 * h, h, &mut rng);
            p.add_random(&format!("{prefix}.w3"), out, 2 * h, &mut rng);
            p.add_random(&format!("{prefix}.w4"), out, f, &mut rng);
            p.add_filled(&format!("{prefix}.b"), out, 1, 0.0);
        }
        p.add_random("copy.w5", 2 * h, h, &mut rng);
        p.add_random("gate.v", h, 1, &mut rng);
        p.add_filled("gate.b", 1, 1, 0.0);
        p.add_random("sense.w", senses.len(), h + f, &mut rng);
        p.add_filled("sense.b", senses.len(), 1, 0.0);
        p.add_random("presup.w", h + f, 1, &mut rng);
        p.add_filled("presup.b", 1, 1, 0.0);

        Model::assemble(dims, grammar, features, terminals, constants, senses, edges, p)
    }

    #[allow(clippy::too_many_arguments)]
    pub(crate) fn assemble(
        dims: Dims,
        grammar: Grammar,
        features: FeatureVocabs,
        terminals: Vocab,
        constants: Vocab,
        senses: Vocab,
        edges: Vocab,
        params: ParamStore,
    ) -> Result<Model, ScorerError> {
        let ids = Ids::locate(&params)?;
        let expect = |id: usize, shape: (usize, usize)| {
            if params.shape(id) == shape {
                Ok(())
            } else {
                Err(ScorerError::Checkpoint(format!("{} has shape {:?}, expected {:?}", params.name(id), params.shape(id), shape)))
            }
        };
        expect(ids.fragment, (grammar.len(), dims.fragment))?;
        expect(ids.terminal, (terminals.len(), dims.fragment))?;
        expect(ids.edge, (edges.len(), dims.fragment))?;
        expect(ids.frag.w3, (grammar.len(), 2 * dims.hidden))?;
        expect(ids.label.w3, (constants.len() - 1, 2 * dims.hidden))?;
        expect(ids.sense.0, (senses.len(), dims.hidden + dims.fragment))?;
        expect(ids.w1, (dims.hidden, dims.input()))?;
        for (id, n) in ids.feature_tables.iter().zip(features.sizes()) {
            if params.shape(*id).0 != n {
                return Err(ScorerError::Checkpoint(format!("{} does not match its vocabulary", params.name(*id))));
            }
        }
        let feasibility = Feasibility::new(&grammar);
        Ok(Model { dims, grammar, features, terminals, constants, senses, edges, params, ids, feasibility })
    }

    pub fn feasibility(&self) -> &Feasibility {
        &self.feasibility
    }

    pub(crate) fn edge_index(&self, incoming: Option<&str>) -> usize {
        self.edges.get(incoming.unwrap_or(START_EDGE))
    }

    pub(crate) fn fixed_term(&self, slot: &LabelSlot) -> Option<usize> {
        match slot {
            LabelSlot::Open => None,
            LabelSlot::Box => Some(self.terminals.get(BOX_LEMMA)),
            LabelSlot::Constant(l) => Some(self.terminals.get(&l.lemma)),
        }
    }

    /// Replays the gold derivation of a sentence and records every decision
    /// with its mask.
    pub fn prepare(&self, s: &Sentence) -> Result<Prepared, ScorerError> {
        if s.tokens.is_empty() {
            return Err(ScorerError::EmptySentence);
        }
        let derivation = extract_derivation(&s.graph)?;
        let mut state = DerivationState::start();
        let mut node_edges: Vec<usize> = Vec::new();
        let mut steps = Vec::with_capacity(derivation.actions.len());
        for (index, action) in derivation.actions.iter().enumerate() {
            let replay = |source| ScorerError::Replay { index, source };
            match (action, state.top()) {
                (Action::GenFrag(p), Some(Pending::Fragment { incoming, .. })) => {
                    let edge = self.edge_index(incoming);
                    let production = self.grammar.find(p).ok_or_else(|| ScorerError::UnknownProduction(p.to_string()))?;
                    let mask = self.feasibility.feasible_productions(&state, &self.grammar, None).map_err(replay)?;
                    let target = mask.iter().position(|&m| m == production).ok_or_else(|| ScorerError::Infeasible(p.to_string()))?;
                    let node = state.node_count();
                    let reduces = state.apply(action).map_err(replay)?.iter().map(|r| r.node).collect();
                    node_edges.push(edge);
                    steps.push(GoldStep::Frag { edge, mask, target, production, node, term: self.fixed_term(&p.label), reduces });
                }
                (Action::GenLabel(l), Some(Pending::Label { node, .. })) => {
                    let constant = self.constants.lookup(&l.lemma);
                    let positions: Vec<usize> = s.tokens.iter().enumerate().filter(|(_, t)| t.lemma == l.lemma).map(|(i, _)| i).collect();
                    if constant.is_none() && positions.is_empty() {
                        return Err(ScorerError::UnreachableLemma(l.lemma.clone()));
                    }
                    let reduces = state.apply(action).map_err(replay)?.iter().map(|r| r.node).collect();
                    steps.push(GoldStep::Label {
                        edge: node_edges[node],
                        node,
                        lemma: l.lemma.clone(),
                        constant,
                        positions,
                        sense: self.senses.get(l.sense.as_deref().unwrap_or("")),
                        presupposed: l.presupposed,
                        term: self.terminals.get(&l.lemma),
                        reduces,
                    });
                }
                (a, _) => {
                    let err = state.apply(a).expect_err("mismatched action cannot apply");
                    return Err(replay(err));
                }
            }
        }
        Ok(Prepared { tokens: s.tokens.clone(), features: self.features.features(&s.tokens), graph: s.graph.clone(), steps })
    }

    /// Builds the loss of a prepared sentence on `tape`.
    pub(crate) fn forward<'m>(&'m self, ex: &Prepared) -> Result<(Run<'m>, Var, usize), ScorerError> {
        let mut run = Run::new(self, &ex.features, ex.tokens.iter().map(|t| t.lemma.clone()).collect())?;
        let mut terms = Vec::with_capacity(ex.steps.len() * 3);
        let mut correct = 0;
        for step in &ex.steps {
            match step {
                GoldStep::Frag { edge, mask, target, production, node, term, reduces } => {
                    let logits = run.frag_logits(*edge);
                    let masked = run.t.gather(logits, mask);
                    correct += usize::from(argmax(run.t.value(masked)) == Some(*target));
                    terms.push(run.t.nll(masked, *target));
                    run.on_frag(*node, *production, *term);
                    for &r in reduces {
                        run.on_reduce(r);
                    }
                }
                GoldStep::Label { edge, node, lemma, constant, positions, sense, presupposed, term, reduces } => {
                    let lv = run.label_vars(*edge);
                    let p = run.lemma_prob(&lv, *constant, positions);
                    terms.push(run.t.neg_log(p));
                    let sense_logits = run.sense_logits(*term);
                    let presup_logit = run.presup_logit(*term);
                    let best_lemma = run.best_lemma(&lv);
                    let ok = best_lemma.as_deref() == Some(lemma.as_str())
                        && argmax_known(run.t.value(sense_logits)) == Some(*sense)
                        && (run.t.scalar(presup_logit) > 0.0) == *presupposed;
                    correct += usize::from(ok);
                    terms.push(run.t.nll(sense_logits, *sense));
                    terms.push(run.t.bce(presup_logit, *presupposed));
                    run.on_label(*node, *term);
                    for &r in reduces {
                        run.on_reduce(r);
                    }
                }
            }
        }
        let loss = if terms.is_empty() { run.t.constant(vec![0.0]) } else { run.t.total(&terms) };
        Ok((run, loss, correct))
    }

    /// Loss and teacher-forced accuracy without gradients.
    pub fn score(&self, ex: &Prepared) -> Result<SentenceScore, ScorerError> {
        let (run, loss, correct) = self.forward(ex)?;
        Ok(SentenceScore { loss: run.t.scalar(loss), actions: ex.steps.len(), correct })
    }
}

/// Index of the first maximum.
pub(crate) fn argmax(xs: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &x) in xs.iter().enumerate() {
        if best.is_none_or(|b| x > xs[b]) {
            best = Some(i);
        }
    }
    best
}

/// Like [`argmax`] but never the unknown item at index 0.
pub(crate) fn argmax_known(xs: &[f64]) -> Option<usize> {
    argmax(&xs[1.min(xs.len())..]).map(|i| i + 1)
}

fn lstm(t: &mut Tape, (w, b): (usize, usize), x: Var, (h, c): (Var, Var)) -> (Var, Var) {
    let n = t.len(h);
    let xh = t.concat(&[x, h]);
    let (w, b) = (t.param(w), t.param(b));
    let z = t.matvec(w, xh);
    let z = t.add(z, b);
    let i = t.slice(z, 0, n);
    let i = t.sigmoid(i);
    let f = t.slice(z, n, n);
    let f = t.sigmoid(f);
    let o = t.slice(z, 2 * n, n);
    let o = t.sigmoid(o);
    let g = t.slice(z, 3 * n, n);
    let g = t.tanh(g);
    let fc = t.mul(f, c);
    let ig = t.mul(i, g);
    let c2 = t.add(fc, ig);
    let tc = t.tanh(c2);
    (t.mul(o, tc), c2)
}

#[derive(Debug, Clone)]
struct NodeRec {
    production: usize,
    term: Option<usize>,
    /// Stack height before this fragment was pushed.
    start: usize,
    children: Vec<usize>,
    u: Option<Var>,
}

/// Label branch outputs at one step.
pub(crate) struct LabelVars {
    /// Probability of generating; absent when only one branch exists.
    pub(crate) gate: Option<Var>,
    /// Softmax over the constant lemmas, if there are any.
    pub(crate) generate: Option<Var>,
    /// Softmax over input positions.
    pub(crate) copy: Var,
}

/// One sentence's computation: encoder states and the decoder stack.
pub(crate) struct Run<'m> {
    m: &'m Model,
    pub(crate) t: Tape<'m>,
    enc: Var,
    lemmas: Vec<String>,
    stack: Vec<(Var, Var)>,
    nodes: Vec<NodeRec>,
    open: Vec<usize>,
}

impl<'m> Run<'m> {
    pub(crate) fn new(m: &'m Model, feats: &[TokenFeatures], lemmas: Vec<String>) -> Result<Run<'m>, ScorerError> {
        if feats.is_empty() {
            return Err(ScorerError::EmptySentence);
        }
        let sizes = m.features.sizes();
        for f in feats {
            let idx = [f.word, f.pretrained, f.lemma, f.pos, f.semtag, f.dep];
            if idx.iter().zip(sizes).any(|(&i, n)| i >= n) {
                return Err(ScorerError::OutOfRange);
            }
        }
        let ids = &m.ids;
        let mut t = Tape::new(&m.params);
        let mut xs = Vec::with_capacity(feats.len());
        for f in feats {
            let idx = [f.word, f.pretrained, f.lemma, f.pos, f.semtag, f.dep];
            let mut parts = Vec::with_capacity(6);
            for (k, (&table, &i)) in ids.feature_tables.iter().zip(&idx).enumerate() {
                let e = t.row(table, i);
                parts.push(match ids.gates {
                    Some(g) => {
                        let gates = t.param(g);
                        let width = t.len(e);
                        let s = t.gather(gates, &vec![k; width]);
                        t.mul(s, e)
                    }
                    None => e,
                });
            }
            let c = t.concat(&parts);
            let (w1, b1) = (t.param(ids.w1), t.param(ids.b1));
            let z = t.matvec(w1, c);
            let z = t.add(z, b1);
            xs.push(t.tanh(z));
        }
        let h = m.dims.hidden;
        let zero = t.zeros(h);
        let mut state = (zero, zero);
        let mut fwd = Vec::with_capacity(xs.len());
        for &x in &xs {
            state = lstm(&mut t, ids.fwd, x, state);
            fwd.push(state.0);
        }
        state = (zero, zero);
        let mut bwd = vec![zero; xs.len()];
        for (i, &x) in xs.iter().enumerate().rev() {
            state = lstm(&mut t, ids.bwd, x, state);
            bwd[i] = state.0;
        }
        let states: Vec<Var> = fwd.iter().zip(&bwd).map(|(&a, &b)| t.concat(&[a, b])).collect();
        let enc = t.stack_rows(&states);
        Ok(Run { m, t, enc, lemmas, stack: vec![(zero, zero)], nodes: Vec::new(), open: Vec::new() })
    }

    pub(crate) fn top(&self) -> Var {
        self.stack.last().expect("the stack keeps its initial state").0
    }

    fn push(&mut self, x: Var) {
        let top = *self.stack.last().expect("the stack keeps its initial state");
        let next = lstm(&mut self.t, self.m.ids.stack, x, top);
        self.stack.push(next);
    }

    fn attend(&mut self, w2: usize) -> Var {
        let h = self.top();
        let w = self.t.param(w2);
        let q = self.t.matvec(w, h);
        let scores = self.t.matvec(self.enc, q);
        let alpha = self.t.softmax(scores);
        self.t.mattvec(self.enc, alpha)
    }

    fn head(&mut self, head: Head, edge: usize) -> Var {
        let c = self.attend(head.w2);
        let w3 = self.t.param(head.w3);
        let y = self.t.matvec(w3, c);
        let e = self.t.row(self.m.ids.edge, edge);
        let w4 = self.t.param(head.w4);
        let ye = self.t.matvec(w4, e);
        let y = self.t.add(y, ye);
        let b = self.t.param(head.b);
        self.t.add(y, b)
    }

    /// Logits over every production of the grammar.
    pub(crate) fn frag_logits(&mut self, edge: usize) -> Var {
        self.head(self.m.ids.frag, edge)
    }

    pub(crate) fn label_vars(&mut self, edge: usize) -> LabelVars {
        let generate = (self.m.constants.len() > 1).then(|| {
            let y = self.head(self.m.ids.label, edge);
            self.t.softmax(y)
        });
        let h = self.top();
        let w5 = self.t.param(self.m.ids.w5);
        let q = self.t.matvec(w5, h);
        let o = self.t.matvec(self.enc, q);
        let copy = self.t.softmax(o);
        let gate = generate.map(|_| {
            let v = self.t.param(self.m.ids.gate.0);
            let z = self.t.dot(v, h);
            let b = self.t.param(self.m.ids.gate.1);
            let z = self.t.add(z, b);
            self.t.sigmoid(z)
        });
        LabelVars { gate, generate, copy }
    }

    /// Probability of a lemma: gated generate mass plus copy mass over the
    /// positions holding it.
    pub(crate) fn lemma_prob(&mut self, lv: &LabelVars, constant: Option<usize>, positions: &[usize]) -> Var {
        let mut terms = Vec::with_capacity(2);
        if let (Some(k), Some(generate), Some(gate)) = (constant, lv.generate, lv.gate) {
            let p = self.t.gather(generate, &[k - 1]);
            terms.push(self.t.mul(gate, p));
        }
        if !positions.is_empty() {
            let s = self.t.gather(lv.copy, positions);
            let s = self.t.sum(s);
            terms.push(match lv.gate {
                Some(gate) => {
                    let rest = self.t.one_minus(gate);
                    self.t.mul(rest, s)
                }
                None => s,
            });
        }
        self.t.total(&terms)
    }

    /// Marginal probability of every candidate lemma, in a fixed order:
    /// constants first, then copied lemmas not among them.
    pub(crate) fn lemma_marginals(&self, lv: &LabelVars) -> Vec<(String, f64)> {
        let g = lv.gate.map_or(0.0, |v| self.t.scalar(v));
        let mut out: Vec<(String, f64)> = Vec::new();
        let mut index: HashMap<&str, usize> = HashMap::new();
        if let Some(generate) = lv.generate {
            for (k, &p) in self.t.value(generate).iter().enumerate() {
                let lemma = self.m.constants.item(k + 1);
                index.insert(lemma, out.len());
                out.push((lemma.to_string(), g * p));
            }
        }
        for (lemma, &p) in self.lemmas.iter().zip(self.t.value(lv.copy)) {
            let slot = match index.get(lemma.as_str()) {
                Some(&i) => i,
                None => {
                    index.insert(lemma, out.len());
                    out.push((lemma.clone(), 0.0));
                    out.len() - 1
                }
            };
            out[slot].1 += (1.0 - g) * p;
        }
        out
    }

    pub(crate) fn best_lemma(&self, lv: &LabelVars) -> Option<String> {
        let m = self.lemma_marginals(lv);
        argmax(&m.iter().map(|x| x.1).collect::<Vec<_>>()).map(|i| m[i].0.clone())
    }

    fn classifier_input(&mut self, term: usize) -> Var {
        let h = self.top();
        let e = self.t.row(self.m.ids.terminal, term);
        self.t.concat(&[h, e])
    }

    pub(crate) fn sense_logits(&mut self, term: usize) -> Var {
        let x = self.classifier_input(term);
        let w = self.t.param(self.m.ids.sense.0);
        let z = self.t.matvec(w, x);
        let b = self.t.param(self.m.ids.sense.1);
        self.t.add(z, b)
    }

    pub(crate) fn presup_logit(&mut self, term: usize) -> Var {
        let x = self.classifier_input(term);
        let w = self.t.param(self.m.ids.presup.0);
        let z = self.t.dot(w, x);
        let b = self.t.param(self.m.ids.presup.1);
        self.t.add(z, b)
    }

    /// Pushes the embedding of a generated fragment.
    pub(crate) fn on_frag(&mut self, node: usize, production: usize, term: Option<usize>) {
        debug_assert_eq!(node, self.nodes.len());
        if let Some(&parent) = self.open.last() {
            self.nodes[parent].children.push(node);
        }
        self.nodes.push(NodeRec { production, term, start: self.stack.len(), children: Vec::new(), u: None });
        self.open.push(node);
        let e = self.t.row(self.m.ids.fragment, production);
        self.push(e);
    }

    /// Pushes the terminal embedding of a generated label.
    pub(crate) fn on_label(&mut self, node: usize, term: usize) {
        self.nodes[node].term = Some(term);
        let e = self.t.row(self.m.ids.terminal, term);
        self.push(e);
    }

    /// Pops a completed fragment and pushes its composition.
    pub(crate) fn on_reduce(&mut self, node: usize) {
        let closed = self.open.pop();
        debug_assert_eq!(closed, Some(node), "reduces close the innermost fragment");
        let rec = self.nodes[node].clone();
        let mut inputs: Vec<Var> = rec.children.iter().map(|&c| self.nodes[c].u.expect("children reduce first")).collect();
        let frag = self.t.row(self.m.ids.fragment, rec.production);
        let term = self.t.row(self.m.ids.terminal, rec.term.unwrap_or(0));
        inputs.push(self.t.add(frag, term));
        let zero = self.t.zeros(self.m.dims.fragment);
        let mut state = (zero, zero);
        for x in inputs {
            state = lstm(&mut self.t, self.m.ids.compose, x, state);
        }
        self.nodes[node].u = Some(state.0);
        self.stack.truncate(rec.start);
        self.push(state.0);
    }

    pub(crate) fn encoder_states(&self) -> Vec<Vec<f64>> {
        let v = self.t.value(self.enc);
        v.chunks(2 * self.m.dims.hidden).map(<[f64]>::to_vec).collect()
    }

    pub(crate) fn stack_height(&self) -> usize {
        self.stack.len()
    }
}

/// Probabilities of a softmax over `logits` restricted to `mask`.
pub(crate) fn masked_softmax(logits: &[f64], mask: &[usize]) -> Vec<f64> {
    softmax_values(&mask.iter().map(|&i| logits[i]).collect::<Vec<_>>())
}

/// Label from classifier outputs and a chosen lemma.
pub(crate) fn label_from(lemma: String, senses: &Vocab, sense_logits: &[f64], presup_logit: f64) -> NodeLabel {
    let sense = argmax_known(sense_logits).map(|i| senses.item(i)).filter(|s| !s.is_empty() && *s != UNK);
    let mut l = NodeLabel::new(lemma).presupposed(presup_logit > 0.0);
    l.sense = sense.map(str::to_string);
    l
}
