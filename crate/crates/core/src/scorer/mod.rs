//! Action scorers over derivation states.
//!
//! [`Model`] is a BiLSTM encoder with a stack-LSTM decoder: fragments are
//! scored by attention over the encoder states, labels by a gated mix of
//! generating a known lemma and copying an input lemma, and every reduce
//! folds a finished subtree into one stack entry. [`CountModel`] is a
//! count-based baseline. Both drive [`decode`], which only ever offers
//! productions that can still complete, so every parse is a well-formed
//! graph whatever the parameters.

mod baseline;
mod checkpoint;
mod features;
pub mod gradcheck;
mod model;
mod params;
pub mod tape;
mod train;

use crate::corpus::Token;
use crate::derive::{Action, DerivationState, DeriveError, Feasibility, Pending, Reduced};
use crate::grammar::{ExtractError, Grammar};
use crate::graph::{Graph, NodeLabel};

pub use baseline::CountModel;
pub use checkpoint::{CHECKPOINT_FORMAT, CHECKPOINT_VERSION};
pub use features::{FeatureVocabs, TokenFeatures, Vocab, UNK};
pub use model::{Dims, Model, Prepared, SentenceScore, START_EDGE};
pub use params::{Grads, ParamStore, Tensor};
pub use train::{lr_at, train, EpochStats, Optimizer, TrainConfig, Trainer};

use model::{argmax, label_from, masked_softmax, Run};

#[derive(Debug, thiserror::Error)]
pub enum ScorerError {
    #[error("empty sentence")]
    EmptySentence,
    #[error("feature index out of range")]
    OutOfRange,
    #[error("empty mask")]
    EmptyMask,
    #[error("no label candidates")]
    NoCandidates,
    #[error("gold graph: {0}")]
    Extract(#[from] ExtractError),
    #[error("production `{0}` is not in the model grammar")]
    UnknownProduction(String),
    #[error("gold production `{0}` cannot complete")]
    Infeasible(String),
    #[error("lemma `{0}` can be neither generated nor copied")]
    UnreachableLemma(String),
    #[error("gold action {index} does not replay: {source}")]
    Replay {
        index: usize,
        #[source]
        source: DeriveError,
    },
    #[error("derivation: {0}")]
    Derive(#[from] DeriveError),
    #[error("grammar cannot complete any derivation")]
    Stuck,
    #[error("configuration: {0}")]
    Config(String),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// What a decoder is told after each applied action.
#[derive(Debug, Clone, PartialEq)]
pub enum Observed<'a> {
    Frag { node: usize, production: usize },
    Label { node: usize, label: &'a NodeLabel },
}

/// Step-by-step action scoring for one sentence.
pub trait Decoder {
    /// One score per grammar production for the pending fragment; higher is
    /// better.
    fn frag_scores(&mut self, incoming: Option<&str>) -> Vec<f64>;
    /// The label for the pending `L` of `node`.
    fn label(&mut self, node: usize) -> Result<NodeLabel, ScorerError>;
    /// Called after every applied action with the reduces it fired.
    fn observe(&mut self, event: Observed<'_>, reduced: &[Reduced]);
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParseOptions {
    /// Only offer productions whose rank matches the pending nonterminal.
    /// Without it the best production overall is tried first and a
    /// rejected choice falls back to the best applicable one.
    pub restrict: bool,
    pub depth_cap: Option<usize>,
    /// Past this many nodes every fragment completes as fast as possible.
    pub node_budget: usize,
}

impl Default for ParseOptions {
    fn default() -> Self {
        ParseOptions { restrict: true, depth_cap: Some(20), node_budget: 256 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Parsed {
    pub graph: Graph,
    pub actions: Vec<Action>,
    /// Choices that could not apply and were replaced.
    pub rejected: usize,
}

/// Greedy decoding: the best-scoring feasible production at each fragment
/// and the decoder's label at each `L`.
pub fn decode(dec: &mut impl Decoder, grammar: &Grammar, feasibility: &Feasibility, opts: &ParseOptions) -> Result<Parsed, ScorerError> {
    if !feasibility.can_complete() {
        return Err(ScorerError::Stuck);
    }
    let mut state = DerivationState::start();
    let mut actions = Vec::new();
    let mut rejected = 0;
    while let Some(top) = state.top() {
        match top {
            Pending::Fragment { incoming, .. } => {
                let scores = dec.frag_scores(incoming);
                let cap = if state.node_count() >= opts.node_budget { Some(0) } else { opts.depth_cap };
                let feasible = feasibility.feasible_productions(&state, grammar, cap)?;
                let pick = |among: &[usize]| among.iter().copied().reduce(|b, i| if scores[i] > scores[b] { i } else { b });
                let best_feasible = pick(&feasible).ok_or(ScorerError::Stuck)?;
                let choice = if opts.restrict {
                    best_feasible
                } else {
                    let all: Vec<usize> = (0..grammar.len()).collect();
                    let best = pick(&all).ok_or(ScorerError::Stuck)?;
                    if feasible.contains(&best) {
                        best
                    } else {
                        rejected += 1;
                        best_feasible
                    }
                };
                let node = state.node_count();
                let action = Action::GenFrag(grammar.production(choice).clone());
                let reduced = state.apply(&action)?;
                dec.observe(Observed::Frag { node, production: choice }, &reduced);
                actions.push(action);
            }
            Pending::Label { node, .. } => {
                let label = dec.label(node)?;
                let action = Action::GenLabel(label.clone());
                let reduced = state.apply(&action)?;
                dec.observe(Observed::Label { node, label: &label }, &reduced);
                actions.push(action);
            }
        }
    }
    Ok(Parsed { graph: state.finish()?, actions, rejected })
}

/// Label distribution at one `L`.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelDistribution {
    /// Probability of the generate branch; zero without constants.
    pub gate: f64,
    /// Generate softmax over the constant lemmas.
    pub generate: Vec<(String, f64)>,
    /// Copy softmax over input positions.
    pub copy: Vec<f64>,
    /// Marginal probability per candidate lemma.
    pub lemmas: Vec<(String, f64)>,
}

/// Neural scoring of one sentence.
pub struct Session<'m> {
    model: &'m Model,
    run: Run<'m>,
    node_edges: Vec<usize>,
    pending_edge: usize,
}

impl<'m> Session<'m> {
    pub fn new(model: &'m Model, tokens: &[Token]) -> Result<Session<'m>, ScorerError> {
        let feats = model.features.features(tokens);
        let run = Run::new(model, &feats, tokens.iter().map(|t| t.lemma.clone()).collect())?;
        Ok(Session { model, run, node_edges: Vec::new(), pending_edge: 0 })
    }

    /// Probabilities over the productions in `mask`, in mask order.
    pub fn frag_distribution(&mut self, incoming: Option<&str>, mask: &[usize]) -> Result<Vec<f64>, ScorerError> {
        if mask.is_empty() {
            return Err(ScorerError::EmptyMask);
        }
        let logits = self.frag_logits(incoming);
        Ok(masked_softmax(&logits, mask))
    }

    fn frag_logits(&mut self, incoming: Option<&str>) -> Vec<f64> {
        let edge = self.model.edge_index(incoming);
        self.pending_edge = edge;
        let v = self.run.frag_logits(edge);
        self.run.t.value(v).to_vec()
    }

    pub fn label_distribution(&mut self, node: usize) -> LabelDistribution {
        let edge = self.node_edges[node];
        let lv = self.run.label_vars(edge);
        let t = &self.run.t;
        LabelDistribution {
            gate: lv.gate.map_or(0.0, |g| t.scalar(g)),
            generate: lv
                .generate
                .map(|v| t.value(v).iter().enumerate().map(|(k, &p)| (self.model.constants.item(k + 1).to_string(), p)).collect())
                .unwrap_or_default(),
            copy: t.value(lv.copy).to_vec(),
            lemmas: self.run.lemma_marginals(&lv),
        }
    }

    /// One encoder state per token, forward and backward halves joined.
    pub fn encoder_states(&self) -> Vec<Vec<f64>> {
        self.run.encoder_states()
    }

    /// Current height of the decoder stack, initial entry included.
    pub fn stack_height(&self) -> usize {
        self.run.stack_height()
    }

    /// Decoder state at the top of the stack.
    pub fn state(&self) -> Vec<f64> {
        self.run.t.value(self.run.top()).to_vec()
    }
}

impl Decoder for Session<'_> {
    fn frag_scores(&mut self, incoming: Option<&str>) -> Vec<f64> {
        self.frag_logits(incoming)
    }

    fn label(&mut self, node: usize) -> Result<NodeLabel, ScorerError> {
        let edge = self.node_edges[node];
        let lv = self.run.label_vars(edge);
        let lemma = self.run.best_lemma(&lv).ok_or(ScorerError::NoCandidates)?;
        let term = self.model.terminals.get(&lemma);
        let sense = self.run.sense_logits(term);
        let presup = self.run.presup_logit(term);
        Ok(label_from(lemma, &self.model.senses, self.run.t.value(sense), self.run.t.scalar(presup)))
    }

    fn observe(&mut self, event: Observed<'_>, reduced: &[Reduced]) {
        match event {
            Observed::Frag { node, production } => {
                self.node_edges.push(self.pending_edge);
                let term = self.model.fixed_term(&self.model.grammar.production(production).label);
                self.run.on_frag(node, production, term);
            }
            Observed::Label { node, label } => {
                let term = self.model.terminals.get(&label.lemma);
                self.run.on_label(node, term);
            }
        }
        for r in reduced {
            self.run.on_reduce(r.node);
        }
    }
}

impl Model {
    /// Greedy parse of a token sequence.
    pub fn parse(&self, tokens: &[Token], opts: &ParseOptions) -> Result<Parsed, ScorerError> {
        let mut session = Session::new(self, tokens)?;
        decode(&mut session, &self.grammar, &self.feasibility, opts)
    }
}

/// Teacher-forced accuracy and loss summed over a data set.
pub fn evaluate_prepared(model: &Model, data: &[Prepared]) -> Result<SentenceScore, ScorerError> {
    let mut total = SentenceScore { loss: 0.0, actions: 0, correct: 0 };
    for ex in data {
        let s = model.score(ex)?;
        total.loss += s.loss;
        total.actions += s.actions;
        total.correct += s.correct;
    }
    Ok(total)
}

/// Index of the highest score, first on ties.
pub fn best_index(scores: &[f64]) -> Option<usize> {
    argmax(scores)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Sentence;
    use crate::grammar::build_grammar;
    use crate::graph::{parse_penman, validate};
    use crate::{synth, worked_example};

    fn tiny() -> Dims {
        Dims { word: 4, pretrained: 3, feature: 3, hidden: 5, fragment: 4, feature_gates: false }
    }

    fn model_for(sentences: &[Sentence], dims: Dims) -> Model {
        let (g, _) = build_grammar(sentences.iter().map(|s| &s.graph));
        Model::new(g, sentences, dims, 7).unwrap()
    }

    fn zeroed(mut m: Model) -> Model {
        for id in 0..m.params.len() {
            m.params.values_mut(id).iter_mut().for_each(|x| *x = 0.0);
        }
        m
    }

    #[test]
    fn encoder_shapes_and_symmetry() {
        let s = worked_example::sentence();
        let m = model_for(std::slice::from_ref(&s), tiny());
        let one = Session::new(&m, &s.tokens[..1]).unwrap();
        let states = one.encoder_states();
        assert_eq!(states.len(), 1);
        assert_eq!(states[0].len(), 2 * tiny().hidden);
        let z = zeroed(m);
        let same = vec![s.tokens[1].clone(); 3];
        let states = Session::new(&z, &same).unwrap().encoder_states();
        assert!(states.windows(2).all(|w| w[0] == w[1]));
        assert!(matches!(Session::new(&z, &[]), Err(ScorerError::EmptySentence)));
    }

    #[test]
    fn fragment_distributions() {
        let s = worked_example::sentence();
        let m = zeroed(model_for(std::slice::from_ref(&s), tiny()));
        let mut session = Session::new(&m, &s.tokens).unwrap();
        let mask: Vec<usize> = (0..m.grammar.len()).collect();
        let p = session.frag_distribution(None, &mask).unwrap();
        assert!(p.iter().all(|&x| (x - 1.0 / mask.len() as f64).abs() < 1e-12));
        assert_eq!(session.frag_distribution(None, &[2]).unwrap(), [1.0]);
        assert!(matches!(session.frag_distribution(None, &[]), Err(ScorerError::EmptyMask)));

        let m = model_for(std::slice::from_ref(&s), tiny());
        let mut session = Session::new(&m, &s.tokens).unwrap();
        let p = session.frag_distribution(Some("Drs"), &[0, 3, 4]).unwrap();
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn label_distribution_sums_to_one() {
        let s = worked_example::sentence();
        let m = model_for(std::slice::from_ref(&s), tiny());
        let mut session = Session::new(&m, &s.tokens).unwrap();
        let root = m.grammar.find(&crate::grammar::extract_derivation(&s.graph).unwrap().productions().next().unwrap().clone()).unwrap();
        let _ = session.frag_scores(None);
        session.observe(Observed::Frag { node: 0, production: root }, &[]);
        let d = session.label_distribution(0);
        let total: f64 = d.lemmas.iter().map(|x| x.1).sum();
        assert!((total - 1.0).abs() < 1e-9);
        assert!((d.copy.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        assert!(d.gate > 0.0 && d.gate < 1.0);
    }

    #[test]
    fn copy_only_without_constants() {
        // A grammar whose only label is a box has no constant lemmas.
        let s = Sentence { tokens: vec![Token::new("it", "it", "PRP", "PRO", "root")], graph: parse_penman("(b1/□ :Drs (x1/it))").unwrap() };
        let (mut g, _) = build_grammar([&s.graph]);
        g = crate::grammar::Grammar::from_parts(g.productions().cloned().collect::<Vec<_>>(), []);
        let m = Model::new(g, std::slice::from_ref(&s), tiny(), 1).unwrap();
        assert_eq!(m.constants.len(), 1);
        let mut session = Session::new(&m, &s.tokens).unwrap();
        let _ = session.frag_scores(None);
        session.observe(Observed::Frag { node: 0, production: 0 }, &[]);
        let _ = session.frag_scores(Some("Drs"));
        session.observe(Observed::Frag { node: 1, production: 1 }, &[]);
        let d = session.label_distribution(1);
        assert_eq!(d.gate, 0.0);
        assert_eq!(d.lemmas, [("it".to_string(), 1.0)]);
    }

    #[test]
    fn stack_moves_on_every_event() {
        let s = worked_example::sentence();
        let m = model_for(std::slice::from_ref(&s), tiny());
        let mut session = Session::new(&m, &s.tokens).unwrap();
        let mut state = DerivationState::start();
        let mut before = session.state();
        for a in &crate::grammar::extract_derivation(&s.graph).unwrap().actions {
            let probe = session.state();
            assert_eq!(probe, before, "scoring alone leaves the stack alone");
            let node = state.node_count();
            let reduced = state.apply(a).unwrap();
            match a {
                Action::GenFrag(p) => {
                    let _ = session.frag_scores(None);
                    session.observe(Observed::Frag { node, production: m.grammar.find(p).unwrap() }, &reduced)
                }
                Action::GenLabel(l) => session.observe(Observed::Label { node: node - 1, label: l }, &reduced),
                Action::Reduce => unreachable!(),
            }
            let after = session.state();
            assert_ne!(after, before);
            before = after;
        }
        assert_eq!(session.stack_height(), 2, "the root composition sits on the initial entry");
    }

    #[test]
    fn singleton_derivation_has_zero_loss() {
        let s = Sentence { tokens: vec![Token::new("Yes", "yes", "UH", "GRE", "root")], graph: parse_penman("(b1/□)").unwrap() };
        let m = model_for(std::slice::from_ref(&s), tiny());
        let ex = m.prepare(&s).unwrap();
        assert_eq!(ex.action_count(), 1);
        assert_eq!(m.score(&ex).unwrap().loss, 0.0);
    }

    #[test]
    fn untrained_models_parse_well_formed_graphs() {
        let toy = synth::toy_sentences();
        let m = model_for(&toy, tiny());
        for s in &toy {
            for restrict in [true, false] {
                let p = m.parse(&s.tokens, &ParseOptions { restrict, ..Default::default() }).unwrap();
                assert!(validate(&p.graph).is_well_formed());
                if restrict {
                    assert_eq!(p.rejected, 0);
                }
            }
        }
        let base = CountModel::new(&toy);
        for s in &toy {
            assert!(validate(&base.parse(&s.tokens, &ParseOptions::default()).unwrap().graph).is_well_formed());
        }
    }

    #[test]
    fn tight_budgets_still_terminate() {
        let toy = synth::toy_sentences();
        let m = model_for(&toy, tiny());
        let opts = ParseOptions { restrict: true, depth_cap: Some(0), node_budget: 0 };
        let p = m.parse(&toy[0].tokens, &opts).unwrap();
        assert!(validate(&p.graph).is_well_formed());
    }

    #[test]
    fn training_is_deterministic_and_loss_falls() {
        let toy: Vec<Sentence> = synth::toy_sentences().into_iter().take(5).collect();
        let config = TrainConfig { epochs: 5, dims: tiny(), decay_every: 100, ..Default::default() };
        let (_, a) = train(&toy, &config).unwrap();
        let (_, b) = train(&toy, &config).unwrap();
        assert_eq!(a, b);
        assert!(a.windows(2).all(|w| w[1].loss <= w[0].loss), "{a:?}");
        assert!(a.iter().all(|s| s.loss.is_finite() && s.loss >= 0.0));
    }

    #[test]
    fn schedule() {
        let c = TrainConfig::default();
        assert_eq!(lr_at(&c, 0), 0.001);
        assert!((lr_at(&c, 10) - 0.0001).abs() < 1e-15);
        assert!((lr_at(&c, 29) - 0.00001).abs() < 1e-15);
        assert!(TrainConfig { learning_rate: 0.0, ..c.clone() }.validate().is_err());
        let parsed: TrainConfig = toml::from_str("epochs = 3\noptimizer = \"sgd\"\n[dims]\nhidden = 8\n").unwrap();
        assert_eq!(parsed.epochs, 3);
        assert_eq!(parsed.optimizer, Optimizer::Sgd);
        assert_eq!(parsed.dims.hidden, 8);
        assert_eq!(parsed.dims.word, 128);
    }

    #[test]
    fn checkpoints_round_trip() {
        let toy: Vec<Sentence> = synth::toy_sentences().into_iter().take(4).collect();
        let config = TrainConfig { epochs: 2, dims: tiny(), ..Default::default() };
        let (m, _) = train(&toy, &config).unwrap();
        let back = Model::from_json(&m.to_json()).unwrap();
        assert_eq!(back.params, m.params);
        for s in &toy {
            assert_eq!(back.parse(&s.tokens, &ParseOptions::default()).unwrap(), m.parse(&s.tokens, &ParseOptions::default()).unwrap());
        }
        assert!(Model::from_json("{}").is_err());
    }

    #[test]
    fn sgd_updates_parameters() {
        let toy: Vec<Sentence> = synth::toy_sentences().into_iter().take(2).collect();
        let m = model_for(&toy, tiny());
        let data: Vec<Prepared> = toy.iter().map(|s| m.prepare(s).unwrap()).collect();
        let before = evaluate_prepared(&m, &data).unwrap().loss;
        let config = TrainConfig { optimizer: Optimizer::Sgd, learning_rate: 0.05, epochs: 3, dims: tiny(), ..Default::default() };
        let mut t = Trainer::new(m, data.clone(), config).unwrap();
        t.run().unwrap();
        assert!(evaluate_prepared(&t.model, &data).unwrap().loss < before);
    }
}
