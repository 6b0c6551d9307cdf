use dag_grammar::corpus::Sentence;
use dag_grammar::eval::{corpus_eval, DEFAULT_RESTARTS};
use dag_grammar::grammar::build_grammar;
use dag_grammar::graph::validate;
use dag_grammar::scorer::gradcheck::check_gradients;
use dag_grammar::scorer::{train, CountModel, Dims, Model, ParseOptions, TrainConfig};
use dag_grammar::{synth, worked_example};

fn corpus() -> Vec<Sentence> {
    let mut s = synth::toy_sentences();
    s.push(worked_example::sentence());
    s
}

#[test]
fn gradients_without_feature_gates() {
    let sentences = corpus();
    let (grammar, _) = build_grammar(sentences.iter().map(|s| &s.graph));
    let dims = Dims { word: 5, pretrained: 3, feature: 3, hidden: 4, fragment: 5, feature_gates: false };
    let model = Model::new(grammar, &sentences, dims, 11).unwrap();
    let ex = model.prepare(sentences.last().unwrap()).unwrap();
    for block in check_gradients(&model, &ex, 8).unwrap() {
        assert!(block.nonzero > 0, "{} has no gradient", block.name);
        assert!(block.passes(1e-4, 1e-7), "{block:?}");
    }
}

#[test]
fn saved_models_parse_identically() {
    let sentences: Vec<Sentence> = synth::toy_sentences().into_iter().take(6).collect();
    let config = TrainConfig { epochs: 3, dims: Dims { hidden: 8, ..Dims::desk() }, ..TrainConfig::default() };
    let (model, _) = train(&sentences, &config).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.json");
    model.save(&path).unwrap();
    let back = Model::load(&path).unwrap();
    for s in &sentences {
        let opts = ParseOptions::default();
        assert_eq!(back.parse(&s.tokens, &opts).unwrap(), model.parse(&s.tokens, &opts).unwrap());
    }
}

#[test]
fn unrestricted_parses_stay_well_formed() {
    let sentences = synth::toy_sentences();
    let config = TrainConfig { epochs: 2, dims: Dims { hidden: 8, ..Dims::desk() }, ..TrainConfig::default() };
    let (model, _) = train(&sentences, &config).unwrap();
    let opts = ParseOptions { restrict: false, ..ParseOptions::default() };
    for s in &sentences {
        let p = model.parse(&s.tokens, &opts).unwrap();
        assert!(validate(&p.graph).is_well_formed());
        assert!(p.rejected <= p.actions.len());
    }
}

#[test]
fn count_baseline_recovers_most_of_the_toy_corpus() {
    let sentences = synth::toy_sentences();
    let model = CountModel::new(&sentences);
    let mut preds = Vec::new();
    for s in &sentences {
        let p = model.parse(&s.tokens, &ParseOptions::default()).unwrap();
        assert!(validate(&p.graph).is_well_formed());
        preds.push(Some(p.graph));
    }
    let golds: Vec<_> = sentences.iter().map(|s| s.graph.clone()).collect();
    let r = corpus_eval(&preds, &golds, DEFAULT_RESTARTS, 0, false).unwrap();
    assert!(r.f1 > 0.3, "{r:?}");
}
