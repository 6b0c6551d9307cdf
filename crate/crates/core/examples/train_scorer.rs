//! Trains a small scorer on the toy sentences until it fits them, then
//! parses each sentence and scores the parses.

use dag_grammar::eval::{corpus_eval, DEFAULT_RESTARTS};
use dag_grammar::scorer::{train, Dims, ParseOptions, TrainConfig};
use dag_grammar::synth;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("DAGRAM_LOG", "info")).init();
    let sentences = synth::toy_sentences();
    let config = TrainConfig { epochs: 200, decay_every: 1000, target_accuracy: Some(1.0), dims: Dims::desk(), ..Default::default() };
    let (model, stats) = train(&sentences, &config)?;
    let last = stats.last().expect("at least one epoch");
    println!("epochs {} loss {:.4} accuracy {:.4}", last.epoch, last.loss, last.accuracy);

    let mut preds = Vec::new();
    for s in &sentences {
        preds.push(Some(model.parse(&s.tokens, &ParseOptions::default())?.graph));
    }
    let golds: Vec<_> = sentences.iter().map(|s| s.graph.clone()).collect();
    let r = corpus_eval(&preds, &golds, DEFAULT_RESTARTS, 0, false)?;
    println!("parse F1 {:.4}", r.f1);
    Ok(())
}
