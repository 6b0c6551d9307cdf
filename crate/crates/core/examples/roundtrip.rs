//! Extracts, replays and re-matches every graph of the bundled corpus.

use std::time::Instant;

use dag_grammar::derive::replay;
use dag_grammar::eval::{corpus_eval, DEFAULT_RESTARTS};
use dag_grammar::grammar::extract_derivation;
use dag_grammar::synth;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let start = Instant::now();
    let graphs = synth::bundled_graphs();
    let mut replayed = Vec::with_capacity(graphs.len());
    for g in &graphs {
        let d = extract_derivation(g)?;
        replayed.push(Some(replay(&d.actions)?.finish()?));
    }
    let r = corpus_eval(&replayed, &graphs, DEFAULT_RESTARTS, 0, false)?;
    println!("{} graphs, F1 {:.3}, {:.2?}", r.pairs, r.f1, start.elapsed());
    Ok(())
}
