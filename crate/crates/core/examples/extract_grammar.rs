//! Extracts the derivation of the worked example, prints its distinct productions
//! and the partial strings after each fragment, then summarises the grammar
//! of the bundled corpus.

use dag_grammar::derive::{Action, DerivationState};
use dag_grammar::grammar::{build_grammar, extract_derivation, Grammar};
use dag_grammar::graph::parse_penman;
use dag_grammar::{synth, worked_example};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let graph = parse_penman(worked_example::PENMAN)?;
    let derivation = extract_derivation(&graph)?;
    let mut distinct = Grammar::new();
    distinct.add_derivation(&derivation);
    for (p, count) in distinct.production_counts() {
        println!("{count} x {p}");
    }
    println!("\n{}", derivation.tree);

    let mut state = DerivationState::start();
    for action in &derivation.actions {
        state.apply(action)?;
        if matches!(action, Action::GenFrag(_)) {
            println!("{}", state.render());
        }
    }

    let corpus = synth::bundled_graphs();
    let (grammar, failures) = build_grammar(&corpus);
    println!("\n{} graphs, {} extraction failures", corpus.len(), failures.len());
    print!("{}", grammar.stats().table(false));
    Ok(())
}
