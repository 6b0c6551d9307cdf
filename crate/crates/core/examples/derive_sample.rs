//! Samples derivations from the bundled grammar and checks that every
//! derived graph is well formed.

use dag_grammar::derive::{trace, Feasibility};
use dag_grammar::grammar::build_grammar;
use dag_grammar::graph::{print_penman, validate};
use dag_grammar::synth;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (grammar, _) = build_grammar(&synth::bundled_graphs());
    let feasibility = Feasibility::new(&grammar);

    let (actions, graph) = feasibility.sample(&grammar, 7, 6)?;
    println!("{}", trace(&actions)?);
    println!("{}\n", print_penman(&graph));

    let (mut nodes, mut invalid) = (0, 0);
    for seed in 0..1000 {
        let (_, g) = feasibility.sample(&grammar, seed, 20)?;
        nodes += g.len();
        invalid += usize::from(!validate(&g).is_well_formed());
    }
    println!("1000 samples, mean size {:.1} nodes, {invalid} ill-formed", nodes as f64 / 1000.0);
    Ok(())
}
