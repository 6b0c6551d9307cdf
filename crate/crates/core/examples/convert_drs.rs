//! Converts the worked-example box structure to a graph and back, then
//! shows what the lossy document drops.

use dag_grammar::drs::{boxes_to_graph, clause_triples, graph_to_boxes, parse_clauses, print_clauses};
use dag_grammar::eval::{match_triples, DEFAULT_RESTARTS};
use dag_grammar::graph::print_penman;
use dag_grammar::{synth, worked_example};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let boxes = parse_clauses(worked_example::CLAUSES)?;
    let graph = boxes_to_graph(&boxes)?.value;
    println!("{}\n", print_penman(&graph));

    let back = graph_to_boxes(&graph)?.value;
    print!("{}", print_clauses(&back));
    let score = match_triples(&clause_triples(&back), &clause_triples(&boxes), DEFAULT_RESTARTS, 0);
    println!("clause F1 after the round trip: {:.3}\n", score.f1);

    let lossy = synth::lossy_document();
    let converted = boxes_to_graph(&lossy)?;
    for note in &converted.notes {
        println!("note: {note}");
    }
    let back = graph_to_boxes(&converted.value)?.value;
    let score = match_triples(&clause_triples(&back), &clause_triples(&lossy), DEFAULT_RESTARTS, 0);
    println!("lossy document clause F1: {:.3}", score.f1);
    Ok(())
}
