//! Scores a perturbed graph against the original with the hill climber,
//! compares it with the exhaustive optimum and prints the category table.

use dag_grammar::eval::{brute_force_match, fine_grained, match_triples, DEFAULT_RESTARTS};
use dag_grammar::graph::{parse_penman, print_penman, to_triples};
use dag_grammar::synth;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (gold, text) = synth::bundled_graphs()
        .into_iter()
        .map(|g| {
            let text = print_penman(&g);
            (g, text)
        })
        .find(|(_, t)| t.contains("~n.01") && t.contains(":Agent"))
        .expect("corpus has a noun sense and an agent");
    let pred = parse_penman(&text.replacen("~n.01", "~n.02", 1).replacen(":Agent", ":Theme", 1))?;
    println!("{}\n", print_penman(&pred));
    let (p, g) = (to_triples(&pred), to_triples(&gold));

    let climbed = match_triples(&p, &g, DEFAULT_RESTARTS, 1);
    let exact = brute_force_match(&p, &g)?;
    println!("hill climbing: {}/{} matched, F1 {:.4}", climbed.matched, climbed.gold_total, climbed.f1);
    println!("exhaustive:    {}/{} matched, F1 {:.4}\n", exact.matched, exact.gold_total, exact.f1);
    print!("{}", fine_grained(&p, &g, &climbed));
    Ok(())
}
