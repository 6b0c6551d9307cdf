use std::path::Path;

use dag_grammar::corpus::parse_sentences;
use dag_grammar::drs::{parse_clause_corpus, print_clause_corpus};
use dag_grammar::graph::parse_corpus;
use dag_grammar::synth;

fn data(name: &str) -> String {
    std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name)).unwrap()
}

#[test]
fn bundled_files_match_their_generator() {
    for (name, text) in synth::bundled_files() {
        assert!(data(name) == text, "data/{name} is stale; run the make_corpus example");
    }
}

#[test]
fn bundled_files_parse_back() {
    let clauses = data("corpus.clauses");
    let docs = parse_clause_corpus(&clauses).unwrap();
    assert_eq!(docs.len(), synth::CORPUS_SIZE);
    assert!(print_clause_corpus(&docs) == clauses);
    let graphs = parse_corpus(&data("corpus.penman")).unwrap();
    let expected = synth::bundled_graphs();
    assert_eq!(graphs.len(), expected.len());
    assert!(graphs.iter().zip(&expected).all(|(a, b)| a.is_isomorphic(b)));
    let toy = parse_sentences(&data("toy.corpus")).unwrap();
    let expected = synth::toy_sentences();
    assert_eq!(toy.len(), expected.len());
    for (a, b) in toy.iter().zip(&expected) {
        assert_eq!(a.tokens, b.tokens);
        assert!(a.graph.is_isomorphic(&b.graph));
    }
}
