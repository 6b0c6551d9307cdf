use std::collections::{BTreeMap, BTreeSet};

use dag_grammar::derive::replay;
use dag_grammar::eval::match_graphs;
use dag_grammar::grammar::{build_grammar, extract_derivation, DerivationTree, Production};
use dag_grammar::graph::{parse_penman, Graph};
use dag_grammar::synth::{self, RandomGraphs};
use dag_grammar::worked_example;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn random_graphs(count: u64, max_nodes: usize) -> impl Iterator<Item = Graph> {
    let sampler = RandomGraphs { max_nodes, reentrancy: 0.4, ..RandomGraphs::default() };
    (0..count).map(move |seed| sampler.sample(&mut ChaCha8Rng::seed_from_u64(seed)))
}

fn subtree_nodes(t: &DerivationTree, out: &mut BTreeSet<String>) {
    out.insert(t.node.clone());
    t.children.iter().for_each(|c| subtree_nodes(c, out));
}

/// Nodes touched by the subgraph below `t` that are also the target of an
/// edge from outside it, not counting the edge that introduces `t` itself.
fn shared_count(g: &Graph, t: &DerivationTree) -> usize {
    let mut inside = BTreeSet::new();
    subtree_nodes(t, &mut inside);
    let is_inside = |i: usize| inside.contains(&g.node(i).id);
    let mut touched: BTreeSet<usize> = (0..g.len()).filter(|&i| is_inside(i)).collect();
    for (s, e) in g.edges() {
        if is_inside(s) {
            touched.insert(e.target);
        }
    }
    let root = g.index_of(&t.node).unwrap();
    let mut external: BTreeMap<usize, usize> = BTreeMap::new();
    for (s, e) in g.edges() {
        if !is_inside(s) {
            *external.entry(e.target).or_default() += 1;
        }
    }
    if root != g.root() {
        // The defining edge from the parent.
        *external.get_mut(&root).unwrap() -= 1;
    }
    touched.iter().filter(|v| external.get(v).copied().unwrap_or(0) > 0).count()
}

fn check_ranks(g: &Graph, t: &DerivationTree) {
    assert_eq!(t.production.lhs_rank, shared_count(g, t), "rank of {} in {g:?}", t.node);
    t.children.iter().for_each(|c| check_ranks(g, c));
}

#[test]
fn rank_law() {
    check_ranks(&parse_penman(worked_example::PENMAN).unwrap(), &extract_derivation(&parse_penman(worked_example::PENMAN).unwrap()).unwrap().tree);
    for g in random_graphs(2000, 8) {
        let d = extract_derivation(&g).unwrap();
        check_ranks(&g, &d.tree);
    }
}

fn reference_counts(p: &Production) -> BTreeMap<usize, usize> {
    let mut counts: BTreeMap<usize, usize> = (1..=p.lhs_rank).map(|k| (k, 1)).collect();
    for k in p.occurrences() {
        *counts.entry(k).or_default() += 1;
    }
    counts
}

#[test]
fn reference_count_law() {
    let corpus: Vec<Graph> = synth::bundled_graphs().into_iter().chain(random_graphs(1000, 10)).collect();
    let (grammar, failures) = build_grammar(&corpus);
    assert!(failures.is_empty());
    for p in grammar.productions() {
        for (k, n) in reference_counts(p) {
            assert!(n >= 2, "${k} occurs {n} times in {p}");
        }
    }
}

#[test]
fn coverage_law() {
    for g in synth::bundled_graphs().iter().chain(&random_graphs(500, 10).collect::<Vec<_>>()) {
        let d = extract_derivation(g).unwrap();
        assert_eq!(d.productions().count(), g.len());
        assert_eq!(d.tree.size(), g.len());
    }
}

#[test]
fn productions_print_and_parse_back() {
    let (grammar, _) = build_grammar(&synth::bundled_graphs());
    for p in grammar.productions() {
        assert_eq!(&p.to_string().parse::<Production>().unwrap(), p);
    }
}

#[test]
fn replay_reproduces_sampled_graphs() {
    for g in random_graphs(1000, 8) {
        let d = extract_derivation(&g).unwrap();
        let back = replay(&d.actions).unwrap().finish().unwrap();
        assert!(back.is_isomorphic(&g));
        assert_eq!(match_graphs(&back, &g, 4, 0).f1, 1.0);
    }
}

#[test]
fn derivations_are_unique() {
    let graphs: Vec<Graph> = synth::bundled_graphs().into_iter().chain(random_graphs(500, 10)).collect();
    for g in &graphs {
        let d = extract_derivation(g).unwrap();
        let back = replay(&d.actions).unwrap().finish().unwrap();
        assert_eq!(extract_derivation(&back).unwrap().actions, d.actions);
    }
}

#[test]
fn worked_example_grammar() {
    let (grammar, _) = build_grammar([&parse_penman(worked_example::PENMAN).unwrap()]);
    let stats = grammar.stats();
    assert_eq!(stats.fragments, 7);
    assert!((stats.avg_rank - 3.0 / 7.0).abs() < 1e-12);
}
