use dag_grammar::derive::{parse_trace, replay, trace, Action, DerivationState, DeriveError, Feasibility};
use dag_grammar::grammar::{build_grammar, extract_derivation, Grammar};
use dag_grammar::graph::{parse_penman, validate, Graph};
use dag_grammar::synth::RandomGraphs;
use dag_grammar::worked_example;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn worked_grammar() -> Grammar {
    build_grammar([&parse_penman(worked_example::PENMAN).unwrap()]).0
}

fn random_grammar(seed: u64, graphs: usize) -> Grammar {
    let sampler = RandomGraphs { max_nodes: 9, reentrancy: 0.4, ..RandomGraphs::default() };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let corpus: Vec<Graph> = (0..graphs).map(|_| sampler.sample(&mut rng)).collect();
    build_grammar(&corpus).0
}

#[test]
fn start_offers_the_rank_zero_productions() {
    let g = worked_grammar();
    let start = DerivationState::start();
    let offered = start.applicable_productions(&g, true).unwrap();
    let rank_zero: Vec<usize> = (0..g.len()).filter(|&i| g.production(i).lhs_rank == 0).collect();
    assert_eq!(offered, rank_zero);
    assert_eq!(offered.len(), 4);
    assert_eq!(start.applicable_productions(&g, false).unwrap().len(), 7);
}

#[test]
fn rank_mismatch_is_rejected_when_unrestricted() {
    let g = worked_grammar();
    let d = extract_derivation(&parse_penman(worked_example::PENMAN).unwrap()).unwrap();
    let mut state = DerivationState::start();
    state.apply(&d.actions[0]).unwrap();
    let before = state.render();
    let leaf = (0..g.len()).map(|i| g.production(i)).find(|p| p.lhs_rank == 0 && p.items.is_empty()).unwrap();
    assert_eq!(state.apply(&Action::GenFrag(leaf.clone())), Err(DeriveError::RankMismatch { frame: 1, production: 0 }));
    assert_eq!(state.render(), before);
}

#[test]
fn worked_grammar_samples_validate() {
    let g = worked_grammar();
    let f = Feasibility::new(&g);
    let (actions, graph) = f.sample(&g, 1, 10).unwrap();
    assert!(validate(&graph).is_well_formed());
    let replayed = replay(&actions).unwrap().finish().unwrap();
    assert_eq!(replayed, graph);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn random_grammars_derive_well_formed_graphs(grammar_seed in 0u64..1000, seed in any::<u64>(), cap in 0usize..25) {
        let g = random_grammar(grammar_seed, 12);
        let f = Feasibility::new(&g);
        let (actions, graph) = f.sample(&g, seed, cap).unwrap();
        prop_assert!(validate(&graph).is_well_formed());
        let text = trace(&actions).unwrap();
        let parsed: Vec<Action> = parse_trace(&text).unwrap().into_iter().filter(|a| *a != Action::Reduce).collect();
        prop_assert_eq!(parsed, actions.clone());
        let back = extract_derivation(&graph).unwrap();
        prop_assert_eq!(replay(&back.actions).unwrap().finish().unwrap(), graph);
    }

    #[test]
    fn feasible_choices_never_strand_the_derivation(grammar_seed in 0u64..1000, picks in prop::collection::vec(any::<prop::sample::Index>(), 1..300)) {
        let g = random_grammar(grammar_seed, 12);
        let f = Feasibility::new(&g);
        let labels: Vec<_> = g.labels().cloned().collect();
        let mut state = DerivationState::start();
        let mut picks = picks.into_iter().cycle();
        let mut steps = 0;
        while !state.is_complete() {
            let pick = picks.next().unwrap();
            let action = match state.applicable_productions(&g, true).unwrap().is_empty() {
                true => Action::GenLabel(pick.get(&labels).clone()),
                false => {
                    let options = f.feasible_productions(&state, &g, Some(6)).unwrap();
                    prop_assert!(!options.is_empty());
                    Action::GenFrag(g.production(*pick.get(&options)).clone())
                }
            };
            state.apply(&action).unwrap();
            steps += 1;
            prop_assert!(steps < 1_000_000);
        }
        prop_assert!(validate(&state.finish().unwrap()).is_well_formed());
    }
}
