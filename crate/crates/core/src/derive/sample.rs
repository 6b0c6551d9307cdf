use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Action, ActionParseError, DerivationState, DeriveError, Feasibility, Pending};
use crate::grammar::Grammar;
use crate::graph::Graph;

#[derive(Debug, Clone, thiserror::Error, PartialEq, Eq)]
pub enum SampleError {
    #[error("the grammar cannot complete a derivation from T0")]
    NoTerminatingProduction,
    #[error("the grammar has open labels but no label vocabulary")]
    NoLabels,
    #[error(transparent)]
    Derive(#[from] DeriveError),
}

/// Draws a derivation uniformly over feasible actions at every step.
/// Deterministic per seed; returns the actions and the derived graph.
pub fn sample(grammar: &Grammar, seed: u64, depth_cap: usize) -> Result<(Vec<Action>, Graph), SampleError> {
    sample_with(grammar, &Feasibility::new(grammar), seed, depth_cap)
}

impl Feasibility {
    /// [`sample`] with a precomputed analysis.
    pub fn sample(&self, grammar: &Grammar, seed: u64, depth_cap: usize) -> Result<(Vec<Action>, Graph), SampleError> {
        sample_with(grammar, self, seed, depth_cap)
    }
}

fn sample_with(grammar: &Grammar, f: &Feasibility, seed: u64, depth_cap: usize) -> Result<(Vec<Action>, Graph), SampleError> {
    if !f.can_complete() {
        return Err(SampleError::NoTerminatingProduction);
    }
    let labels: Vec<_> = grammar.labels().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = DerivationState::start();
    let mut actions = Vec::new();
    while let Some(top) = state.top() {
        let action = match top {
            Pending::Fragment { .. } => {
                let options = f.feasible_productions(&state, grammar, Some(depth_cap))?;
                let &i = options.choose(&mut rng).expect("feasible states always offer a production");
                Action::GenFrag(grammar.production(i).clone())
            }
            Pending::Label { .. } => Action::GenLabel((*labels.choose(&mut rng).ok_or(SampleError::NoLabels)?).clone()),
        };
        state.apply(&action)?;
        actions.push(action);
    }
    Ok((actions, state.finish()?))
}

#[derive(Debug, Clone, thiserror::Error, PartialEq, Eq)]
pub enum TraceError {
    #[error("line {line}: {source}")]
    Parse {
        line: usize,
        #[source]
        source: ActionParseError,
    },
    #[error("action {index}: {source}")]
    Derive {
        index: usize,
        #[source]
        source: DeriveError,
    },
    #[error("actions ended before the derivation was complete")]
    Incomplete,
}

/// Applies generation actions from the start state. `Reduce` entries are
/// skipped since reduces fire on their own.
pub fn replay<'a>(actions: impl IntoIterator<Item = &'a Action>) -> Result<DerivationState, TraceError> {
    let mut state = DerivationState::start();
    for (index, a) in actions.into_iter().enumerate() {
        if *a == Action::Reduce {
            continue;
        }
        state.apply(a).map_err(|source| TraceError::Derive { index, source })?;
    }
    if !state.is_complete() {
        return Err(TraceError::Incomplete);
    }
    Ok(state)
}

/// One line per action with the automatic `REDUCE` lines interleaved.
pub fn trace<'a>(actions: impl IntoIterator<Item = &'a Action>) -> Result<String, TraceError> {
    let mut state = DerivationState::start();
    let mut out = String::new();
    for (index, a) in actions.into_iter().enumerate() {
        if *a == Action::Reduce {
            continue;
        }
        let reduced = state.apply(a).map_err(|source| TraceError::Derive { index, source })?;
        out.push_str(&a.to_string());
        out.push('\n');
        for _ in reduced {
            out.push_str("REDUCE\n");
        }
    }
    Ok(out)
}

pub fn parse_trace(text: &str) -> Result<Vec<Action>, TraceError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
        .map(|(i, l)| l.parse().map_err(|source| TraceError::Parse { line: i + 1, source }))
        .collect()
}
