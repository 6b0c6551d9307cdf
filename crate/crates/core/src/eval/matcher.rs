use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::graph::TripleSet;

/// Triple kinds; part of every encoded key.
pub(crate) const INSTANCE: u8 = 0;
pub(crate) const ATTRIBUTE: u8 = 1;
pub(crate) const RELATION: u8 = 2;
pub(crate) const TOP: u8 = 3;

/// `(kind, first variable, label, second variable)`. Attribute keys intern
/// `name=value` as the label; unused variable fields are zero.
pub(crate) type Key = (u8, u32, u32, u32);

/// Both triple sets with variables replaced by dense indices and labels
/// interned into a shared table.
#[derive(Debug, Clone)]
pub(crate) struct Encoded {
    pub pred_vars: Vec<String>,
    pub gold_vars: Vec<String>,
    pub pred: Vec<Key>,
    pub gold: Vec<Key>,
    pub gold_counts: HashMap<Key, u32>,
    /// Concept of each variable's first instance triple.
    pub pred_concept: Vec<Option<u32>>,
    pub gold_concept: Vec<Option<u32>>,
    pub labels: Vec<String>,
}

fn encode_side(t: &TripleSet, intern: &mut impl FnMut(&str) -> u32) -> (Vec<String>, Vec<Key>, Vec<Option<u32>>) {
    let vars: Vec<String> = t.variables().into_iter().map(String::from).collect();
    let index: HashMap<&str, u32> = vars.iter().enumerate().map(|(i, v)| (v.as_str(), i as u32)).collect();
    // Variables without an instance triple cannot be aligned; their triples
    // never match.
    let var = |v: &str| index.get(v).copied().unwrap_or(u32::MAX);
    let mut keys = Vec::with_capacity(t.len());
    let mut concept = vec![None; vars.len()];
    for i in &t.instances {
        let c = intern(&i.concept);
        let v = var(&i.var);
        if let Some(slot) = concept.get_mut(v as usize) {
            slot.get_or_insert(c);
        }
        keys.push((INSTANCE, v, c, 0));
    }
    for a in &t.attributes {
        keys.push((ATTRIBUTE, var(&a.var), intern(&format!("{}={}", a.name, a.value)), 0));
    }
    for r in &t.relations {
        keys.push((RELATION, var(&r.source), intern(&r.label), var(&r.target)));
    }
    for top in &t.tops {
        keys.push((TOP, var(top), 0, 0));
    }
    (vars, keys, concept)
}

impl Encoded {
    pub fn new(pred: &TripleSet, gold: &TripleSet) -> Self {
        let mut labels: Vec<String> = Vec::new();
        let mut table: HashMap<String, u32> = HashMap::new();
        let mut intern = |s: &str| -> u32 {
            if let Some(&i) = table.get(s) {
                return i;
            }
            let i = labels.len() as u32;
            labels.push(s.to_string());
            table.insert(s.to_string(), i);
            i
        };
        let (pred_vars, pred_keys, pred_concept) = encode_side(pred, &mut intern);
        let (gold_vars, gold_keys, gold_concept) = encode_side(gold, &mut intern);
        let mut gold_counts = HashMap::new();
        for k in &gold_keys {
            *gold_counts.entry(*k).or_insert(0) += 1;
        }
        Encoded { pred_vars, gold_vars, pred: pred_keys, gold: gold_keys, gold_counts, pred_concept, gold_concept, labels }
    }

    /// A pred key under a mapping, or `None` if a variable is unmapped.
    pub fn map_key(&self, key: Key, mapping: &[Option<u32>]) -> Option<Key> {
        let m = |v: u32| mapping.get(v as usize).copied().flatten();
        let (kind, a, l, b) = key;
        let a = m(a)?;
        let b = if kind == RELATION { m(b)? } else { b };
        Some((kind, a, l, b))
    }

    /// Mapped pred keys matched against gold as multisets.
    pub fn matched_keys(&self, mapping: &[Option<u32>]) -> HashMap<Key, u32> {
        let mut counts: HashMap<Key, u32> = HashMap::new();
        for &k in &self.pred {
            if let Some(mk) = self.map_key(k, mapping) {
                if self.gold_counts.contains_key(&mk) {
                    *counts.entry(mk).or_insert(0) += 1;
                }
            }
        }
        for (k, c) in counts.iter_mut() {
            *c = (*c).min(self.gold_counts[k]);
        }
        counts
    }

    pub fn score(&self, mapping: &[Option<u32>], scratch: &mut HashMap<Key, u32>) -> usize {
        scratch.clear();
        for &k in &self.pred {
            if let Some(mk) = self.map_key(k, mapping) {
                if self.gold_counts.contains_key(&mk) {
                    *scratch.entry(mk).or_insert(0) += 1;
                }
            }
        }
        scratch.iter().map(|(k, &c)| c.min(self.gold_counts[k]) as usize).sum()
    }

    fn perfect(&self) -> usize {
        self.pred.len().min(self.gold.len())
    }
}

/// Outcome of aligning a predicted triple set with a gold one.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchResult {
    pub matched: usize,
    pub pred_total: usize,
    pub gold_total: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Pred variable to gold variable.
    pub mapping: Vec<(String, String)>,
    pub restarts: usize,
    /// The prediction was ill-formed and scored zero.
    pub ill_formed: bool,
}

pub(crate) fn prf(matched: usize, pred_total: usize, gold_total: usize) -> (f64, f64, f64) {
    let p = if pred_total == 0 { 0.0 } else { matched as f64 / pred_total as f64 };
    let r = if gold_total == 0 { 0.0 } else { matched as f64 / gold_total as f64 };
    let f = if p + r == 0.0 { 0.0 } else { 2.0 * p * r / (p + r) };
    (p, r, f)
}

impl MatchResult {
    pub(crate) fn from_counts(matched: usize, pred_total: usize, gold_total: usize) -> Self {
        let (precision, recall, f1) = prf(matched, pred_total, gold_total);
        MatchResult { matched, pred_total, gold_total, precision, recall, f1, mapping: Vec::new(), restarts: 0, ill_formed: false }
    }

    fn with_mapping(enc: &Encoded, matched: usize, mapping: &[Option<u32>], restarts: usize) -> Self {
        let mut r = MatchResult::from_counts(matched, enc.pred.len(), enc.gold.len());
        r.mapping = mapping
            .iter()
            .enumerate()
            .filter_map(|(i, m)| m.map(|g| (enc.pred_vars[i].clone(), enc.gold_vars[g as usize].clone())))
            .collect();
        r.restarts = restarts;
        r
    }

    /// The mapping as dense indices into the variable lists of `enc`.
    pub(crate) fn dense_mapping(&self, enc: &Encoded) -> Vec<Option<u32>> {
        let gold: HashMap<&str, u32> = enc.gold_vars.iter().enumerate().map(|(i, v)| (v.as_str(), i as u32)).collect();
        let pairs: HashMap<&str, &str> = self.mapping.iter().map(|(p, g)| (p.as_str(), g.as_str())).collect();
        enc.pred_vars.iter().map(|p| pairs.get(p.as_str()).and_then(|g| gold.get(g).copied())).collect()
    }
}

/// Concept-overlap start: each pred variable, in order, takes the first
/// free gold variable with the same concept.
fn smart_start(enc: &Encoded) -> Vec<Option<u32>> {
    let mut used = vec![false; enc.gold_vars.len()];
    enc.pred_concept
        .iter()
        .map(|c| {
            let c = (*c)?;
            let g = (0..enc.gold_vars.len()).find(|&g| !used[g] && enc.gold_concept[g] == Some(c))?;
            used[g] = true;
            Some(g as u32)
        })
        .collect()
}

fn random_start(enc: &Encoded, rng: &mut ChaCha8Rng) -> Vec<Option<u32>> {
    let mut gold: Vec<u32> = (0..enc.gold_vars.len() as u32).collect();
    gold.shuffle(rng);
    (0..enc.pred_vars.len()).map(|i| gold.get(i).copied()).collect()
}

/// Greedy ascent: repeatedly takes the best single remap (to a free gold
/// variable or to nothing) or swap of two pred variables, first found on
/// ties, until no move improves the score.
fn climb(enc: &Encoded, mapping: &mut [Option<u32>], scratch: &mut HashMap<Key, u32>) -> usize {
    let np = mapping.len();
    let ng = enc.gold_vars.len();
    let perfect = enc.perfect();
    let mut score = enc.score(mapping, scratch);
    loop {
        if score == perfect {
            return score;
        }
        let mut used = vec![false; ng];
        for g in mapping.iter().flatten() {
            used[*g as usize] = true;
        }
        let mut best: Option<(usize, Move)> = None;
        let consider = |gain: usize, mv: Move, best: &mut Option<(usize, Move)>| {
            if gain > score && best.as_ref().is_none_or(|(b, _)| gain > *b) {
                *best = Some((gain, mv));
            }
        };
        for v in 0..np {
            let old = mapping[v];
            for g in (0..ng as u32).map(Some).chain(std::iter::once(None)) {
                if g == old || g.is_some_and(|g| used[g as usize]) {
                    continue;
                }
                mapping[v] = g;
                let s = enc.score(mapping, scratch);
                consider(s, Move::Remap(v, g), &mut best);
            }
            mapping[v] = old;
        }
        for v in 0..np {
            for w in v + 1..np {
                if mapping[v] == mapping[w] {
                    continue;
                }
                mapping.swap(v, w);
                let s = enc.score(mapping, scratch);
                mapping.swap(v, w);
                consider(s, Move::Swap(v, w), &mut best);
            }
        }
        match best {
            None => return score,
            Some((s, mv)) => {
                match mv {
                    Move::Remap(v, g) => mapping[v] = g,
                    Move::Swap(v, w) => mapping.swap(v, w),
                }
                score = s;
            }
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Move {
    Remap(usize, Option<u32>),
    Swap(usize, usize),
}

/// Hill-climbing alignment with `restarts` starts: one concept-informed
/// start followed by random ones drawn from a generator seeded with `seed`.
/// The best score over all starts is reported.
pub fn match_triples(pred: &TripleSet, gold: &TripleSet, restarts: usize, seed: u64) -> MatchResult {
    let enc = Encoded::new(pred, gold);
    let restarts = restarts.max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut scratch = HashMap::new();
    let mut best: Option<(usize, Vec<Option<u32>>)> = None;
    let mut used = 0;
    for r in 0..restarts {
        let mut mapping = if r == 0 { smart_start(&enc) } else { random_start(&enc, &mut rng) };
        let s = climb(&enc, &mut mapping, &mut scratch);
        used = r + 1;
        if best.as_ref().is_none_or(|(b, _)| s > *b) {
            best = Some((s, mapping));
        }
        if s == enc.perfect() {
            break;
        }
    }
    let (matched, mapping) = best.expect("at least one start");
    MatchResult::with_mapping(&enc, matched, &mapping, used)
}

#[derive(Debug, Clone, thiserror::Error, PartialEq, Eq)]
pub enum BruteForceError {
    #[error("smaller side has {0} variables; at most {MAX_BRUTE_VARS} are enumerated")]
    TooManyVariables(usize),
}

pub const MAX_BRUTE_VARS: usize = 8;

/// Exact maximum over all injective mappings.
///
/// Mapping an extra variable never loses a match, so only total injections
/// of the smaller variable set into the larger one are enumerated.
pub fn brute_force_match(pred: &TripleSet, gold: &TripleSet) -> Result<MatchResult, BruteForceError> {
    let enc = Encoded::new(pred, gold);
    let (np, ng) = (enc.pred_vars.len(), enc.gold_vars.len());
    let small = np.min(ng);
    if small > MAX_BRUTE_VARS {
        return Err(BruteForceError::TooManyVariables(small));
    }
    let mut scratch = HashMap::new();
    let mut best = (0usize, vec![None; np]);
    let mut chosen: Vec<u32> = Vec::with_capacity(small);
    let mut used = vec![false; np.max(ng)];
    let large = np.max(ng);
    let mut visit = |chosen: &[u32]| {
        let mapping: Vec<Option<u32>> = if np <= ng {
            chosen.iter().map(|&g| Some(g)).collect()
        } else {
            let mut m = vec![None; np];
            for (g, &p) in chosen.iter().enumerate() {
                m[p as usize] = Some(g as u32);
            }
            m
        };
        let s = enc.score(&mapping, &mut scratch);
        if s > best.0 {
            best = (s, mapping);
        }
    };
    fn rec(depth: usize, small: usize, large: usize, chosen: &mut Vec<u32>, used: &mut [bool], visit: &mut dyn FnMut(&[u32])) {
        if depth == small {
            visit(chosen);
            return;
        }
        for t in 0..large {
            if !used[t] {
                used[t] = true;
                chosen.push(t as u32);
                rec(depth + 1, small, large, chosen, used, visit);
                chosen.pop();
                used[t] = false;
            }
        }
    }
    rec(0, small, large, &mut chosen, &mut used, &mut visit);
    let (matched, mapping) = best;
    Ok(MatchResult::with_mapping(&enc, matched, &mapping, 0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{parse_penman, to_triples};
    use crate::worked_example;

    fn triples(s: &str) -> TripleSet {
        to_triples(&parse_penman(s).unwrap())
    }

    #[test]
    fn identity_is_perfect() {
        let t = triples(worked_example::PENMAN);
        let r = match_triples(&t, &t, 20, 1);
        assert_eq!(r.matched, t.len());
        assert_eq!(r.f1, 1.0);
        assert_eq!(r.restarts, 1);
        assert_eq!(brute_force_match(&t, &t).unwrap().f1, 1.0);
    }

    #[test]
    fn relabelled_concept_loses_one_triple() {
        let gold = triples(worked_example::PENMAN);
        let pred = triples(&worked_example::PENMAN.replace("ship", "boat"));
        let r = match_triples(&pred, &gold, 20, 7);
        assert_eq!(r.matched, gold.len() - 1);
        assert_eq!(r.recall, (gold.len() - 1) as f64 / gold.len() as f64);
    }

    #[test]
    fn single_node_against_two() {
        let pred = triples("(x1/ship)");
        let gold = triples("(e1/see :Theme (x1/ship))");
        let r = brute_force_match(&pred, &gold).unwrap();
        assert_eq!(r.matched, 1);
        assert_eq!(r.precision, 0.5);
        assert_eq!(r.recall, 0.25);
        assert_eq!(match_triples(&pred, &gold, 5, 0).matched, 1);
    }

    #[test]
    fn empty_sets_score_zero() {
        let r = match_triples(&TripleSet::default(), &TripleSet::default(), 3, 0);
        assert_eq!((r.matched, r.f1), (0, 0.0));
    }
}
