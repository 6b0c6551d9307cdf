//! Triple-matching evaluation.
//!
//! Graphs are compared as sets of instance, attribute, relation and top
//! triples under the best one-to-one alignment of their variables. The
//! alignment is searched by hill climbing from several starts;
//! [`brute_force_match`] enumerates it exactly for small graphs.

mod fine;
mod matcher;

use crate::graph::{to_triples, validate, Graph};

pub use fine::{fine_grained, Category, Counts, FineGrained};
pub use matcher::{brute_force_match, match_triples, BruteForceError, MatchResult, MAX_BRUTE_VARS};

pub const DEFAULT_RESTARTS: usize = 20;

/// Matches two graphs. An ill-formed prediction scores zero and is flagged.
pub fn match_graphs(pred: &Graph, gold: &Graph, restarts: usize, seed: u64) -> MatchResult {
    if !validate(pred).is_well_formed() {
        return ill_formed(gold);
    }
    match_triples(&to_triples(pred), &to_triples(gold), restarts, seed)
}

fn ill_formed(gold: &Graph) -> MatchResult {
    let mut r = MatchResult::from_counts(0, 0, to_triples(gold).len());
    r.ill_formed = true;
    r
}

#[derive(Debug, Clone, thiserror::Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("{pred} predictions for {gold} gold graphs")]
    LengthMismatch { pred: usize, gold: usize },
}

/// Micro-averaged scores over aligned prediction and gold lists.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusResult {
    pub pairs: usize,
    pub matched: usize,
    pub pred_total: usize,
    pub gold_total: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub ill_formed: usize,
    pub fine: Option<FineGrained>,
}

impl CorpusResult {
    pub fn ill_formed_rate(&self) -> f64 {
        if self.pairs == 0 {
            0.0
        } else {
            100.0 * self.ill_formed as f64 / self.pairs as f64
        }
    }

    /// `key=value` lines.
    pub fn records(&self) -> String {
        let mut out = format!(
            "pairs={}\nmatched={}\npred_triples={}\ngold_triples={}\nP={:.3}\nR={:.3}\nF1={:.3}\nill_formed={}\nill_formed_pct={:.2}\n",
            self.pairs,
            self.matched,
            self.pred_total,
            self.gold_total,
            self.precision,
            self.recall,
            self.f1,
            self.ill_formed,
            self.ill_formed_rate()
        );
        if let Some(fine) = &self.fine {
            for (name, c) in fine.rows().into_iter().filter(|(_, c)| !c.is_empty()) {
                out.push_str(&format!("{name}.F1={:.3}\n", c.f1()));
            }
        }
        out
    }
}

/// Scores `preds[i]` against `golds[i]`; `None` predictions count as
/// ill-formed. Pair `i` uses seed `seed + i`.
pub fn corpus_eval(
    preds: &[Option<Graph>],
    golds: &[Graph],
    restarts: usize,
    seed: u64,
    with_fine: bool,
) -> Result<CorpusResult, EvalError> {
    if preds.len() != golds.len() {
        return Err(EvalError::LengthMismatch { pred: preds.len(), gold: golds.len() });
    }
    let (mut matched, mut pred_total, mut gold_total, mut bad) = (0, 0, 0, 0);
    let mut fine = with_fine.then(FineGrained::default);
    for (i, (pred, gold)) in preds.iter().zip(golds).enumerate() {
        let r = match pred {
            Some(p) => match_graphs(p, gold, restarts, seed.wrapping_add(i as u64)),
            None => ill_formed(gold),
        };
        if let Some(acc) = fine.as_mut() {
            let pred_triples = pred.as_ref().filter(|_| !r.ill_formed).map(to_triples).unwrap_or_default();
            acc.merge(&fine_grained(&pred_triples, &to_triples(gold), &r));
        }
        matched += r.matched;
        pred_total += r.pred_total;
        gold_total += r.gold_total;
        bad += usize::from(r.ill_formed);
    }
    let (precision, recall, f1) = matcher::prf(matched, pred_total, gold_total);
    Ok(CorpusResult { pairs: golds.len(), matched, pred_total, gold_total, precision, recall, f1, ill_formed: bad, fine })
}
