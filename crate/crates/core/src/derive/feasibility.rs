use std::collections::HashMap;

use super::{check_bindings, DerivationState, DeriveError, Pending};
use crate::grammar::{Grammar, Production, Target};

/// A pending `T_i` up to what matters for completing it: its rank and
/// which arguments are already bound.
type Signature = (usize, u64);

const UNREACHABLE: usize = usize::MAX;
const MAX_RANK: usize = 63;

/// Static completion analysis of a grammar.
///
/// For every reachable nonterminal signature it records the least height of
/// a derivation tree that completes it. Productions whose children cannot
/// be completed are never offered, so a sampler or decoder restricted to
/// [`Feasibility::feasible_productions`] cannot get stuck.
#[derive(Debug, Clone)]
pub struct Feasibility {
    height: HashMap<Signature, usize>,
}

fn mask_of(bound: &[bool]) -> u64 {
    bound.iter().enumerate().fold(0, |m, (i, &b)| if b { m | (1 << i) } else { m })
}

/// Child signatures of `p` applied under `sig`, or `None` if `p` does not
/// apply.
fn children(p: &Production, sig: Signature) -> Option<Vec<Signature>> {
    let (rank, mask) = sig;
    if p.lhs_rank != rank || p.check().is_err() {
        return None;
    }
    let bound_arg = |k: usize| k <= rank && mask & (1 << (k - 1)) != 0;
    check_bindings(p, bound_arg).ok()?;
    let mut bound = vec![false; p.slot_count() + 1];
    for (k, b) in bound.iter_mut().enumerate().skip(1) {
        *b = bound_arg(k);
    }
    if let Some(k) = p.root_binds {
        bound[k] = true;
    }
    let mut out = Vec::new();
    for item in &p.items {
        if let Target::Call(args) = &item.target {
            if args.len() > MAX_RANK {
                return None;
            }
            let m = args.iter().enumerate().fold(0u64, |m, (i, &k)| if bound[k] { m | (1 << i) } else { m });
            out.push((args.len(), m));
            for &k in args {
                bound[k] = true;
            }
        }
    }
    Some(out)
}

impl Feasibility {
    pub fn new(grammar: &Grammar) -> Self {
        let productions: Vec<&Production> = grammar.productions().collect();
        let mut edges: HashMap<Signature, Vec<Vec<Signature>>> = HashMap::new();
        let mut queue = vec![(0usize, 0u64)];
        while let Some(sig) = queue.pop() {
            if edges.contains_key(&sig) {
                continue;
            }
            let options: Vec<Vec<Signature>> = productions.iter().filter_map(|p| children(p, sig)).collect();
            for kids in &options {
                queue.extend(kids.iter().filter(|k| !edges.contains_key(k)));
            }
            edges.insert(sig, options);
        }

        let mut height: HashMap<Signature, usize> = edges.keys().map(|&s| (s, UNREACHABLE)).collect();
        loop {
            let mut changed = false;
            for (sig, options) in &edges {
                let best = options
                    .iter()
                    .filter_map(|kids| {
                        kids.iter().try_fold(0usize, |m, k| (height[k] != UNREACHABLE).then(|| m.max(height[k]))).map(|m| m + 1)
                    })
                    .min()
                    .unwrap_or(UNREACHABLE);
                if best < height[sig] {
                    height.insert(*sig, best);
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        Feasibility { height }
    }

    fn min_height(&self, sig: Signature) -> usize {
        self.height.get(&sig).copied().unwrap_or(UNREACHABLE)
    }

    /// Whether the start symbol can be completed at all.
    pub fn can_complete(&self) -> bool {
        self.min_height((0, 0)) != UNREACHABLE
    }

    /// Least height of a derivation that completes `p` under the given
    /// bound arguments, or `None` if `p` cannot complete there.
    pub fn production_height(&self, p: &Production, bound: &[bool]) -> Option<usize> {
        if bound.len() > MAX_RANK {
            return None;
        }
        let kids = children(p, (bound.len(), mask_of(bound)))?;
        kids.iter()
            .try_fold(0usize, |m, k| {
                let h = self.min_height(*k);
                (h != UNREACHABLE).then(|| m.max(h))
            })
            .map(|m| m + 1)
    }

    /// Productions that apply to the pending `T_i` and can be completed.
    /// With a depth cap, a production at depth `d` is kept only if its
    /// completion height fits in `cap - d`, or is the least possible.
    pub fn feasible_productions(&self, state: &DerivationState, grammar: &Grammar, depth_cap: Option<usize>) -> Result<Vec<usize>, DeriveError> {
        let (bound, depth) = match state.top().ok_or(DeriveError::Complete)? {
            Pending::Fragment { bound, depth, .. } => (bound, depth),
            Pending::Label { .. } => return Ok(Vec::new()),
        };
        let floor = self.min_height((bound.len(), mask_of(&bound)));
        let budget = depth_cap.map(|cap| cap.saturating_sub(depth).max(floor));
        Ok((0..grammar.len())
            .filter(|&i| match self.production_height(grammar.production(i), &bound) {
                Some(h) => budget.is_none_or(|b| h <= b),
                None => false,
            })
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::{read_grammar, LabelSlot};
    use crate::graph::Sort;

    const WORKED: &str = "\
1 T0 -> (b/□ :Imp1 T1($1) :Imp2 T1($1))
1 T0 -> (x/L)
1 T0 -> (s/L)
1 T0 -> (x/L :TopicOf T0)
2 T1($1) -> (b/□ :Drs T1($1))
1 T1($1) -> (e/L :Pivot $1 :Theme T0)
1 T1(x) -> (x/L :PartOf T0)
";

    #[test]
    fn heights_of_the_worked_grammar() {
        let g = read_grammar(WORKED).unwrap();
        let f = Feasibility::new(&g);
        assert!(f.can_complete());
        let s = DerivationState::start();
        assert_eq!(f.feasible_productions(&s, &g, None).unwrap(), [0, 1, 2, 3]);
        assert_eq!(f.production_height(g.production(1), &[]), Some(1));
        assert_eq!(f.production_height(g.production(3), &[]), Some(2));
        // T1 with an unbound argument: r7 binds it directly, r5 defers.
        assert_eq!(f.production_height(g.production(6), &[false]), Some(2));
        assert_eq!(f.production_height(g.production(4), &[false]), Some(3));
        // r6 cannot point at a reference nobody binds.
        assert_eq!(f.production_height(g.production(5), &[false]), None);
        assert_eq!(f.production_height(g.production(5), &[true]), Some(2));
        assert_eq!(f.production_height(g.production(6), &[true]), None);
        // At the cap only the least-height start productions remain.
        assert_eq!(f.feasible_productions(&s, &g, Some(0)).unwrap(), [1, 2]);
    }

    #[test]
    fn grammar_without_leaves_cannot_complete() {
        let p = crate::grammar::Production::leaf(Sort('x'), LabelSlot::Open).with_item(crate::grammar::EdgeItem::call("A", vec![]));
        let g = Grammar::from_parts([p], []);
        assert!(!Feasibility::new(&g).can_complete());
    }
}
