use std::collections::BTreeMap;
use std::fmt;

use super::matcher::{prf, Encoded, Key, ATTRIBUTE, INSTANCE, RELATION};
use super::MatchResult;
use crate::graph::{TripleSet, BOX_LEMMA, SENSE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Category {
    /// Relations leaving a box: operators, discourse relations and box
    /// membership.
    Operators,
    /// Relations between non-box nodes.
    Roles,
    /// Instance triples and non-sense attributes.
    Concepts,
    Nouns,
    Verbs,
    Adjectives,
    Adverbs,
    /// Sense tags without a recognised part-of-speech letter.
    OtherSenses,
}

impl Category {
    pub const ALL: [Category; 8] = [
        Category::Operators,
        Category::Roles,
        Category::Concepts,
        Category::Nouns,
        Category::Verbs,
        Category::Adjectives,
        Category::Adverbs,
        Category::OtherSenses,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Category::Operators => "operators",
            Category::Roles => "roles",
            Category::Concepts => "concepts",
            Category::Nouns => "nouns",
            Category::Verbs => "verbs",
            Category::Adjectives => "adjectives",
            Category::Adverbs => "adverbs",
            Category::OtherSenses => "other-senses",
        }
    }

    pub fn is_sense(self) -> bool {
        matches!(self, Category::Nouns | Category::Verbs | Category::Adjectives | Category::Adverbs | Category::OtherSenses)
    }

    /// Keyed on the letter before the first dot: `n.01` is a noun.
    pub fn of_sense(sense: &str) -> Category {
        match sense.split('.').next().unwrap_or("") {
            "n" => Category::Nouns,
            "v" => Category::Verbs,
            "a" | "s" => Category::Adjectives,
            "r" => Category::Adverbs,
            _ => Category::OtherSenses,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Counts {
    pub matched: usize,
    pub pred: usize,
    pub gold: usize,
}

impl Counts {
    pub fn prf(&self) -> (f64, f64, f64) {
        prf(self.matched, self.pred, self.gold)
    }

    pub fn f1(&self) -> f64 {
        self.prf().2
    }

    /// No triples of this category on either side.
    pub fn is_empty(&self) -> bool {
        self.pred == 0 && self.gold == 0
    }

    fn add(&mut self, other: Counts) {
        self.matched += other.matched;
        self.pred += other.pred;
        self.gold += other.gold;
    }
}

/// Per-category triple counts. Top triples belong to no category.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FineGrained {
    pub categories: BTreeMap<Category, Counts>,
    /// Everything except top triples and sense attributes.
    pub without_sense: Counts,
}

impl FineGrained {
    pub fn get(&self, c: Category) -> Counts {
        self.categories.get(&c).copied().unwrap_or_default()
    }

    /// All sense categories together.
    pub fn synsets(&self) -> Counts {
        let mut total = Counts::default();
        for (c, counts) in &self.categories {
            if c.is_sense() {
                total.add(*counts);
            }
        }
        total
    }

    pub fn merge(&mut self, other: &FineGrained) {
        for (c, counts) in &other.categories {
            self.categories.entry(*c).or_default().add(*counts);
        }
        self.without_sense.add(other.without_sense);
    }

    /// Rows in display order: each category, synsets, then `-sense`.
    pub fn rows(&self) -> Vec<(&'static str, Counts)> {
        let mut rows: Vec<(&'static str, Counts)> = Category::ALL.iter().map(|&c| (c.name(), self.get(c))).collect();
        rows.insert(3, ("synsets", self.synsets()));
        rows.push(("-sense", self.without_sense));
        rows
    }
}

impl fmt::Display for FineGrained {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<14} {:>7} {:>7} {:>7}", "category", "P", "R", "F1")?;
        for (name, c) in self.rows() {
            if c.is_empty() {
                writeln!(f, "{name:<14} {:>7} {:>7} {:>7}", "-", "-", "-")?;
            } else {
                let (p, r, f1) = c.prf();
                writeln!(f, "{name:<14} {p:>7.3} {r:>7.3} {f1:>7.3}")?;
            }
        }
        Ok(())
    }
}

fn categorise(key: Key, concept: &[Option<u32>], labels: &[String]) -> Option<Category> {
    let (kind, a, l, _) = key;
    let is_box = |v: u32| concept.get(v as usize).copied().flatten().is_some_and(|c| labels[c as usize] == BOX_LEMMA);
    match kind {
        INSTANCE => Some(Category::Concepts),
        ATTRIBUTE => {
            let text = &labels[l as usize];
            match text.split_once('=') {
                Some((name, value)) if name == SENSE => Some(Category::of_sense(value)),
                _ => Some(Category::Concepts),
            }
        }
        RELATION => Some(if is_box(a) { Category::Operators } else { Category::Roles }),
        _ => None,
    }
}

/// Splits a match into triple categories. Matched triples are categorised
/// on the gold side.
pub fn fine_grained(pred: &TripleSet, gold: &TripleSet, result: &MatchResult) -> FineGrained {
    let enc = Encoded::new(pred, gold);
    let mapping = result.dense_mapping(&enc);
    let mut out = FineGrained::default();
    for c in Category::ALL {
        out.categories.insert(c, Counts::default());
    }
    let mut bump = |cat: Option<Category>, f: &dyn Fn(&mut Counts)| {
        if let Some(c) = cat {
            f(out.categories.get_mut(&c).unwrap());
            if !c.is_sense() {
                f(&mut out.without_sense);
            }
        }
    };
    if !result.ill_formed {
        for &k in &enc.pred {
            bump(categorise(k, &enc.pred_concept, &enc.labels), &|c| c.pred += 1);
        }
        for (k, n) in enc.matched_keys(&mapping) {
            bump(categorise(k, &enc.gold_concept, &enc.labels), &|c| c.matched += n as usize);
        }
    }
    for &k in &enc.gold {
        bump(categorise(k, &enc.gold_concept, &enc.labels), &|c| c.gold += 1);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::match_triples;
    use crate::graph::{parse_penman, to_triples};

    const SENSED: &str = "(b1/□ :Imp1 (b2/□ :Drs (x1/ship~n.01 :PartOf (x2/dock~n.01^p))) \
        :Imp2 (b3/□ :Drs (e1/need~v.01 :Pivot x1 :Theme (x3/anchor~n.01 :TopicOf (s1/big~a.01)))))";

    #[test]
    fn identical_graphs_score_one_everywhere() {
        let t = to_triples(&parse_penman(SENSED).unwrap());
        let r = match_triples(&t, &t, 5, 0);
        let fg = fine_grained(&t, &t, &r);
        for (name, c) in fg.rows() {
            if c.gold > 0 {
                assert_eq!(c.f1(), 1.0, "{name}");
            }
        }
        assert_eq!(fg.get(Category::Operators).gold, 4);
        assert_eq!(fg.get(Category::Roles).gold, 4);
        assert_eq!(fg.get(Category::Nouns).gold, 3);
    }

    #[test]
    fn changed_dock_sense_only_hits_nouns() {
        let gold = to_triples(&parse_penman(SENSED).unwrap());
        let pred = to_triples(&parse_penman(&SENSED.replace("dock~n.01", "dock~n.02")).unwrap());
        let r = match_triples(&pred, &gold, 5, 0);
        let fg = fine_grained(&pred, &gold, &r);
        for (name, c) in fg.rows() {
            if name == "nouns" || name == "synsets" {
                assert!(c.f1() < 1.0, "{name}");
            } else if c.gold > 0 {
                assert_eq!(c.f1(), 1.0, "{name}");
            }
        }
    }

    #[test]
    fn sense_letters() {
        assert_eq!(Category::of_sense("n.01"), Category::Nouns);
        assert_eq!(Category::of_sense("v.02"), Category::Verbs);
        assert_eq!(Category::of_sense("s.01"), Category::Adjectives);
        assert_eq!(Category::of_sense("r.01"), Category::Adverbs);
        assert_eq!(Category::of_sense("x"), Category::OtherSenses);
    }
}
