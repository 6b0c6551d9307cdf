use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::corpus::Token;

pub const UNK: &str = "<unk>";

/// String interning with the unknown item at index 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "Vec<String>", into = "Vec<String>")]
pub struct Vocab {
    items: Vec<String>,
    index: HashMap<String, usize>,
}

impl Default for Vocab {
    fn default() -> Self {
        Vocab::from(Vec::new())
    }
}

impl From<Vec<String>> for Vocab {
    fn from(mut items: Vec<String>) -> Self {
        if items.first().map(String::as_str) != Some(UNK) {
            items.insert(0, UNK.into());
        }
        let index = items.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
        Vocab { items, index }
    }
}

impl From<Vocab> for Vec<String> {
    fn from(v: Vocab) -> Self {
        v.items
    }
}

impl Vocab {
    pub fn insert(&mut self, item: &str) -> usize {
        if let Some(&i) = self.index.get(item) {
            return i;
        }
        self.items.push(item.into());
        self.index.insert(item.into(), self.items.len() - 1);
        self.items.len() - 1
    }

    /// Index of `item`, or 0 if unknown.
    pub fn get(&self, item: &str) -> usize {
        self.lookup(item).unwrap_or(0)
    }

    pub fn lookup(&self, item: &str) -> Option<usize> {
        self.index.get(item).copied()
    }

    pub fn item(&self, i: usize) -> &str {
        &self.items[i]
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.len() <= 1
    }

    pub fn items(&self) -> &[String] {
        &self.items
    }
}

/// Vocabulary indices of one token.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TokenFeatures {
    pub word: usize,
    pub pretrained: usize,
    pub lemma: usize,
    pub pos: usize,
    pub semtag: usize,
    pub dep: usize,
}

/// The six input vocabularies. Pretrained ids key on the lowercased word.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FeatureVocabs {
    pub word: Vocab,
    pub pretrained: Vocab,
    pub lemma: Vocab,
    pub pos: Vocab,
    pub semtag: Vocab,
    pub dep: Vocab,
}

impl FeatureVocabs {
    pub fn build<'a>(tokens: impl IntoIterator<Item = &'a Token>) -> Self {
        let mut v = FeatureVocabs::default();
        for t in tokens {
            v.word.insert(&t.word);
            v.pretrained.insert(&t.word.to_lowercase());
            v.lemma.insert(&t.lemma);
            v.pos.insert(&t.pos);
            v.semtag.insert(&t.semtag);
            v.dep.insert(&t.dep);
        }
        v
    }

    pub fn features(&self, tokens: &[Token]) -> Vec<TokenFeatures> {
        tokens
            .iter()
            .map(|t| TokenFeatures {
                word: self.word.get(&t.word),
                pretrained: self.pretrained.get(&t.word.to_lowercase()),
                lemma: self.lemma.get(&t.lemma),
                pos: self.pos.get(&t.pos),
                semtag: self.semtag.get(&t.semtag),
                dep: self.dep.get(&t.dep),
            })
            .collect()
    }

    pub fn sizes(&self) -> [usize; 6] {
        [self.word.len(), self.pretrained.len(), self.lemma.len(), self.pos.len(), self.semtag.len(), self.dep.len()]
    }
}
