//! Seeded generators for test and demo data: small English sentences with
//! their box structures, and random well-formed DAGs.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{print_sentences, Sentence, Token};
use crate::drs::{boxes_to_graph, print_clause_corpus, BoxStructure, Condition, DrsBox, OperatorClause, PresupLink};
use crate::graph::{print_corpus, Graph, GraphBuilder, NodeLabel, Sort};

struct Noun {
    lemma: &'static str,
    sense: &'static str,
}

struct Verb {
    lemma: &'static str,
    past: &'static str,
    present: &'static str,
    roles: (&'static str, &'static str),
}

const NOUNS: &[Noun] = &[
    Noun { lemma: "ship", sense: "n.01" },
    Noun { lemma: "dock", sense: "n.01" },
    Noun { lemma: "anchor", sense: "n.01" },
    Noun { lemma: "cat", sense: "n.01" },
    Noun { lemma: "dog", sense: "n.01" },
    Noun { lemma: "farmer", sense: "n.01" },
    Noun { lemma: "donkey", sense: "n.01" },
    Noun { lemma: "man", sense: "n.01" },
    Noun { lemma: "woman", sense: "n.01" },
    Noun { lemma: "child", sense: "n.01" },
    Noun { lemma: "book", sense: "n.01" },
    Noun { lemma: "letter", sense: "n.02" },
    Noun { lemma: "car", sense: "n.01" },
    Noun { lemma: "wheel", sense: "n.01" },
    Noun { lemma: "house", sense: "n.01" },
    Noun { lemma: "door", sense: "n.01" },
    Noun { lemma: "teacher", sense: "n.01" },
    Noun { lemma: "student", sense: "n.01" },
    Noun { lemma: "river", sense: "n.01" },
    Noun { lemma: "bridge", sense: "n.01" },
    Noun { lemma: "apple", sense: "n.01" },
    Noun { lemma: "tree", sense: "n.01" },
    Noun { lemma: "bank", sense: "n.09" },
    Noun { lemma: "key", sense: "n.01" },
];

const TRANSITIVE: &[Verb] = &[
    Verb { lemma: "need", past: "needed", present: "needs", roles: ("Pivot", "Theme") },
    Verb { lemma: "see", past: "saw", present: "sees", roles: ("Experiencer", "Stimulus") },
    Verb { lemma: "like", past: "liked", present: "likes", roles: ("Experiencer", "Stimulus") },
    Verb { lemma: "own", past: "owned", present: "owns", roles: ("Pivot", "Theme") },
    Verb { lemma: "beat", past: "beat", present: "beats", roles: ("Agent", "Patient") },
    Verb { lemma: "chase", past: "chased", present: "chases", roles: ("Agent", "Theme") },
    Verb { lemma: "read", past: "read", present: "reads", roles: ("Agent", "Theme") },
    Verb { lemma: "open", past: "opened", present: "opens", roles: ("Agent", "Patient") },
    Verb { lemma: "build", past: "built", present: "builds", roles: ("Agent", "Result") },
    Verb { lemma: "find", past: "found", present: "finds", roles: ("Agent", "Theme") },
    Verb { lemma: "carry", past: "carried", present: "carries", roles: ("Agent", "Theme") },
    Verb { lemma: "feed", past: "fed", present: "feeds", roles: ("Agent", "Patient") },
];

const INTRANSITIVE: &[Verb] = &[
    Verb { lemma: "sleep", past: "slept", present: "sleeps", roles: ("Agent", "") },
    Verb { lemma: "smile", past: "smiled", present: "smiles", roles: ("Agent", "") },
    Verb { lemma: "leave", past: "left", present: "leaves", roles: ("Agent", "") },
    Verb { lemma: "bark", past: "barked", present: "barks", roles: ("Agent", "") },
    Verb { lemma: "fall", past: "fell", present: "falls", roles: ("Patient", "") },
    Verb { lemma: "run", past: "ran", present: "runs", roles: ("Agent", "") },
    Verb { lemma: "sing", past: "sang", present: "sings", roles: ("Agent", "") },
    Verb { lemma: "arrive", past: "arrived", present: "arrives", roles: ("Theme", "") },
];

const ADJECTIVES: &[&str] = &["big", "small", "old", "red", "happy", "heavy", "quiet", "new"];

const DISCOURSE: &[&str] = &["CONTINUATION", "RESULT", "CONTRAST", "EXPLANATION"];

/// Incrementally builds one document and its tokens.
#[derive(Default)]
struct Doc {
    bs: BoxStructure,
    counters: BTreeMap<char, usize>,
    tokens: Vec<Token>,
    presup: BTreeMap<String, String>,
}

impl Doc {
    fn name(&mut self, sort: char) -> String {
        let c = self.counters.entry(sort).or_insert(0);
        *c += 1;
        format!("{sort}{c}")
    }

    fn new_box(&mut self) -> String {
        let b = self.name('b');
        self.bs.boxes.push(DrsBox::new(b.clone()));
        b
    }

    fn boxed(&mut self, b: &str) -> &mut DrsBox {
        self.bs.boxes.iter_mut().find(|x| x.id == b).expect("declared box")
    }

    fn referent(&mut self, b: &str, sort: char) -> String {
        let v = self.name(sort);
        self.boxed(b).referents.push(v.clone());
        v
    }

    fn cond(&mut self, b: &str, c: Condition) {
        self.boxed(b).conditions.push(c);
    }

    fn op(&mut self, scope: &str, name: &str, args: &[&str]) {
        self.bs.operators.push(OperatorClause {
            scope: scope.into(),
            name: name.into(),
            args: args.iter().map(|s| s.to_string()).collect(),
        });
    }

    /// Presupposition box anchored at `anchor`, created on first use.
    fn presup_box(&mut self, anchor: &str) -> String {
        if let Some(b) = self.presup.get(anchor) {
            return b.clone();
        }
        let b = self.new_box();
        self.bs.presuppositions.push(PresupLink { presupposed: b.clone(), anchor: anchor.into() });
        self.presup.insert(anchor.into(), b.clone());
        b
    }

    /// A noun phrase referent: definites go to the anchor's presupposition
    /// box. Returns the variable and the box holding it.
    fn np(&mut self, anchor: &str, definite: bool) -> (String, String) {
        let home = if definite { self.presup_box(anchor) } else { anchor.to_string() };
        (self.referent(&home, 'x'), home)
    }

    fn noun_cond(&mut self, home: &str, x: &str, n: &Noun) {
        self.cond(home, Condition::unary(n.lemma, x).with_sense(n.sense));
    }

    fn tok(&mut self, word: &str, lemma: &str, pos: &str, semtag: &str, dep: &str) {
        self.tokens.push(Token::new(word, lemma, pos, semtag, dep));
    }

    fn det(&mut self, definite: bool, capital: bool, dep: &str) {
        let (word, sem) = if definite { ("the", "DEF") } else { ("a", "DIS") };
        let shown = if capital { capitalise(word) } else { word.to_string() };
        self.tok(&shown, word, "DT", sem, dep);
    }

    fn noun_tok(&mut self, n: &Noun, dep: &str) {
        self.tok(n.lemma, n.lemma, "NN", "CON", dep);
    }

    fn adj_tok(&mut self, a: &str) {
        self.tok(a, a, "JJ", "IST", "amod");
    }

    fn stop(&mut self) {
        self.tok(".", ".", ".", "NIL", "punct");
    }
}

fn capitalise(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

fn pick<'a, T>(rng: &mut ChaCha8Rng, xs: &'a [T]) -> &'a T {
    xs.choose(rng).expect("non-empty lexicon")
}

/// Two distinct nouns.
fn two_nouns(rng: &mut ChaCha8Rng) -> (&'static Noun, &'static Noun) {
    let mut picked = NOUNS.choose_multiple(rng, 2);
    (picked.next().unwrap(), picked.next().unwrap())
}

/// `A cat chased the big dog .` with optional time and adjective.
fn transitive(d: &mut Doc, rng: &mut ChaCha8Rng) {
    let (n1, n2) = two_nouns(rng);
    let v = pick(rng, TRANSITIVE);
    let (def1, def2) = (rng.gen_bool(0.4), rng.gen_bool(0.4));
    let adj = rng.gen_bool(0.3).then(|| *pick(rng, ADJECTIVES));
    let timed = rng.gen_bool(0.3);
    let b = d.new_box();
    let e = d.referent(&b, 'e');
    let (x1, h1) = d.np(&b, def1);
    let (x2, h2) = d.np(&b, def2);
    d.cond(&b, Condition::unary(v.lemma, &e).with_sense("v.01"));
    d.cond(&b, Condition::binary(v.roles.0, &e, &x1));
    d.cond(&b, Condition::binary(v.roles.1, &e, &x2));
    if timed {
        let t = d.referent(&b, 't');
        d.cond(&b, Condition::unary("time", &t).with_sense("n.08"));
        d.cond(&b, Condition::binary("Time", &e, &t));
    }
    d.noun_cond(&h1, &x1, n1);
    d.noun_cond(&h2, &x2, n2);
    if let Some(a) = adj {
        let s = d.referent(&b, 's');
        d.cond(&b, Condition::unary(a, &s).with_sense("a.01"));
        d.cond(&b, Condition::binary("Topic", &s, &x2));
    }
    d.det(def1, true, "det");
    d.noun_tok(n1, "nsubj");
    d.tok(v.past, v.lemma, "VBD", "PST", "root");
    d.det(def2, false, "det");
    if let Some(a) = adj {
        d.adj_tok(a);
    }
    d.noun_tok(n2, "obj");
    d.stop();
}

/// `The old cat slept .`
fn intransitive(d: &mut Doc, rng: &mut ChaCha8Rng) {
    let n = pick(rng, NOUNS);
    let v = pick(rng, INTRANSITIVE);
    let def = rng.gen_bool(0.5);
    let a = *pick(rng, ADJECTIVES);
    let b = d.new_box();
    let e = d.referent(&b, 'e');
    let (x, h) = d.np(&b, def);
    d.cond(&b, Condition::unary(v.lemma, &e).with_sense("v.01"));
    d.cond(&b, Condition::binary(v.roles.0, &e, &x));
    d.noun_cond(&h, &x, n);
    let s = d.referent(&b, 's');
    d.cond(&b, Condition::unary(a, &s).with_sense("a.01"));
    d.cond(&b, Condition::binary("Topic", &s, &x));
    d.det(def, true, "det");
    d.adj_tok(a);
    d.noun_tok(n, "nsubj");
    d.tok(v.past, v.lemma, "VBD", "PST", "root");
    d.stop();
}

/// `Every ship in the dock needs a big anchor .`
fn universal(d: &mut Doc, rng: &mut ChaCha8Rng) {
    let (n1, n3) = two_nouns(rng);
    let n2 = pick(rng, NOUNS);
    let v = pick(rng, TRANSITIVE);
    let located = rng.gen_bool(0.6);
    let adj = rng.gen_bool(0.5).then(|| *pick(rng, ADJECTIVES));
    let top = d.new_box();
    let restrictor = d.new_box();
    let scope = d.new_box();
    d.op(&top, "IMP", &[&restrictor, &scope]);
    let x1 = d.referent(&restrictor, 'x');
    d.noun_cond(&restrictor, &x1, n1);
    if located {
        let (x2, h2) = d.np(&restrictor, true);
        d.cond(&restrictor, Condition::binary("PartOf", &x1, &x2));
        d.noun_cond(&h2, &x2, n2);
    }
    let e = d.referent(&scope, 'e');
    let x3 = d.referent(&scope, 'x');
    d.cond(&scope, Condition::unary(v.lemma, &e).with_sense("v.01"));
    d.cond(&scope, Condition::binary(v.roles.0, &e, &x1));
    d.cond(&scope, Condition::binary(v.roles.1, &e, &x3));
    d.noun_cond(&scope, &x3, n3);
    if let Some(a) = adj {
        let s = d.referent(&scope, 's');
        d.cond(&scope, Condition::unary(a, &s).with_sense("a.01"));
        d.cond(&scope, Condition::binary("Topic", &s, &x3));
    }
    d.tok("Every", "every", "DT", "AND", "det");
    d.noun_tok(n1, "nsubj");
    if located {
        d.tok("in", "in", "IN", "REL", "case");
        d.det(true, false, "det");
        d.noun_tok(n2, "nmod");
    }
    d.tok(v.present, v.lemma, "VBZ", "NOW", "root");
    d.det(false, false, "det");
    if let Some(a) = adj {
        d.adj_tok(a);
    }
    d.noun_tok(n3, "obj");
    d.stop();
}

/// `No dog barked .`
fn negation(d: &mut Doc, rng: &mut ChaCha8Rng) {
    let n = pick(rng, NOUNS);
    let v = pick(rng, INTRANSITIVE);
    let top = d.new_box();
    let inner = d.new_box();
    d.op(&top, "NOT", &[&inner]);
    let e = d.referent(&inner, 'e');
    let x = d.referent(&inner, 'x');
    d.cond(&inner, Condition::unary(v.lemma, &e).with_sense("v.01"));
    d.cond(&inner, Condition::binary(v.roles.0, &e, &x));
    d.noun_cond(&inner, &x, n);
    d.tok("No", "no", "DT", "NOT", "det");
    d.noun_tok(n, "nsubj");
    d.tok(v.past, v.lemma, "VBD", "PST", "root");
    d.stop();
}

/// `Every farmer who owns a donkey beats it .`
fn donkey(d: &mut Doc, rng: &mut ChaCha8Rng) {
    let (n1, n2) = two_nouns(rng);
    let (v1, v2) = {
        let mut vs = TRANSITIVE.choose_multiple(rng, 2);
        (vs.next().unwrap(), vs.next().unwrap())
    };
    let top = d.new_box();
    let restrictor = d.new_box();
    let scope = d.new_box();
    d.op(&top, "IMP", &[&restrictor, &scope]);
    let x1 = d.referent(&restrictor, 'x');
    let x2 = d.referent(&restrictor, 'x');
    let e1 = d.referent(&restrictor, 'e');
    d.cond(&restrictor, Condition::unary(v1.lemma, &e1).with_sense("v.01"));
    d.cond(&restrictor, Condition::binary(v1.roles.0, &e1, &x1));
    d.cond(&restrictor, Condition::binary(v1.roles.1, &e1, &x2));
    d.noun_cond(&restrictor, &x1, n1);
    d.noun_cond(&restrictor, &x2, n2);
    let e2 = d.referent(&scope, 'e');
    d.cond(&scope, Condition::unary(v2.lemma, &e2).with_sense("v.01"));
    d.cond(&scope, Condition::binary(v2.roles.0, &e2, &x1));
    d.cond(&scope, Condition::binary(v2.roles.1, &e2, &x2));
    d.tok("Every", "every", "DT", "AND", "det");
    d.noun_tok(n1, "nsubj");
    d.tok("who", "who", "WP", "PRO", "nsubj");
    d.tok(v1.present, v1.lemma, "VBZ", "NOW", "relcl");
    d.det(false, false, "det");
    d.noun_tok(n2, "obj");
    d.tok(v2.present, v2.lemma, "VBZ", "NOW", "root");
    d.tok("it", "it", "PRP", "PRO", "obj");
    d.stop();
}

/// `A man smiled . He left .` joined by a discourse relation.
fn discourse(d: &mut Doc, rng: &mut ChaCha8Rng) {
    let n = pick(rng, NOUNS);
    let (v1, v2) = {
        let mut vs = INTRANSITIVE.choose_multiple(rng, 2);
        (vs.next().unwrap(), vs.next().unwrap())
    };
    let rel = *pick(rng, DISCOURSE);
    let top = d.new_box();
    let first = d.new_box();
    let second = d.new_box();
    d.op(&top, rel, &[&first, &second]);
    let e1 = d.referent(&first, 'e');
    let x = d.referent(&first, 'x');
    d.cond(&first, Condition::unary(v1.lemma, &e1).with_sense("v.01"));
    d.cond(&first, Condition::binary(v1.roles.0, &e1, &x));
    d.noun_cond(&first, &x, n);
    let e2 = d.referent(&second, 'e');
    d.cond(&second, Condition::unary(v2.lemma, &e2).with_sense("v.01"));
    d.cond(&second, Condition::binary(v2.roles.0, &e2, &x));
    d.det(false, true, "det");
    d.noun_tok(n, "nsubj");
    d.tok(v1.past, v1.lemma, "VBD", "PST", "root");
    d.stop();
    d.tok("It", "it", "PRP", "PRO", "nsubj");
    d.tok(v2.past, v2.lemma, "VBD", "PST", "root");
    d.stop();
}

/// `The wheel of a car fell .`
fn possessive(d: &mut Doc, rng: &mut ChaCha8Rng) {
    let (n1, n2) = two_nouns(rng);
    let v = pick(rng, INTRANSITIVE);
    let b = d.new_box();
    let e = d.referent(&b, 'e');
    let (x1, h1) = d.np(&b, true);
    let x2 = d.referent(&b, 'x');
    d.cond(&b, Condition::unary(v.lemma, &e).with_sense("v.01"));
    d.cond(&b, Condition::binary(v.roles.0, &e, &x1));
    d.noun_cond(&h1, &x1, n1);
    d.cond(&h1, Condition::binary("PartOf", &x1, &x2));
    d.noun_cond(&b, &x2, n2);
    d.det(true, true, "det");
    d.noun_tok(n1, "nsubj");
    d.tok("of", "of", "IN", "REL", "case");
    d.det(false, false, "det");
    d.noun_tok(n2, "nmod");
    d.tok(v.past, v.lemma, "VBD", "PST", "root");
    d.stop();
}

/// `A teacher gave the child a book .`
fn ditransitive(d: &mut Doc, rng: &mut ChaCha8Rng) {
    let mut ns = NOUNS.choose_multiple(rng, 3);
    let (n1, n2, n3) = (ns.next().unwrap(), ns.next().unwrap(), ns.next().unwrap());
    let def2 = rng.gen_bool(0.5);
    let b = d.new_box();
    let e = d.referent(&b, 'e');
    let x1 = d.referent(&b, 'x');
    let (x2, h2) = d.np(&b, def2);
    let x3 = d.referent(&b, 'x');
    d.cond(&b, Condition::unary("give", &e).with_sense("v.01"));
    d.cond(&b, Condition::binary("Agent", &e, &x1));
    d.cond(&b, Condition::binary("Recipient", &e, &x2));
    d.cond(&b, Condition::binary("Theme", &e, &x3));
    d.noun_cond(&b, &x1, n1);
    d.noun_cond(&h2, &x2, n2);
    d.noun_cond(&b, &x3, n3);
    d.det(false, true, "det");
    d.noun_tok(n1, "nsubj");
    d.tok("gave", "give", "VBD", "PST", "root");
    d.det(def2, false, "det");
    d.noun_tok(n2, "iobj");
    d.det(false, false, "det");
    d.noun_tok(n3, "obj");
    d.stop();
}

/// `A dog that chased a cat slept .` The relative clause event has no
/// parent and gets re-attached by edge reversal.
fn relative(d: &mut Doc, rng: &mut ChaCha8Rng) {
    let (n1, n2) = two_nouns(rng);
    let v1 = pick(rng, INTRANSITIVE);
    let v2 = pick(rng, TRANSITIVE);
    let b = d.new_box();
    let e1 = d.referent(&b, 'e');
    let x1 = d.referent(&b, 'x');
    let e2 = d.referent(&b, 'e');
    let x2 = d.referent(&b, 'x');
    d.cond(&b, Condition::unary(v1.lemma, &e1).with_sense("v.01"));
    d.cond(&b, Condition::binary(v1.roles.0, &e1, &x1));
    d.noun_cond(&b, &x1, n1);
    d.cond(&b, Condition::unary(v2.lemma, &e2).with_sense("v.01"));
    d.cond(&b, Condition::binary(v2.roles.0, &e2, &x1));
    d.cond(&b, Condition::binary(v2.roles.1, &e2, &x2));
    d.noun_cond(&b, &x2, n2);
    d.det(false, true, "det");
    d.noun_tok(n1, "nsubj");
    d.tok("that", "that", "WDT", "PRO", "nsubj");
    d.tok(v2.past, v2.lemma, "VBD", "PST", "relcl");
    d.det(false, false, "det");
    d.noun_tok(n2, "obj");
    d.tok(v1.past, v1.lemma, "VBD", "PST", "root");
    d.stop();
}

type Template = fn(&mut Doc, &mut ChaCha8Rng);

const TEMPLATES: &[Template] = &[transitive, intransitive, universal, negation, donkey, discourse, possessive, ditransitive, relative];

/// A tokenised sentence with its box structure.
#[derive(Debug, Clone, PartialEq)]
pub struct Document {
    pub tokens: Vec<Token>,
    pub boxes: BoxStructure,
}

impl Document {
    pub fn text(&self) -> String {
        self.tokens.iter().map(|t| t.word.as_str()).collect::<Vec<_>>().join(" ")
    }
}

/// `count` documents with distinct sentences, cycling through the sentence
/// templates in random order.
pub fn documents(seed: u64, count: usize) -> Vec<Document> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out: Vec<Document> = Vec::with_capacity(count);
    let mut order: Vec<usize> = Vec::new();
    let mut attempts = 0;
    while out.len() < count && attempts < count * 50 {
        attempts += 1;
        if order.is_empty() {
            order = (0..TEMPLATES.len()).collect();
            order.shuffle(&mut rng);
        }
        let t = order.pop().unwrap();
        let mut d = Doc::default();
        TEMPLATES[t](&mut d, &mut rng);
        let doc = Document { tokens: d.tokens, boxes: d.bs };
        if out.iter().all(|o| o.text() != doc.text()) {
            out.push(doc);
        }
    }
    out
}

/// Converts documents to sentences; documents that fail conversion are
/// skipped.
pub fn sentences(docs: &[Document]) -> Vec<Sentence> {
    docs.iter()
        .filter_map(|d| boxes_to_graph(&d.boxes).ok().map(|c| Sentence { tokens: d.tokens.clone(), graph: c.value }))
        .collect()
}

pub const CORPUS_SEED: u64 = 2019;
pub const TOY_SEED: u64 = 20;

/// Sizes of the bundled data.
pub const CORPUS_SIZE: usize = 240;
pub const TOY_SIZE: usize = 20;

/// A document whose second concept on one referent is lost by conversion.
pub fn lossy_document() -> BoxStructure {
    let mut d = Doc::default();
    let b = d.new_box();
    let e = d.referent(&b, 'e');
    let x = d.referent(&b, 'x');
    d.cond(&b, Condition::unary("sleep", &e).with_sense("v.01"));
    d.cond(&b, Condition::binary("Agent", &e, &x));
    d.cond(&b, Condition::unary("cat", &x).with_sense("n.01"));
    d.cond(&b, Condition::unary("pet", &x).with_sense("n.01"));
    d.bs
}

/// The bundled clause corpus: the worked example, generated documents and
/// one lossy document.
pub fn bundled_clauses() -> Vec<BoxStructure> {
    let mut out = vec![crate::drs::parse_clauses(crate::worked_example::CLAUSES).expect("worked example parses")];
    out.extend(documents(CORPUS_SEED, CORPUS_SIZE - 2).into_iter().map(|d| d.boxes));
    out.push(lossy_document());
    out
}

/// The bundled graph corpus: conversions of the lossless clause documents.
pub fn bundled_graphs() -> Vec<Graph> {
    let mut out = vec![crate::graph::parse_penman(crate::worked_example::PENMAN).expect("worked example parses")];
    out.extend(documents(CORPUS_SEED, CORPUS_SIZE - 2).iter().filter_map(|d| boxes_to_graph(&d.boxes).ok().map(|c| c.value)));
    out
}

/// The toy sentence corpus.
pub fn toy_sentences() -> Vec<Sentence> {
    sentences(&documents(TOY_SEED, TOY_SIZE))
}

/// File names and contents of the bundled data directory.
pub fn bundled_files() -> [(&'static str, String); 3] {
    [
        ("corpus.clauses", print_clause_corpus(&bundled_clauses())),
        ("corpus.penman", print_corpus(&bundled_graphs())),
        ("toy.corpus", print_sentences(&toy_sentences())),
    ]
}

/// Random well-formed DAGs over a small alphabet.
#[derive(Debug, Clone)]
pub struct RandomGraphs {
    pub lemmas: Vec<&'static str>,
    pub edge_labels: Vec<&'static str>,
    /// Chance that a node gets an extra incoming edge.
    pub reentrancy: f64,
    pub max_nodes: usize,
}

impl Default for RandomGraphs {
    fn default() -> Self {
        RandomGraphs {
            lemmas: vec!["a", "b", "c", "d", "e", "f"],
            edge_labels: vec!["A", "B", "Theme", "Agent", "PartOf"],
            reentrancy: 0.3,
            max_nodes: 8,
        }
    }
}

impl RandomGraphs {
    /// Nodes are created in topological order; each new node hangs under a
    /// random earlier node and may receive extra edges from earlier nodes.
    pub fn sample(&self, rng: &mut impl Rng) -> Graph {
        let n = rng.gen_range(1..=self.max_nodes.max(1));
        let mut b = GraphBuilder::new();
        let mut counters: BTreeMap<char, usize> = BTreeMap::new();
        let mut name = |sort: char| {
            let c = counters.entry(sort).or_insert(0);
            *c += 1;
            format!("{sort}{c}")
        };
        for i in 0..n {
            if i == 0 && rng.gen_bool(0.3) {
                b.node(name('b'), NodeLabel::boxed());
                continue;
            }
            let sort = *['x', 'e', 's'].choose(rng).unwrap();
            let mut label = NodeLabel::new(*self.lemmas.choose(rng).unwrap());
            if rng.gen_bool(0.3) {
                label = label.with_sense(["n.01", "v.01", "a.01", "r.01"][rng.gen_range(0..4)]);
            }
            label = label.presupposed(rng.gen_bool(0.1));
            b.node(name(sort), label);
        }
        for i in 1..n {
            let parent = rng.gen_range(0..i);
            b.edge(parent, *self.edge_labels.choose(rng).unwrap(), i);
            if i >= 2 && rng.gen_bool(self.reentrancy) {
                let other = rng.gen_range(0..i);
                b.edge(other, *self.edge_labels.choose(rng).unwrap(), i);
            }
        }
        b.build(0).expect("edges only join created nodes")
    }
}

/// Sort of a generated variable name.
pub fn sort_of(var: &str) -> Sort {
    Sort(var.chars().next().unwrap_or('x'))
}
