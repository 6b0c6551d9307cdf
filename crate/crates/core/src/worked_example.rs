//! The running example used throughout the documentation and tests:
//! "Every ship in the dock needs a big anchor."

/// Box structure in clause format.
pub const CLAUSES: &str = "\
b2 REF x1
b2 COND ship x1
b2 COND PartOf x1 x2
b3 REF e1 s1 x3
b3 COND need e1
b3 COND Pivot e1 x1
b3 COND Theme e1 x3
b3 COND anchor x3
b3 COND big s1
b3 COND Topic s1 x3
b4 REF x2
b4 COND dock x2
b1 OP IMP b2 b3
b4 PRESUP b2
";

/// The same meaning as a graph.
pub const PENMAN: &str = "(b1/□
    :Imp1 (b2/□
        :Drs (x1/ship
            :PartOf (x2/dock^p)))
    :Imp2 (b3/□
        :Drs (e1/need
            :Pivot x1
            :Theme (x3/anchor
                :TopicOf (s1/big)))))";

/// The sentence as corpus token lines: word, lemma, part of speech,
/// semantic tag and dependency label.
pub const TOKENS: &str = "\
Every every DT AND det
ship ship NN CON nsubj
in in IN REL case
the the DT DEF det
dock dock NN CON nmod
needs need VBZ NOW root
a a DT DIS det
big big JJ IST amod
anchor anchor NN CON obj
. . . NIL punct
";

/// Tokens and graph as one corpus sentence.
pub fn sentence() -> crate::corpus::Sentence {
    crate::corpus::parse_sentences(&format!("{TOKENS}{PENMAN}\n")).expect("the worked example parses").remove(0)
}
