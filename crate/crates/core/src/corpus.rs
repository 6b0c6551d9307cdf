//! Sentence corpora: annotated tokens paired with a gold graph.
//!
//! One sentence per blank-line separated block. Token lines come first,
//! `word lemma pos semtag dep` separated by whitespace; trailing fields may
//! be omitted, and a missing lemma defaults to the lowercased word. The
//! graph follows, starting at the first line that begins with `(`.
//!
//! ```text
//! A a DT DIS det
//! cat cat NN CON nsubj
//! slept sleep VBD PST root
//! (b1/□
//!     :Drs (e1/sleep~v.01
//!         :Agent (x1/cat~n.01)))
//! ```

use std::fmt::Write as _;

use crate::graph::{blocks, parse_penman, print_penman, Graph, PenmanError};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Token {
    pub word: String,
    pub lemma: String,
    pub pos: String,
    pub semtag: String,
    pub dep: String,
}

pub const MISSING: &str = "_";

impl Token {
    pub fn new(word: &str, lemma: &str, pos: &str, semtag: &str, dep: &str) -> Self {
        Token { word: word.into(), lemma: lemma.into(), pos: pos.into(), semtag: semtag.into(), dep: dep.into() }
    }

    /// Parses a token line; returns `None` on an empty line.
    pub fn parse(line: &str) -> Option<Token> {
        let mut fields = line.split_whitespace();
        let word = fields.next()?.to_string();
        let mut next = || fields.next().map(str::to_string);
        let lemma = next().unwrap_or_else(|| word.to_lowercase());
        Some(Token {
            lemma,
            pos: next().unwrap_or_else(|| MISSING.into()),
            semtag: next().unwrap_or_else(|| MISSING.into()),
            dep: next().unwrap_or_else(|| MISSING.into()),
            word,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sentence {
    pub tokens: Vec<Token>,
    pub graph: Graph,
}

impl Sentence {
    pub fn text(&self) -> String {
        self.tokens.iter().map(|t| t.word.as_str()).collect::<Vec<_>>().join(" ")
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum CorpusError {
    #[error("sentence {index} (line {line}): no tokens")]
    NoTokens { index: usize, line: usize },
    #[error("sentence {index} (line {line}): no graph")]
    NoGraph { index: usize, line: usize },
    #[error("sentence {index} (line {line}): {source}")]
    Graph {
        index: usize,
        line: usize,
        #[source]
        source: PenmanError,
    },
}

pub fn parse_sentences(text: &str) -> Result<Vec<Sentence>, CorpusError> {
    blocks(text)
        .into_iter()
        .enumerate()
        .map(|(index, (line, block))| {
            let lines: Vec<&str> = block.lines().collect();
            let split = lines.iter().position(|l| l.trim_start().starts_with('(')).ok_or(CorpusError::NoGraph { index, line })?;
            if split == 0 {
                return Err(CorpusError::NoTokens { index, line });
            }
            let tokens = lines[..split].iter().filter_map(|l| Token::parse(l)).collect();
            let graph = parse_penman(&lines[split..].join("\n")).map_err(|source| CorpusError::Graph { index, line, source })?;
            Ok(Sentence { tokens, graph })
        })
        .collect()
}

/// Token lines of every block. Graph lines, if present, are ignored.
pub fn parse_token_blocks(text: &str) -> Vec<Vec<Token>> {
    blocks(text)
        .into_iter()
        .map(|(_, block)| block.lines().take_while(|l| !l.trim_start().starts_with('(')).filter_map(Token::parse).collect::<Vec<_>>())
        .filter(|t| !t.is_empty())
        .collect()
}

pub fn print_sentences<'a>(sentences: impl IntoIterator<Item = &'a Sentence>) -> String {
    let mut out = String::new();
    for s in sentences {
        for t in &s.tokens {
            let _ = writeln!(out, "{} {} {} {} {}", t.word, t.lemma, t.pos, t.semtag, t.dep);
        }
        out.push_str(&print_penman(&s.graph));
        out.push_str("\n\n");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const ONE: &str = "A a DT DIS det\ncat\nslept sleep VBD PST root\n(b1/□\n    :Drs (e1/sleep\n        :Agent (x1/cat)))\n";

    #[test]
    fn parses_and_prints() {
        let s = parse_sentences(ONE).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].tokens[1], Token::new("cat", "cat", "_", "_", "_"));
        assert_eq!(s[0].text(), "A cat slept");
        let again = parse_sentences(&print_sentences(&s)).unwrap();
        assert_eq!(again, s);
        assert_eq!(parse_token_blocks(ONE), [s[0].tokens.clone()]);
        assert_eq!(parse_token_blocks("a\nb\n\nc\n").len(), 2);
    }

    #[test]
    fn errors() {
        assert!(matches!(parse_sentences("a a\nb b\n"), Err(CorpusError::NoGraph { .. })));
        assert!(matches!(parse_sentences("(x1/a)\n"), Err(CorpusError::NoTokens { .. })));
        assert!(matches!(parse_sentences("a\n(x1/a\n"), Err(CorpusError::Graph { .. })));
    }
}
