pub mod corpus;
pub mod derive;
pub mod drs;
pub mod eval;
pub mod grammar;
pub mod graph;
pub mod scorer;
pub mod synth;
pub mod worked_example;
