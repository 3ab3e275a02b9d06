//! Two-level morphology: pair regular expressions and their automata, a
//! rule compiler, continuation-class lexicons, a bidirectional engine, and
//! a bundled Turkish description.

pub mod engine;
pub mod lexicon;
pub mod pair_regex;
pub mod rule_system;
pub mod symbols;
pub mod turkish;
