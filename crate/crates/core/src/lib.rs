//! Learning quotient automata of language models under distribution
//! equivalences, plus tools for tolerance (similarity) relations.

pub mod alphabet;
pub mod automaton;
pub mod cli;
pub mod distribution;
pub mod error;
pub mod fixtures;
pub mod learner;
pub mod model;
pub mod relation;
pub mod teacher;
pub mod tolerance;

pub use alphabet::{Alphabet, Word, TERMINAL};
pub use automaton::{Pdfa, QuotientPdfa, Verdict};
pub use distribution::Distribution;
pub use error::{Error, Result};
pub use model::LanguageModel;
pub use relation::{ClassSignature, Equivalence, EquivalenceSpec, SimilaritySpec};
