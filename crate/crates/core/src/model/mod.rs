//! Language models: total functions from words to next-symbol distributions.
//!
//! These are the membership-query targets of the learner.

mod cache;
mod remote;
mod synthetic;

use std::sync::Arc;

pub use cache::{cached, CachedModel};
pub use remote::{remote_model, RemoteConfig, RemoteModel, TIMEOUT_ENV};
pub use synthetic::{is_triangular, SyntheticKind, SyntheticModel};

use crate::alphabet::Alphabet;
use crate::automaton::Pdfa;
use crate::distribution::Distribution;
use crate::error::{Error, Result};

pub trait LanguageModel: Send + Sync {
    fn alphabet(&self) -> &Arc<Alphabet>;

    /// The membership query `MQ(word)`.
    fn query(&self, word: &[usize]) -> Result<Distribution>;
}

impl<M: LanguageModel + ?Sized> LanguageModel for &M {
    fn alphabet(&self) -> &Arc<Alphabet> {
        (**self).alphabet()
    }

    fn query(&self, word: &[usize]) -> Result<Distribution> {
        (**self).query(word)
    }
}

impl<M: LanguageModel + ?Sized> LanguageModel for Box<M> {
    fn alphabet(&self) -> &Arc<Alphabet> {
        (**self).alphabet()
    }

    fn query(&self, word: &[usize]) -> Result<Distribution> {
        (**self).query(word)
    }
}

impl<M: LanguageModel + ?Sized> LanguageModel for Arc<M> {
    fn alphabet(&self) -> &Arc<Alphabet> {
        (**self).alphabet()
    }

    fn query(&self, word: &[usize]) -> Result<Distribution> {
        (**self).query(word)
    }
}

/// `M_A(u) = π*(u)`.
impl LanguageModel for Pdfa {
    fn alphabet(&self) -> &Arc<Alphabet> {
        Pdfa::alphabet(self)
    }

    fn query(&self, word: &[usize]) -> Result<Distribution> {
        self.run(word).map(|(_, d)| d.clone())
    }
}

/// The language model of a PDFA.
pub fn pdfa_model(a: Pdfa) -> Pdfa {
    a
}

/// Rejects queries longer than a fixed bound instead of forwarding them.
pub struct LengthLimited<M> {
    inner: M,
    max_len: usize,
}

impl<M: LanguageModel> LengthLimited<M> {
    pub fn new(inner: M, max_len: usize) -> Self {
        LengthLimited { inner, max_len }
    }
}

impl<M: LanguageModel> LanguageModel for LengthLimited<M> {
    fn alphabet(&self) -> &Arc<Alphabet> {
        self.inner.alphabet()
    }

    fn query(&self, word: &[usize]) -> Result<Distribution> {
        if word.len() > self.max_len {
            return Err(Error::QueryTooLong {
                len: word.len(),
                max: self.max_len,
            });
        }
        self.inner.query(word)
    }
}
