use std::fmt;
use std::sync::Arc;

use crate::alphabet::Alphabet;
use crate::distribution::Distribution;
use crate::error::Result;

use super::LanguageModel;

type LengthPredicate = Arc<dyn Fn(usize) -> bool + Send + Sync>;

/// Which synthetic unary model to build.
#[derive(Clone)]
pub enum SyntheticKind {
    /// `{a:0.4, $:0.6}` on `a^n` with `n ∈ N1`, `{a:0.6, $:0.4}` otherwise.
    Alternating(LengthPredicate),
    /// `{a:0.5, $:0.5}` everywhere.
    Uniform,
}

impl fmt::Debug for SyntheticKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SyntheticKind::Alternating(_) => f.write_str("Alternating"),
            SyntheticKind::Uniform => f.write_str("Uniform"),
        }
    }
}

/// `n` is a triangular number `k(k+1)/2` with `k ≥ 1`.
pub fn is_triangular(n: usize) -> bool {
    if n == 0 {
        return false;
    }
    let disc = 8 * n as u64 + 1;
    let mut root = (disc as f64).sqrt() as u64;
    while root * root > disc {
        root -= 1;
    }
    while (root + 1) * (root + 1) <= disc {
        root += 1;
    }
    root * root == disc
}

/// Unary models over `Σ = {a}`.
#[derive(Clone, Debug)]
pub struct SyntheticModel {
    alphabet: Arc<Alphabet>,
    kind: SyntheticKind,
    in_n1: Distribution,
    in_n2: Distribution,
    uniform: Distribution,
}

impl SyntheticModel {
    pub fn new(kind: SyntheticKind) -> Self {
        let alphabet = Arc::new(Alphabet::new(["a"]).expect("valid alphabet"));
        let dist = |p: f64, q: f64| Distribution::new(&alphabet, vec![p, q]).expect("valid");
        SyntheticModel {
            in_n1: dist(0.4, 0.6),
            in_n2: dist(0.6, 0.4),
            uniform: dist(0.5, 0.5),
            alphabet,
            kind,
        }
    }

    /// `M1` with `N1` the triangular numbers `{1, 3, 6, 10, ...}`.
    pub fn m1() -> Self {
        Self::m1_with(is_triangular)
    }

    pub fn m1_with(in_n1: impl Fn(usize) -> bool + Send + Sync + 'static) -> Self {
        Self::new(SyntheticKind::Alternating(Arc::new(in_n1)))
    }

    pub fn m2() -> Self {
        Self::new(SyntheticKind::Uniform)
    }

    pub fn kind(&self) -> &SyntheticKind {
        &self.kind
    }
}

impl LanguageModel for SyntheticModel {
    fn alphabet(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    fn query(&self, word: &[usize]) -> Result<Distribution> {
        self.alphabet.check_word(word)?;
        Ok(match &self.kind {
            SyntheticKind::Alternating(in_n1) if in_n1(word.len()) => self.in_n1.clone(),
            SyntheticKind::Alternating(_) => self.in_n2.clone(),
            SyntheticKind::Uniform => self.uniform.clone(),
        })
    }
}
