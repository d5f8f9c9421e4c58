//! Next-symbol distributions over the terminal-extended alphabet and the
//! rankings derived from them.

use std::fmt;
use std::sync::Arc;

use crate::alphabet::Alphabet;
use crate::error::{Error, Result};

/// Tolerance on the sum of a distribution's entries.
pub const SUM_TOLERANCE: f64 = 1e-9;

/// Probabilities at or below this value are outside the support.
pub const SUPPORT_EPSILON: f64 = 1e-9;

/// Probability distribution over `Σ ∪ {$}`, stored in alphabet order with
/// the terminal last.
#[derive(Clone)]
pub struct Distribution {
    alphabet: Arc<Alphabet>,
    probs: Arc<[f64]>,
}

impl Distribution {
    pub fn new(alphabet: &Arc<Alphabet>, probs: Vec<f64>) -> Result<Self> {
        if probs.len() != alphabet.extended_len() {
            return Err(Error::InvalidDistribution(format!(
                "expected {} entries, got {}",
                alphabet.extended_len(),
                probs.len()
            )));
        }
        for (i, &p) in probs.iter().enumerate() {
            if !p.is_finite() || !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidDistribution(format!(
                    "probability of `{}` is {p}",
                    alphabet.name(i)
                )));
            }
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::InvalidDistribution(format!(
                "probabilities sum to {sum}"
            )));
        }
        Ok(Distribution {
            alphabet: Arc::clone(alphabet),
            probs: probs.into(),
        })
    }

    /// Builds a distribution from `(symbol, probability)` pairs in any order.
    /// Every symbol of the extended alphabet must appear exactly once.
    pub fn from_pairs<'a, I>(alphabet: &Arc<Alphabet>, pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (&'a str, f64)>,
    {
        let mut probs = vec![f64::NAN; alphabet.extended_len()];
        for (name, p) in pairs {
            let i = alphabet
                .extended_index(name)
                .ok_or_else(|| Error::InvalidDistribution(format!("unknown symbol `{name}`")))?;
            if !probs[i].is_nan() {
                return Err(Error::InvalidDistribution(format!(
                    "duplicate entry for `{name}`"
                )));
            }
            probs[i] = p;
        }
        if let Some(i) = probs.iter().position(|p| p.is_nan()) {
            return Err(Error::InvalidDistribution(format!(
                "missing entry for `{}`",
                alphabet.name(i)
            )));
        }
        Distribution::new(alphabet, probs)
    }

    pub fn uniform(alphabet: &Arc<Alphabet>) -> Self {
        let n = alphabet.extended_len();
        Distribution {
            alphabet: Arc::clone(alphabet),
            probs: vec![1.0 / n as f64; n].into(),
        }
    }

    pub fn alphabet(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, symbol: usize) -> f64 {
        self.probs[symbol]
    }

    pub fn terminal_prob(&self) -> f64 {
        self.probs[self.alphabet.terminal()]
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn same_alphabet(&self, other: &Distribution) -> bool {
        Arc::ptr_eq(&self.alphabet, &other.alphabet) || self.alphabet == other.alphabet
    }

    pub(crate) fn check_same_alphabet(&self, other: &Distribution) -> Result<()> {
        if self.same_alphabet(other) {
            Ok(())
        } else {
            Err(Error::AlphabetMismatch)
        }
    }

    /// Symbol indices sorted by decreasing probability, ties by alphabet order.
    pub fn ranking(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.probs.len()).collect();
        order.sort_by(|&i, &j| self.probs[j].total_cmp(&self.probs[i]).then(i.cmp(&j)));
        order
    }

    /// `rank[σ]`, 1-based and injective.
    pub fn rank(&self) -> Vec<usize> {
        let mut rank = vec![0; self.probs.len()];
        for (pos, sym) in self.ranking().into_iter().enumerate() {
            rank[sym] = pos + 1;
        }
        rank
    }

    /// Rank clipped to `r + 1`.
    pub fn rank_r(&self, r: usize) -> Vec<usize> {
        self.rank().into_iter().map(|k| k.min(r + 1)).collect()
    }

    /// Symbols ranked at most `r`, in increasing index order.
    pub fn top_r(&self, r: usize) -> Vec<usize> {
        let mut top: Vec<usize> = self.ranking().into_iter().take(r).collect();
        top.sort_unstable();
        top
    }

    /// Symbols with probability above [`SUPPORT_EPSILON`].
    pub fn support(&self) -> Vec<usize> {
        (0..self.probs.len())
            .filter(|&i| self.probs[i] > SUPPORT_EPSILON)
            .collect()
    }
}

impl PartialEq for Distribution {
    fn eq(&self, other: &Self) -> bool {
        self.same_alphabet(other) && self.probs == other.probs
    }
}

impl fmt::Debug for Distribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut map = f.debug_map();
        for (i, p) in self.probs.iter().enumerate() {
            map.entry(&self.alphabet.name(i), p);
        }
        map.finish()
    }
}

impl fmt::Display for Distribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, p) in self.probs.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}: {}", self.alphabet.name(i), p)?;
        }
        write!(f, "}}")
    }
}
