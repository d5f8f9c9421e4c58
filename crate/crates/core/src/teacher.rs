//! Equivalence-query oracles.
//!
//! An oracle answers `EQ(H)` with either [`Verdict::Equivalent`] or a word
//! `v` such that `⟦M(v)⟧ ≠ π̄*(v)`. Only [`ExactOracle`] is complete; the
//! sampling and exhaustive oracles are bounded approximations for black-box
//! models, and their `Equivalent` answers are not proofs.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use log::debug;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution as _, Geometric};

use crate::alphabet::Word;
use crate::automaton::{product_search, state_signatures, Pdfa, QuotientPdfa, Verdict};
use crate::error::{Error, Result};
use crate::model::LanguageModel;
use crate::relation::Equivalence;

/// Length of the exhaustive sweep every sampling check starts with.
pub const SAMPLING_SWEEP_LEN: usize = 3;

/// Default cap on the number of words an exhaustive check may visit.
pub const DEFAULT_WORD_BUDGET: u64 = 1_000_000;

pub trait EqOracle {
    fn check(&self, h: &QuotientPdfa) -> Result<Verdict>;

    /// Short name recorded in learner reports.
    fn describe(&self) -> String;
}

impl<O: EqOracle + ?Sized> EqOracle for &O {
    fn check(&self, h: &QuotientPdfa) -> Result<Verdict> {
        (**self).check(h)
    }

    fn describe(&self) -> String {
        (**self).describe()
    }
}

impl<O: EqOracle + ?Sized> EqOracle for Box<O> {
    fn check(&self, h: &QuotientPdfa) -> Result<Verdict> {
        (**self).check(h)
    }

    fn describe(&self) -> String {
        (**self).describe()
    }
}

fn check_alphabet(model: &dyn LanguageModel, h: &QuotientPdfa) -> Result<()> {
    if model.alphabet().as_ref() != h.alphabet().as_ref() {
        return Err(Error::AlphabetMismatch);
    }
    Ok(())
}

/// `⟦M(v)⟧ ≠ π̄*(v)`, by one membership query.
pub fn is_counterexample(
    model: &dyn LanguageModel,
    e: &dyn Equivalence,
    h: &QuotientPdfa,
    v: &[usize],
) -> Result<bool> {
    Ok(&e.signature(&model.query(v)?)? != h.output_class(v)?)
}

fn verified(model: &dyn LanguageModel, e: &dyn Equivalence, h: &QuotientPdfa, v: Word) -> Result<Verdict> {
    debug_assert!(is_counterexample(model, e, h, &v)?);
    if !is_counterexample(model, e, h, &v)? {
        return Err(Error::InvalidAutomaton(
            "oracle produced a word that is not a counterexample".into(),
        ));
    }
    Ok(Verdict::Counterexample(v))
}

/// Complete oracle for PDFA-backed targets, by synchronized breadth-first
/// search over `(target state, hypothesis state)` pairs.
pub struct ExactOracle {
    target: Pdfa,
    equivalence: Arc<dyn Equivalence>,
}

impl ExactOracle {
    pub fn new(target: Pdfa, equivalence: Arc<dyn Equivalence>) -> Self {
        ExactOracle {
            target,
            equivalence,
        }
    }
}

pub fn exact_oracle(target: Pdfa, e: impl Equivalence + 'static) -> ExactOracle {
    ExactOracle::new(target, Arc::new(e))
}

impl EqOracle for ExactOracle {
    fn check(&self, h: &QuotientPdfa) -> Result<Verdict> {
        check_alphabet(&self.target, h)?;
        let sigs = state_signatures(&self.target, self.equivalence.as_ref())?;
        let verdict = product_search(
            h.alphabet().len(),
            (self.target.initial(), h.initial()),
            |(p, q), s| (self.target.next(p, s), h.next(q, s)),
            |(p, q)| &sigs[p] != h.class(q),
        )?;
        match verdict {
            Verdict::Counterexample(v) => verified(&self.target, self.equivalence.as_ref(), h, v),
            Verdict::Equivalent => Ok(Verdict::Equivalent),
        }
    }

    fn describe(&self) -> String {
        "exact".into()
    }
}

/// Random-testing parameters for [`SamplingOracle`].
#[derive(Clone, Debug, PartialEq)]
pub struct SamplingConfig {
    pub samples: usize,
    pub max_length: usize,
    pub seed: u64,
    /// Stop probability of the geometric length distribution.
    pub stop_probability: f64,
}

impl SamplingConfig {
    /// Geometric lengths with mean `max_length / 2`.
    pub fn new(samples: usize, max_length: usize, seed: u64) -> Self {
        SamplingConfig {
            samples,
            max_length,
            seed,
            stop_probability: 2.0 / (max_length as f64 + 2.0),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::spec("sample", "at least one sample is required"));
        }
        if !(self.stop_probability > 0.0 && self.stop_probability < 1.0) {
            return Err(Error::spec("sample", "stop probability must be in (0, 1)"));
        }
        Ok(())
    }
}

/// Tests all words up to length [`SAMPLING_SWEEP_LEN`] plus random words and
/// their prefixes; returns the length-lex least failing word.
pub struct SamplingOracle {
    model: Arc<dyn LanguageModel>,
    equivalence: Arc<dyn Equivalence>,
    config: SamplingConfig,
}

impl SamplingOracle {
    pub fn new(
        model: Arc<dyn LanguageModel>,
        equivalence: Arc<dyn Equivalence>,
        config: SamplingConfig,
    ) -> Result<Self> {
        config.validate()?;
        Ok(SamplingOracle {
            model,
            equivalence,
            config,
        })
    }

    /// The words a check visits, length-lex ordered.
    pub fn test_words(&self) -> Result<Vec<Word>> {
        let alphabet = self.model.alphabet();
        let mut words: BTreeSet<(usize, Word)> = alphabet
            .words_up_to(SAMPLING_SWEEP_LEN)
            .map(|w| (w.len(), w))
            .collect();
        let k = alphabet.len();
        if k > 0 {
            let mut rng = ChaCha8Rng::seed_from_u64(self.config.seed);
            let lengths = Geometric::new(self.config.stop_probability)
                .map_err(|e| Error::spec("sample", e.to_string()))?;
            for _ in 0..self.config.samples {
                let len = loop {
                    let l = lengths.sample(&mut rng);
                    if l <= self.config.max_length as u64 {
                        break l as usize;
                    }
                };
                let word: Word = (0..len).map(|_| rng.gen_range(0..k)).collect();
                for end in 0..=word.len() {
                    words.insert((end, word[..end].to_vec()));
                }
            }
        }
        Ok(words.into_iter().map(|(_, w)| w).collect())
    }
}

impl EqOracle for SamplingOracle {
    fn check(&self, h: &QuotientPdfa) -> Result<Verdict> {
        check_alphabet(self.model.as_ref(), h)?;
        let words = self.test_words()?;
        debug!("sampling oracle testing {} words", words.len());
        for w in words {
            if is_counterexample(self.model.as_ref(), self.equivalence.as_ref(), h, &w)? {
                return verified(self.model.as_ref(), self.equivalence.as_ref(), h, w);
            }
        }
        Ok(Verdict::Equivalent)
    }

    fn describe(&self) -> String {
        format!(
            "sample:{}:{}:{}",
            self.config.samples, self.config.max_length, self.config.seed
        )
    }
}

pub fn sampling_oracle(
    m: Arc<dyn LanguageModel>,
    e: Arc<dyn Equivalence>,
    config: SamplingConfig,
) -> Result<SamplingOracle> {
    SamplingOracle::new(m, e, config)
}

/// Tests every word up to a fixed length in length-lex order.
pub struct ExhaustiveOracle {
    model: Arc<dyn LanguageModel>,
    equivalence: Arc<dyn Equivalence>,
    max_len: usize,
    word_budget: u64,
}

impl ExhaustiveOracle {
    pub fn new(model: Arc<dyn LanguageModel>, equivalence: Arc<dyn Equivalence>, max_len: usize) -> Self {
        ExhaustiveOracle {
            model,
            equivalence,
            max_len,
            word_budget: DEFAULT_WORD_BUDGET,
        }
    }

    pub fn with_budget(mut self, words: u64) -> Self {
        self.word_budget = words;
        self
    }
}

impl EqOracle for ExhaustiveOracle {
    fn check(&self, h: &QuotientPdfa) -> Result<Verdict> {
        check_alphabet(self.model.as_ref(), h)?;
        let count = self.model.alphabet().count_words_up_to(self.max_len);
        if count > self.word_budget {
            return Err(Error::BudgetExceeded(format!(
                "{count} words up to length {} exceed the budget of {}",
                self.max_len, self.word_budget
            )));
        }
        for w in self.model.alphabet().words_up_to(self.max_len) {
            if is_counterexample(self.model.as_ref(), self.equivalence.as_ref(), h, &w)? {
                return verified(self.model.as_ref(), self.equivalence.as_ref(), h, w);
            }
        }
        Ok(Verdict::Equivalent)
    }

    fn describe(&self) -> String {
        format!("exhaustive:{}", self.max_len)
    }
}

pub fn bounded_exhaustive_oracle(
    m: Arc<dyn LanguageModel>,
    e: Arc<dyn Equivalence>,
    max_len: usize,
) -> ExhaustiveOracle {
    ExhaustiveOracle::new(m, e, max_len)
}

/// Parsed `--eq` argument: `exact | sample:<n>:<maxlen>:<seed> | exhaustive:<maxlen>`.
#[derive(Clone, Debug, PartialEq)]
pub enum EqSpec {
    Exact,
    Sample(SamplingConfig),
    Exhaustive(usize),
}

impl FromStr for EqSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        let num = |t: &str| -> Result<u64> {
            t.parse()
                .map_err(|_| Error::spec(s, format!("cannot parse `{t}`")))
        };
        let spec = match parts.as_slice() {
            ["exact"] => EqSpec::Exact,
            ["sample", n, len, seed] => {
                let config = SamplingConfig::new(num(n)? as usize, num(len)? as usize, num(seed)?);
                config.validate()?;
                EqSpec::Sample(config)
            }
            ["exhaustive", len] => EqSpec::Exhaustive(num(len)? as usize),
            _ => {
                return Err(Error::spec(
                    s,
                    "expected exact, sample:<n>:<maxlen>:<seed> or exhaustive:<maxlen>",
                ))
            }
        };
        Ok(spec)
    }
}

impl fmt::Display for EqSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EqSpec::Exact => write!(f, "exact"),
            EqSpec::Sample(c) => write!(f, "sample:{}:{}:{}", c.samples, c.max_length, c.seed),
            EqSpec::Exhaustive(n) => write!(f, "exhaustive:{n}"),
        }
    }
}
