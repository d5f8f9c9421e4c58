use std::collections::VecDeque;
use std::sync::Arc;

use crate::alphabet::{Alphabet, Word};
use crate::distribution::Distribution;
use crate::error::{Error, Result};

/// Probabilistic deterministic finite automaton: every state emits a
/// next-symbol distribution and has one successor per symbol.
#[derive(Clone, Debug, PartialEq)]
pub struct Pdfa {
    alphabet: Arc<Alphabet>,
    initial: usize,
    dists: Vec<Distribution>,
    // trans[q * |Σ| + σ]
    trans: Vec<usize>,
}

/// Breadth-first traversal from `initial`, expanding symbols in alphabet
/// order. Returns the visit order and the shortest access word of every
/// reached state (length-lex minimal).
pub(crate) fn bfs_access(
    num_states: usize,
    num_symbols: usize,
    initial: usize,
    next: impl Fn(usize, usize) -> usize,
) -> (Vec<usize>, Vec<Option<Word>>) {
    let mut access: Vec<Option<Word>> = vec![None; num_states];
    let mut order = Vec::with_capacity(num_states);
    let mut queue = VecDeque::new();
    access[initial] = Some(Vec::new());
    queue.push_back(initial);
    while let Some(q) = queue.pop_front() {
        order.push(q);
        for sym in 0..num_symbols {
            let t = next(q, sym);
            if access[t].is_none() {
                let mut w = access[q].clone().expect("visited");
                w.push(sym);
                access[t] = Some(w);
                queue.push_back(t);
            }
        }
    }
    (order, access)
}

impl Pdfa {
    /// Builds a PDFA from per-state distributions and successor rows.
    /// Every state must be reachable from `initial`.
    pub fn new(
        alphabet: Arc<Alphabet>,
        initial: usize,
        dists: Vec<Distribution>,
        successors: Vec<Vec<usize>>,
    ) -> Result<Self> {
        let a = Self::unchecked(alphabet, initial, dists, successors)?;
        let (order, _) = a.bfs();
        if order.len() != a.num_states() {
            let unreachable = a.unreachable_states();
            return Err(Error::InvalidAutomaton(format!(
                "unreachable states {unreachable:?}"
            )));
        }
        Ok(a)
    }

    /// Like [`Pdfa::new`] but drops unreachable states, renumbering the rest
    /// in their original relative order.
    pub fn new_pruned(
        alphabet: Arc<Alphabet>,
        initial: usize,
        dists: Vec<Distribution>,
        successors: Vec<Vec<usize>>,
    ) -> Result<Self> {
        let a = Self::unchecked(alphabet, initial, dists, successors)?;
        let (_, access) = a.bfs();
        let mut renumber = vec![usize::MAX; a.num_states()];
        let mut kept = 0;
        for q in 0..a.num_states() {
            if access[q].is_some() {
                renumber[q] = kept;
                kept += 1;
            }
        }
        let k = a.alphabet.len();
        let mut dists = Vec::with_capacity(kept);
        let mut rows = Vec::with_capacity(kept);
        for q in (0..a.num_states()).filter(|&q| access[q].is_some()) {
            dists.push(a.dists[q].clone());
            rows.push((0..k).map(|s| renumber[a.next(q, s)]).collect());
        }
        Self::unchecked(a.alphabet, renumber[a.initial], dists, rows)
    }

    fn unchecked(
        alphabet: Arc<Alphabet>,
        initial: usize,
        dists: Vec<Distribution>,
        successors: Vec<Vec<usize>>,
    ) -> Result<Self> {
        let n = dists.len();
        if n == 0 {
            return Err(Error::InvalidAutomaton("no states".into()));
        }
        if initial >= n {
            return Err(Error::InvalidAutomaton(format!("initial state {initial} out of range")));
        }
        if successors.len() != n {
            return Err(Error::InvalidAutomaton("tau not total".into()));
        }
        for d in &dists {
            if d.alphabet().as_ref() != alphabet.as_ref() {
                return Err(Error::AlphabetMismatch);
            }
        }
        let k = alphabet.len();
        let mut trans = Vec::with_capacity(n * k);
        for (q, row) in successors.into_iter().enumerate() {
            if row.len() != k {
                return Err(Error::InvalidAutomaton("tau not total".into()));
            }
            for t in row {
                if t >= n {
                    return Err(Error::InvalidAutomaton(format!(
                        "transition from {q} to missing state {t}"
                    )));
                }
                trans.push(t);
            }
        }
        Ok(Pdfa {
            alphabet,
            initial,
            dists,
            trans,
        })
    }

    pub fn alphabet(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    pub fn num_states(&self) -> usize {
        self.dists.len()
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn dist(&self, q: usize) -> &Distribution {
        &self.dists[q]
    }

    pub fn dists(&self) -> &[Distribution] {
        &self.dists
    }

    pub fn next(&self, q: usize, symbol: usize) -> usize {
        self.trans[q * self.alphabet.len() + symbol]
    }

    /// `τ*(q, word)`.
    pub fn run_from(&self, q: usize, word: &[usize]) -> Result<usize> {
        self.alphabet.check_word(word)?;
        Ok(word.iter().fold(q, |q, &s| self.next(q, s)))
    }

    /// `(τ*(q_in, word), π*(word))`.
    pub fn run(&self, word: &[usize]) -> Result<(usize, &Distribution)> {
        let q = self.run_from(self.initial, word)?;
        Ok((q, &self.dists[q]))
    }

    fn bfs(&self) -> (Vec<usize>, Vec<Option<Word>>) {
        bfs_access(self.num_states(), self.alphabet.len(), self.initial, |q, s| {
            self.next(q, s)
        })
    }

    /// Shortest (length-lex least) access word of every state.
    pub fn access_words(&self) -> Vec<Word> {
        self.bfs()
            .1
            .into_iter()
            .map(|w| w.expect("all states reachable"))
            .collect()
    }

    fn unreachable_states(&self) -> Vec<usize> {
        let (_, access) = self.bfs();
        (0..self.num_states()).filter(|&q| access[q].is_none()).collect()
    }

    /// Successor rows, `successors()[q][σ] = τ(q, σ)`.
    pub fn successors(&self) -> Vec<Vec<usize>> {
        let k = self.alphabet.len();
        (0..self.num_states())
            .map(|q| (0..k).map(|s| self.next(q, s)).collect())
            .collect()
    }
}

/// Free-function form of [`Pdfa::run`].
pub fn run<'a>(a: &'a Pdfa, word: &[usize]) -> Result<(usize, &'a Distribution)> {
    a.run(word)
}
