//! Tolerances: similarity-induced relations on strings, clique partitions of
//! distribution sets, and the PDFA built from a stable clique partition.
//!
//! Every check over `Σ*` here is a bounded sweep; verdicts carry the bound.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::alphabet::Word;
use crate::automaton::{quotient, Pdfa, QuotientPdfa};
use crate::distribution::Distribution;
use crate::error::{Error, Result};
use crate::fixtures;
use crate::model::{is_triangular, LanguageModel, SyntheticModel};
use crate::relation::{vd, ClassSignature, Equivalence, SimilaritySpec};

/// Largest distribution list [`enumerate_clique_partitions`] accepts.
pub const MAX_CLIQUE_INPUT: usize = 12;

const TAG_CLIQUE: u8 = 7;
const MATCH_EPSILON: f64 = 1e-12;

/// Outcome of a bounded sweep: no violation up to the bound, or the first
/// violating word.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BoundedVerdict {
    Holds { bound: usize },
    Violated(Word),
}

impl BoundedVerdict {
    pub fn holds(&self) -> bool {
        matches!(self, BoundedVerdict::Holds { .. })
    }

    pub fn witness(&self) -> Option<&Word> {
        match self {
            BoundedVerdict::Holds { .. } => None,
            BoundedVerdict::Violated(w) => Some(w),
        }
    }

    /// `bounded(N)` for verdicts that hold.
    pub fn label(&self) -> String {
        match self {
            BoundedVerdict::Holds { bound } => format!("bounded({bound})"),
            BoundedVerdict::Violated(_) => "violated".into(),
        }
    }
}

/// `M1(u) ≈_S M2(u)` for every `u` up to `max_len`, first failure in
/// length-lex order.
pub fn string_tolerant(
    m1: &dyn LanguageModel,
    m2: &dyn LanguageModel,
    s: &SimilaritySpec,
    max_len: usize,
) -> Result<BoundedVerdict> {
    if m1.alphabet().as_ref() != m2.alphabet().as_ref() {
        return Err(Error::AlphabetMismatch);
    }
    for u in m1.alphabet().words_up_to(max_len) {
        if !s.similar(&m1.query(&u)?, &m2.query(&u)?)? {
            return Ok(BoundedVerdict::Violated(u));
        }
    }
    Ok(BoundedVerdict::Holds { bound: max_len })
}

/// `M(uw) ≈_S M(u'w)` for every continuation `w` up to `max_cont`; a
/// violation carries the separating `w`.
pub fn string_pair_tolerant(
    m: &dyn LanguageModel,
    u: &[usize],
    u2: &[usize],
    s: &SimilaritySpec,
    max_cont: usize,
) -> Result<BoundedVerdict> {
    if u == u2 {
        return Ok(BoundedVerdict::Holds { bound: max_cont });
    }
    for w in m.alphabet().words_up_to(max_cont) {
        let uw = [u, &w].concat();
        let u2w = [u2, &w].concat();
        if !s.similar(&m.query(&uw)?, &m.query(&u2w)?)? {
            return Ok(BoundedVerdict::Violated(w));
        }
    }
    Ok(BoundedVerdict::Holds { bound: max_cont })
}

/// A partition of a distribution list into blocks that are cliques of a
/// similarity.
#[derive(Clone, Debug, PartialEq)]
pub struct CliquePartition {
    distributions: Arc<[Distribution]>,
    blocks: Vec<Vec<usize>>,
    block_of: Vec<usize>,
    similarity: SimilaritySpec,
}

impl CliquePartition {
    /// Checks that `blocks` partition the indices and that each is a clique.
    /// Blocks are reordered by smallest member.
    pub fn new(
        distributions: Arc<[Distribution]>,
        mut blocks: Vec<Vec<usize>>,
        similarity: SimilaritySpec,
    ) -> Result<Self> {
        let n = distributions.len();
        let mut block_of = vec![usize::MAX; n];
        for b in blocks.iter_mut() {
            b.sort_unstable();
            if b.is_empty() {
                return Err(Error::Format("empty clique block".into()));
            }
        }
        blocks.sort();
        for (id, b) in blocks.iter().enumerate() {
            for &i in b {
                if i >= n || block_of[i] != usize::MAX {
                    return Err(Error::Format(format!("index {i} is out of range or repeated")));
                }
                block_of[i] = id;
            }
        }
        if block_of.contains(&usize::MAX) {
            return Err(Error::Format("blocks do not cover every distribution".into()));
        }
        let cp = CliquePartition {
            distributions,
            blocks,
            block_of,
            similarity,
        };
        if !cp.is_clique_partition()? {
            return Err(Error::Format("a block is not a clique".into()));
        }
        Ok(cp)
    }

    pub fn distributions(&self) -> &[Distribution] {
        &self.distributions
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn block_of(&self, i: usize) -> usize {
        self.block_of[i]
    }

    pub fn similarity(&self) -> &SimilaritySpec {
        &self.similarity
    }

    /// Index of `d` in the list, up to rounding noise.
    pub fn index_of(&self, d: &Distribution) -> Option<usize> {
        self.distributions
            .iter()
            .position(|x| x == d || vd(x, d).is_ok_and(|v| v <= MATCH_EPSILON))
    }

    pub fn block_of_distribution(&self, d: &Distribution) -> Option<usize> {
        self.index_of(d).map(|i| self.block_of[i])
    }

    /// Block index of each element, `[0, 0, 1]` style.
    pub fn assignment(&self) -> &[usize] {
        &self.block_of
    }

    /// Re-verifies all pairs within every block.
    pub fn is_clique_partition(&self) -> Result<bool> {
        for b in &self.blocks {
            for (x, &i) in b.iter().enumerate() {
                for &j in &b[x + 1..] {
                    if !self.similarity.similar(&self.distributions[i], &self.distributions[j])? {
                        return Ok(false);
                    }
                }
            }
        }
        Ok(true)
    }
}

impl fmt::Display for CliquePartition {
    /// `{0,1}{2}`
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.blocks {
            let items: Vec<String> = b.iter().map(usize::to_string).collect();
            write!(f, "{{{}}}", items.join(","))?;
        }
        Ok(())
    }
}

/// All clique partitions of `ds`, most blocks first, then by block
/// assignment.
pub fn enumerate_clique_partitions(ds: &[Distribution], s: &SimilaritySpec) -> Result<Vec<CliquePartition>> {
    let n = ds.len();
    if n > MAX_CLIQUE_INPUT {
        return Err(Error::BudgetExceeded(format!(
            "{n} distributions; clique enumeration is limited to {MAX_CLIQUE_INPUT}"
        )));
    }
    let mut sim = vec![vec![true; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let v = s.similar(&ds[i], &ds[j])?;
            sim[i][j] = v;
            sim[j][i] = v;
        }
    }

    fn assign(i: usize, sim: &[Vec<bool>], blocks: &mut Vec<Vec<usize>>, out: &mut Vec<Vec<Vec<usize>>>) {
        if i == sim.len() {
            out.push(blocks.clone());
            return;
        }
        for b in 0..blocks.len() {
            if blocks[b].iter().all(|&j| sim[i][j]) {
                blocks[b].push(i);
                assign(i + 1, sim, blocks, out);
                blocks[b].pop();
            }
        }
        blocks.push(vec![i]);
        assign(i + 1, sim, blocks, out);
        blocks.pop();
    }

    let mut raw = Vec::new();
    assign(0, &sim, &mut Vec::new(), &mut raw);

    let shared: Arc<[Distribution]> = ds.to_vec().into();
    let mut parts = raw
        .into_iter()
        .map(|blocks| CliquePartition::new(Arc::clone(&shared), blocks, *s))
        .collect::<Result<Vec<_>>>()?;
    parts.sort_by(|a, b| {
        b.num_blocks()
            .cmp(&a.num_blocks())
            .then_with(|| a.assignment().cmp(b.assignment()))
    });
    parts.dedup_by(|a, b| a.assignment() == b.assignment());
    Ok(parts)
}

/// The equivalence "same block of a clique partition".
///
/// Distributions outside the partition's list have no class.
#[derive(Clone, Debug)]
pub struct CliqueEquivalence {
    partition: Arc<CliquePartition>,
}

impl CliqueEquivalence {
    pub fn new(partition: CliquePartition) -> Self {
        CliqueEquivalence {
            partition: Arc::new(partition),
        }
    }

    pub fn partition(&self) -> &CliquePartition {
        &self.partition
    }
}

impl Equivalence for CliqueEquivalence {
    fn signature(&self, d: &Distribution) -> Result<ClassSignature> {
        let b = self.partition.block_of_distribution(d).ok_or(Error::NotCovered)?;
        let mut bytes = vec![TAG_CLIQUE];
        bytes.extend_from_slice(&(b as u32).to_le_bytes());
        Ok(ClassSignature::from_bytes(bytes))
    }

    fn label(&self) -> String {
        format!("clique({}):{}", self.partition.similarity, self.partition)
    }
}

fn check_covers(a: &Pdfa, cp: &CliquePartition) -> Result<()> {
    if a.dists().iter().all(|d| cp.index_of(d).is_some()) {
        Ok(())
    } else {
        Err(Error::NotCovered)
    }
}

/// Quotient of `a` under "same clique block".
pub fn quotient_by_cliques(a: &Pdfa, cp: &CliquePartition) -> Result<QuotientPdfa> {
    check_covers(a, cp)?;
    quotient(a, &CliqueEquivalence::new(cp.clone()))
}

/// A PDFA with a clique partition covering its state distributions.
#[derive(Clone, Debug)]
pub struct CliqueCongruenceSpec {
    pdfa: Pdfa,
    partition: CliquePartition,
}

impl CliqueCongruenceSpec {
    pub fn new(pdfa: Pdfa, partition: CliquePartition) -> Result<Self> {
        check_covers(&pdfa, &partition)?;
        Ok(CliqueCongruenceSpec { pdfa, partition })
    }

    pub fn pdfa(&self) -> &Pdfa {
        &self.pdfa
    }

    pub fn partition(&self) -> &CliquePartition {
        &self.partition
    }
}

/// Collapses the states of the source PDFA by the clique block of their
/// distribution.
///
/// The grouping must be stable: two states in the same block must move to
/// the same block on every symbol. Each new state outputs the lowest-index
/// distribution of its block.
pub fn build_clique_pdfa(cc: &CliqueCongruenceSpec) -> Result<Pdfa> {
    let a = &cc.pdfa;
    let cp = &cc.partition;
    let k = a.alphabet().len();
    let block: Vec<usize> = a
        .dists()
        .iter()
        .map(|d| cp.block_of_distribution(d).ok_or(Error::NotCovered))
        .collect::<Result<_>>()?;

    let access = a.access_words();
    let mut first: HashMap<usize, usize> = HashMap::new();
    for q in 0..a.num_states() {
        let p = *first.entry(block[q]).or_insert(q);
        for s in 0..k {
            if block[a.next(p, s)] != block[a.next(q, s)] {
                return Err(Error::Unstable {
                    u: a.alphabet().format_word(&access[p]),
                    v: a.alphabet().format_word(&access[q]),
                    symbol: a.alphabet().name(s).to_string(),
                });
            }
        }
    }

    // number the used blocks densely, in state order
    let mut state_of: HashMap<usize, usize> = HashMap::new();
    let mut reps: Vec<usize> = Vec::new();
    for (q, &b) in block.iter().enumerate() {
        state_of.entry(b).or_insert_with(|| {
            reps.push(q);
            reps.len() - 1
        });
    }
    let successors: Vec<Vec<usize>> = reps
        .iter()
        .map(|&q| (0..k).map(|s| state_of[&block[a.next(q, s)]]).collect())
        .collect();
    let dists: Vec<Distribution> = reps
        .iter()
        .map(|&q| {
            let d = &cp.distributions()[cp.blocks()[block[q]][0]];
            Distribution::new(a.alphabet(), d.probs().to_vec())
        })
        .collect::<Result<_>>()?;
    Pdfa::new_pruned(a.alphabet().clone(), state_of[&block[a.initial()]], dists, successors)
}

/// A pair of words shown not to be tolerant, with the separating
/// continuation.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Separation {
    pub u: usize,
    pub v: usize,
    pub continuation: String,
    pub distance: f64,
}

/// Bounded evidence that the triangular model is recognizable by a PDFA
/// under `vd:0.15` but not regular.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RecognizableReport {
    pub bound: usize,
    pub similarity: String,
    /// Tolerance between the triangular model and the one-state model.
    pub tolerant: bool,
    pub tolerance_verdict: String,
    /// Exponents `n` of the words `a^n` with `n` triangular and `n ≤ bound`.
    pub words: Vec<usize>,
    pub separations: Vec<Separation>,
    pub all_separated: bool,
    /// Minimum number of cliques in any clique congruence.
    pub clique_lower_bound: usize,
}

/// Runs both halves of the demonstration up to `bound`.
pub fn demo_recognizable_not_regular(bound: usize) -> Result<RecognizableReport> {
    let m1 = SyntheticModel::m1();
    let b = fixtures::fig2b();
    let s = SimilaritySpec::vd(0.15);
    let tolerance = string_tolerant(&m1, &b, &s, bound)?;

    let words: Vec<usize> = (1..=bound).filter(|&n| is_triangular(n)).collect();
    let max_cont = bound + 2;
    let alphabet = m1.alphabet().clone();
    let mut separations = Vec::new();
    let mut all_separated = true;
    for (i, &n) in words.iter().enumerate() {
        for &n2 in &words[i + 1..] {
            let (u, v) = (vec![0; n], vec![0; n2]);
            match string_pair_tolerant(&m1, &u, &v, &s, max_cont)? {
                BoundedVerdict::Violated(w) => {
                    let distance = vd(&m1.query(&[&u[..], &w].concat())?, &m1.query(&[&v[..], &w].concat())?)?;
                    separations.push(Separation {
                        u: n,
                        v: n2,
                        continuation: alphabet.format_word(&w),
                        distance,
                    });
                }
                BoundedVerdict::Holds { .. } => all_separated = false,
            }
        }
    }
    let clique_lower_bound = if all_separated { words.len() } else { 0 };
    Ok(RecognizableReport {
        bound,
        similarity: s.to_string(),
        tolerant: tolerance.holds(),
        tolerance_verdict: tolerance.label(),
        words,
        separations,
        all_separated,
        clique_lower_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automaton::{isomorphic, state_congruence};
    use crate::relation::EquivalenceSpec;

    fn vd15() -> SimilaritySpec {
        SimilaritySpec::vd(0.15)
    }

    #[test]
    fn string_tolerance_examples() {
        let m1 = SyntheticModel::m1();
        let m2 = SyntheticModel::m2();
        let v = string_tolerant(&m1, &m2, &vd15(), 25).unwrap();
        assert_eq!(v, BoundedVerdict::Holds { bound: 25 });
        assert_eq!(v.label(), "bounded(25)");
        let v = string_tolerant(&m1, &m2, &SimilaritySpec::vd(0.05), 1).unwrap();
        assert_eq!(v, BoundedVerdict::Violated(vec![]));
        assert!(string_tolerant(&m1, &m1, &SimilaritySpec::vd(0.0), 10).unwrap().holds());
    }

    #[test]
    fn string_pair_examples() {
        let m1 = SyntheticModel::m1();
        let v = string_pair_tolerant(&m1, &[0], &[0, 0, 0], &vd15(), 10).unwrap();
        assert_eq!(v, BoundedVerdict::Violated(vec![0, 0]));
        let m2 = SyntheticModel::m2();
        assert!(string_pair_tolerant(&m2, &[0], &[0, 0, 0], &vd15(), 10).unwrap().holds());
        assert!(string_pair_tolerant(&m1, &[0], &[0], &SimilaritySpec::vd(0.0), 10).unwrap().holds());
    }

    #[test]
    fn fig3_clique_partitions() {
        let ds = fixtures::fig3_dists();
        let parts = enumerate_clique_partitions(&ds, &vd15()).unwrap();
        let blocks: Vec<&[Vec<usize>]> = parts.iter().map(|p| p.blocks()).collect();
        assert_eq!(
            blocks,
            vec![
                &[vec![0], vec![1], vec![2]][..],
                &[vec![0, 1], vec![2]][..],
                &[vec![0], vec![1, 2]][..],
            ]
        );
        let a = fixtures::fig3a();
        let sizes: Vec<usize> = parts
            .iter()
            .map(|p| quotient_by_cliques(&a, p).unwrap().num_states())
            .collect();
        assert_eq!(sizes, vec![3, 3, 2]);
    }

    #[test]
    fn partition_counts() {
        let alphabet = Arc::new(crate::alphabet::Alphabet::new(["a"]).unwrap());
        let ds: Vec<Distribution> = (0..4)
            .map(|i| Distribution::new(&alphabet, vec![0.1 * i as f64, 1.0 - 0.1 * i as f64]).unwrap())
            .collect();
        // every pair similar: Bell(4)
        assert_eq!(enumerate_clique_partitions(&ds, &SimilaritySpec::vd(1.0)).unwrap().len(), 15);
        // no pair similar: singletons only
        let parts = enumerate_clique_partitions(&ds, &SimilaritySpec::vd(0.05)).unwrap();
        assert_eq!(parts.len(), 1);
        assert_eq!(parts[0].num_blocks(), 4);
        let many = vec![ds[0].clone(); MAX_CLIQUE_INPUT + 1];
        assert!(matches!(
            enumerate_clique_partitions(&many, &SimilaritySpec::vd(1.0)),
            Err(Error::BudgetExceeded(_))
        ));
    }

    #[test]
    fn partition_validation() {
        let ds: Arc<[Distribution]> = fixtures::fig3_dists().into();
        assert!(CliquePartition::new(Arc::clone(&ds), vec![vec![0, 2], vec![1]], vd15()).is_err());
        assert!(CliquePartition::new(Arc::clone(&ds), vec![vec![0, 1]], vd15()).is_err());
        assert!(CliquePartition::new(Arc::clone(&ds), vec![vec![0, 1], vec![1, 2]], vd15()).is_err());
        let cp = CliquePartition::new(ds, vec![vec![2], vec![1, 0]], vd15()).unwrap();
        assert_eq!(cp.blocks(), &[vec![0, 1], vec![2]]);
        assert_eq!(cp.to_string(), "{0,1}{2}");
    }

    #[test]
    fn clique_equivalence_rejects_unknown_distributions() {
        let ds = fixtures::fig3_dists();
        let cp = enumerate_clique_partitions(&ds, &vd15()).unwrap().remove(0);
        let e = CliqueEquivalence::new(cp);
        assert!(e.signature(&Distribution::uniform(ds[0].alphabet())).is_ok());
        let other = Distribution::new(ds[0].alphabet(), vec![0.7, 0.3]).unwrap();
        assert!(matches!(e.signature(&other), Err(Error::NotCovered)));
        assert_eq!(e.label(), "clique(vd:0.15):{0}{1}{2}");
    }

    #[test]
    fn singletons_match_exact_quotient() {
        let a = fixtures::fig3a();
        let parts = enumerate_clique_partitions(&fixtures::fig3_dists(), &vd15()).unwrap();
        let by_cliques = quotient_by_cliques(&a, &parts[0]).unwrap();
        let exact = state_congruence(&a, &EquivalenceSpec::Exact).unwrap();
        assert_eq!(by_cliques.num_states(), exact.num_blocks());
    }

    #[test]
    fn clique_pdfa_examples() {
        let a = fixtures::fig3a();
        let parts = enumerate_clique_partitions(&fixtures::fig3_dists(), &vd15()).unwrap();

        let c3 = build_clique_pdfa(&CliqueCongruenceSpec::new(a.clone(), parts[2].clone()).unwrap()).unwrap();
        assert_eq!(c3.num_states(), 2);
        assert!(string_tolerant(&c3, &a, &vd15(), 12).unwrap().holds());

        let c1 = build_clique_pdfa(&CliqueCongruenceSpec::new(a.clone(), parts[0].clone()).unwrap()).unwrap();
        let e = EquivalenceSpec::Exact;
        let iso = isomorphic(&quotient(&c1, &e).unwrap(), &quotient(&a, &e).unwrap()).unwrap();
        assert!(iso.is_some());
        assert_eq!(c1.dists(), a.dists());

        let err = build_clique_pdfa(&CliqueCongruenceSpec::new(a, parts[1].clone()).unwrap()).unwrap_err();
        match err {
            Error::Unstable { u, v, symbol } => assert_eq!((u.as_str(), v.as_str(), symbol.as_str()), ("", "a", "a")),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn unstable_four_state_witness() {
        // q1 and q2 share a block but move to q3 (other block) and q0 (same block)
        let text = r#"{"alphabet":["a"],"initial":0,
            "states":[{"id":0,"dist":{"a":0.5,"$":0.5}},{"id":1,"dist":{"a":0.5,"$":0.5}},
                      {"id":2,"dist":{"a":0.4,"$":0.6}},{"id":3,"dist":{"a":0.9,"$":0.1}}],
            "transitions":[{"from":0,"symbol":"a","to":1},{"from":1,"symbol":"a","to":2},
                           {"from":2,"symbol":"a","to":3},{"from":3,"symbol":"a","to":3}]}"#;
        let a = Pdfa::from_json(text).unwrap();
        let ds: Arc<[Distribution]> = vec![a.dist(0).clone(), a.dist(2).clone(), a.dist(3).clone()].into();
        let cp = CliquePartition::new(ds, vec![vec![0, 1], vec![2]], vd15()).unwrap();
        let err = build_clique_pdfa(&CliqueCongruenceSpec::new(a, cp).unwrap()).unwrap_err();
        assert!(matches!(err, Error::Unstable { .. }));
    }

    #[test]
    fn recognizable_demo() {
        let r = demo_recognizable_not_regular(21).unwrap();
        assert!(r.tolerant);
        assert_eq!(r.tolerance_verdict, "bounded(21)");
        assert_eq!(r.words, vec![1, 3, 6, 10, 15, 21]);
        assert_eq!(r.separations.len(), 15);
        assert!(r.separations.iter().all(|s| s.distance > 0.15));
        assert_eq!(r.clique_lower_bound, 6);

        let r = demo_recognizable_not_regular(3).unwrap();
        assert_eq!(r.words, vec![1, 3]);
        assert_eq!(r.separations[0].continuation, "aa");
        assert_eq!(r.clique_lower_bound, 2);
    }
}
