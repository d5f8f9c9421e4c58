#![allow(dead_code)]

use std::sync::Arc;

use pdfa_forge::relation::quant_bucket;
use pdfa_forge::{Alphabet, Distribution, Equivalence, Pdfa, Word};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn alphabet(k: usize) -> Arc<Alphabet> {
    Arc::new(Alphabet::new(["a", "b", "c", "d"].into_iter().take(k)).unwrap())
}

/// Probabilities that are multiples of `1/grain`.
pub fn grid_distribution(rng: &mut impl Rng, alphabet: &Arc<Alphabet>, grain: u32) -> Distribution {
    let n = alphabet.extended_len();
    let mut cuts: Vec<u32> = (0..n - 1).map(|_| rng.gen_range(0..=grain)).collect();
    cuts.push(0);
    cuts.push(grain);
    cuts.sort_unstable();
    let probs = cuts.windows(2).map(|w| (w[1] - w[0]) as f64 / grain as f64).collect();
    Distribution::new(alphabet, probs).unwrap()
}

/// Continuous random distribution, no zero entries.
pub fn random_distribution(rng: &mut impl Rng, alphabet: &Arc<Alphabet>) -> Distribution {
    let raw: Vec<f64> = (0..alphabet.extended_len()).map(|_| rng.gen_range(0.01..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let mut probs: Vec<f64> = raw.iter().map(|x| x / total).collect();
    let head: f64 = probs[..probs.len() - 1].iter().sum();
    *probs.last_mut().unwrap() = 1.0 - head;
    Distribution::new(alphabet, probs).unwrap()
}

/// Random PDFA with exactly `n` states before pruning unreachable ones.
pub fn random_pdfa_over(rng: &mut impl Rng, alphabet: &Arc<Alphabet>, n: usize, grain: u32) -> Pdfa {
    let k = alphabet.len();
    let dists = (0..n).map(|_| grid_distribution(rng, alphabet, grain)).collect();
    let successors = (0..n).map(|_| (0..k).map(|_| rng.gen_range(0..n)).collect()).collect();
    Pdfa::new_pruned(alphabet.clone(), 0, dists, successors).unwrap()
}

/// Random PDFA with at most `max_states` states over 1 to `max_symbols` symbols.
pub fn random_pdfa(rng: &mut impl Rng, max_states: usize, max_symbols: usize) -> Pdfa {
    let k = rng.gen_range(1..=max_symbols);
    let n = rng.gen_range(1..=max_states);
    random_pdfa_over(rng, &alphabet(k), n, 20)
}

/// Random PDFA whose state distributions are drawn from a small pool, so
/// that quotients actually merge states.
pub fn random_pdfa_pooled(rng: &mut impl Rng, alphabet: &Arc<Alphabet>, n: usize, pool: usize) -> Pdfa {
    let k = alphabet.len();
    let palette: Vec<Distribution> = (0..pool).map(|_| grid_distribution(rng, alphabet, 20)).collect();
    let dists = (0..n).map(|_| palette[rng.gen_range(0..pool)].clone()).collect();
    let successors = (0..n).map(|_| (0..k).map(|_| rng.gen_range(0..n)).collect()).collect();
    Pdfa::new_pruned(alphabet.clone(), 0, dists, successors).unwrap()
}

pub fn random_word(rng: &mut impl Rng, k: usize, max_len: usize) -> Word {
    let len = rng.gen_range(0..=max_len);
    (0..len).map(|_| rng.gen_range(0..k)).collect()
}

/// `π(τ*(q0, u))` evaluated recursively from the JSON-level structure.
pub fn naive_query(a: &Pdfa, word: &[usize]) -> Distribution {
    fn state(a: &Pdfa, word: &[usize]) -> usize {
        match word.split_last() {
            None => a.initial(),
            Some((&last, rest)) => a.next(state(a, rest), last),
        }
    }
    a.dist(state(a, word)).clone()
}

/// Number of classes of reachable states under "no string separates them",
/// by pairwise table filling.
pub fn table_filling_classes<E: Equivalence>(a: &Pdfa, e: &E) -> usize {
    let n = a.num_states();
    let k = a.alphabet().len();
    let sig: Vec<_> = a.dists().iter().map(|d| e.signature(d).unwrap()).collect();
    let mut apart = vec![vec![false; n]; n];
    for p in 0..n {
        for q in 0..n {
            apart[p][q] = sig[p] != sig[q];
        }
    }
    loop {
        let mut changed = false;
        for p in 0..n {
            for q in 0..n {
                if !apart[p][q] && (0..k).any(|s| apart[a.next(p, s)][a.next(q, s)]) {
                    apart[p][q] = true;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    let mut reps: Vec<usize> = Vec::new();
    for q in 0..n {
        if reps.iter().all(|&r| apart[r][q]) {
            reps.push(q);
        }
    }
    reps.len()
}

/// Whether states `p` and `q` agree on every string up to `max_len`.
pub fn brute_force_congruent<E: Equivalence>(a: &Pdfa, e: &E, p: usize, q: usize, max_len: usize) -> bool {
    fn go<E: Equivalence>(a: &Pdfa, e: &E, p: usize, q: usize, left: usize) -> bool {
        if e.signature(a.dist(p)).unwrap() != e.signature(a.dist(q)).unwrap() {
            return false;
        }
        left == 0 || (0..a.alphabet().len()).all(|s| go(a, e, a.next(p, s), a.next(q, s), left - 1))
    }
    go(a, e, p, q, max_len)
}

/// Straight-line evaluation of the ndcg dissimilarity, positions up to
/// `min(r, |Σ_$|)`.
pub fn ndcg_oracle(d1: &Distribution, d2: &Distribution, r: usize) -> f64 {
    let n = d1.len();
    let order = |d: &Distribution| {
        let mut idx: Vec<usize> = (0..n).collect();
        idx.sort_by(|&x, &y| d.prob(y).partial_cmp(&d.prob(x)).unwrap().then(x.cmp(&y)));
        idx
    };
    let clipped_rank = |d: &Distribution, sym: usize| {
        let pos = order(d).iter().position(|&s| s == sym).unwrap() + 1;
        pos.min(r + 1) as f64
    };
    let m = r.min(n);
    let r = r as f64;
    let mut ideal = 0.0;
    for k in 1..=m {
        ideal += (r - k as f64 + 1.0) / ((k + 1) as f64).log2();
    }
    let normalized = |base: &Distribution, other: &Distribution| {
        let ord = order(other);
        let mut dcg = 0.0;
        for k in 1..=m {
            dcg += (r - clipped_rank(base, ord[k - 1]) + 1.0) / ((k + 1) as f64).log2();
        }
        dcg / ideal
    };
    1.0 - (normalized(d1, d2) + normalized(d2, d1)) / 2.0
}

/// Bell numbers by the triangle recurrence.
pub fn bell(n: usize) -> usize {
    let mut row = vec![1usize];
    for _ in 0..n {
        let mut next = vec![*row.last().unwrap()];
        for &x in &row {
            next.push(next.last().unwrap() + x);
        }
        row = next;
    }
    row[0]
}

/// [`random_pdfa_pooled`] with random sizes.
pub fn pooled(rng: &mut impl Rng, max_symbols: usize, max_states: usize, pool: usize) -> Pdfa {
    let k = rng.gen_range(1..=max_symbols);
    let n = rng.gen_range(1..=max_states);
    random_pdfa_pooled(rng, &alphabet(k), n, pool)
}

/// A distribution with the same quantization buckets as `d`, obtained by
/// moving mass between symbols without leaving any bucket.
pub fn perturb_within_buckets(rng: &mut impl Rng, d: &Distribution, kappa: u32) -> Distribution {
    let k = kappa as f64;
    let margin = 1e-9;
    let mut p = d.probs().to_vec();
    let bounds: Vec<(f64, f64)> = p
        .iter()
        .map(|&x| {
            let b = quant_bucket(x, kappa) as f64;
            let hi = if b + 1.0 >= k { 1.0 } else { (b + 1.0) / k - margin };
            (b / k, hi)
        })
        .collect();
    for _ in 0..8 {
        let i = rng.gen_range(0..p.len());
        let j = rng.gen_range(0..p.len());
        if i == j {
            continue;
        }
        let room = (bounds[i].1 - p[i]).min(p[j] - bounds[j].0).max(0.0);
        let t = rng.gen_range(0.0..=1.0) * room;
        p[i] += t;
        p[j] -= t;
    }
    Distribution::new(d.alphabet(), p).unwrap()
}

/// Either an unrelated distribution or one with the same ordering as `d`.
pub fn partner(rng: &mut impl Rng, d: &Distribution) -> Distribution {
    match rng.gen_range(0..3) {
        0 => random_distribution(rng, d.alphabet()),
        1 => grid_distribution(rng, d.alphabet(), 4),
        _ => {
            // same ranking: redistribute sorted random mass along d's order
            let order = d.ranking();
            let mut mass: Vec<f64> = (0..d.len()).map(|_| rng.gen_range(0.01..1.0)).collect();
            mass.sort_by(|a, b| b.partial_cmp(a).unwrap());
            mass.dedup();
            while mass.len() < d.len() {
                mass.push(mass.last().unwrap() / 2.0);
            }
            let total: f64 = mass.iter().sum();
            let mut probs = vec![0.0; d.len()];
            for (pos, &sym) in order.iter().enumerate() {
                probs[sym] = mass[pos] / total;
            }
            Distribution::new(d.alphabet(), probs).unwrap()
        }
    }
}

/// Checks the observation-table lemmas at every learner step.
///
/// * a red prefix runs to the state of its row class;
/// * the hypothesis reproduces every red cell class;
/// * the number of red classes grows at every close, consistent and
///   hypothesis step, never shrinks, and stays below `bound`;
/// * equal rows stay equal when columns are dropped from the end.
pub struct LemmaChecker {
    bound: Option<usize>,
    last: usize,
    last_hypothesis: usize,
    pub violations: Vec<String>,
    pub hypotheses_checked: usize,
    pub steps: usize,
}

impl LemmaChecker {
    pub fn new(bound: Option<usize>) -> Self {
        LemmaChecker {
            bound,
            last: 0,
            last_hypothesis: 0,
            violations: Vec::new(),
            hypotheses_checked: 0,
            steps: 0,
        }
    }

    pub fn observe(&mut self, ot: &pdfa_forge::learner::ObservationTable<'_>, step: &pdfa_forge::learner::Step<'_>) {
        use pdfa_forge::learner::Step;
        self.steps += 1;
        let classes = ot.num_classes();
        let kind = step.kind();
        if classes < self.last {
            self.violations.push(format!("{kind:?}: classes shrank {} -> {classes}", self.last));
        }
        match step {
            Step::Close(_) | Step::Consistent(_) if classes <= self.last => {
                self.violations.push(format!("{kind:?}: classes did not grow ({classes})"));
            }
            _ => {}
        }
        if let Some(b) = self.bound {
            if classes > b {
                self.violations.push(format!("{kind:?}: {classes} classes exceed {b}"));
            }
        }
        self.last = classes;

        let cols = ot.suffixes().len();
        let rows: Vec<&Word> = ot.red().iter().chain(ot.blue()).collect();
        for (i, p) in rows.iter().enumerate() {
            for q in &rows[i + 1..] {
                let (rp, rq) = (ot.row(p), ot.row(q));
                if rp == rq {
                    for n in 0..cols {
                        if rp.prefix(n) != rq.prefix(n) {
                            self.violations.push("row equality not preserved by projection".into());
                        }
                    }
                }
            }
        }

        if let Step::Hypothesis(h) = step {
            self.hypotheses_checked += 1;
            if self.hypotheses_checked > 1 && classes <= self.last_hypothesis {
                self.violations.push(format!("hypothesis: classes did not grow ({classes})"));
            }
            self.last_hypothesis = classes;
            if h.num_states() != classes {
                self.violations.push(format!("{} states for {classes} classes", h.num_states()));
            }
            for p in ot.red() {
                for q in ot.red() {
                    let same_row = ot.row(p) == ot.row(q);
                    let same_state = h.run(p).unwrap() == h.run(q).unwrap();
                    if same_row != same_state {
                        self.violations.push(format!("red prefixes {p:?} and {q:?} run to the wrong states"));
                    }
                }
                for s in ot.suffixes() {
                    let ps: Word = p.iter().chain(s).copied().collect();
                    if h.output_class(&ps).unwrap() != ot.cell_class(p, s).unwrap() {
                        self.violations.push(format!("output class differs from cell ({p:?}, {s:?})"));
                    }
                }
            }
        }
    }
}
