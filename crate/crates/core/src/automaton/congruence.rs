use std::collections::HashMap;
use std::hash::Hash;

use crate::error::Result;
use crate::relation::{ClassSignature, Equivalence};

use super::Pdfa;

/// Partition of a PDFA's states into congruence blocks. Blocks are numbered
/// by their lowest-index state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StatePartition {
    block_of: Vec<usize>,
    num_blocks: usize,
}

impl StatePartition {
    pub fn block_of(&self, q: usize) -> usize {
        self.block_of[q]
    }

    pub fn blocks(&self) -> &[usize] {
        &self.block_of
    }

    pub fn num_blocks(&self) -> usize {
        self.num_blocks
    }

    /// States of each block, in increasing order.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut members = vec![Vec::new(); self.num_blocks];
        for (q, &b) in self.block_of.iter().enumerate() {
            members[b].push(q);
        }
        members
    }
}

/// Renumbers keys by order of first occurrence.
fn number_by_first_occurrence<K: Hash + Eq>(keys: impl IntoIterator<Item = K>) -> (Vec<usize>, usize) {
    let mut ids: HashMap<K, usize> = HashMap::new();
    let blocks: Vec<usize> = keys
        .into_iter()
        .map(|k| {
            let next = ids.len();
            *ids.entry(k).or_insert(next)
        })
        .collect();
    (blocks, ids.len())
}

/// Moore partition refinement from a per-state output labeling: the coarsest
/// partition refining `labels` that is stable under the transitions.
pub(crate) fn refine<L: Hash + Eq + Clone>(a: &Pdfa, labels: &[L]) -> StatePartition {
    let k = a.alphabet().len();
    let (mut block_of, mut num_blocks) = number_by_first_occurrence(labels.iter().cloned());
    loop {
        let (next, count) = number_by_first_occurrence((0..a.num_states()).map(|q| {
            let mut key = Vec::with_capacity(k + 1);
            key.push(block_of[q]);
            key.extend((0..k).map(|s| block_of[a.next(q, s)]));
            key
        }));
        block_of = next;
        if count == num_blocks {
            break;
        }
        num_blocks = count;
    }
    StatePartition {
        block_of,
        num_blocks,
    }
}

/// Per-state class signatures of `a` under `e`.
pub fn state_signatures<E: Equivalence + ?Sized>(a: &Pdfa, e: &E) -> Result<Vec<ClassSignature>> {
    a.dists().iter().map(|d| e.signature(d)).collect()
}

/// The state congruence `q ≡ q' ⟺ ∀w. π*(q,w) =_E π*(q',w)`.
pub fn state_congruence<E: Equivalence + ?Sized>(a: &Pdfa, e: &E) -> Result<StatePartition> {
    Ok(refine(a, &state_signatures(a, e)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::relation::EquivalenceSpec;

    #[test]
    fn fixture_congruences() {
        let p = state_congruence(&fixtures::fig2a(), &EquivalenceSpec::Quant(3)).unwrap();
        assert_eq!(p.num_blocks(), 1);
        let p = state_congruence(&fixtures::fig3a(), &EquivalenceSpec::Quant(7)).unwrap();
        assert_eq!(p.num_blocks(), 3);
    }

    #[test]
    fn refinement_splits_on_successors() {
        // q0 and q2 of fig2a share a distribution but their successors differ
        let p = state_congruence(&fixtures::fig2a(), &EquivalenceSpec::Exact).unwrap();
        assert_eq!(p.num_blocks(), 3);
        assert_eq!(p.members(), vec![vec![0], vec![1], vec![2]]);
        // top:1 also agrees on q0/q2 at λ and splits them after one `a`
        let p = state_congruence(&fixtures::fig2a(), &EquivalenceSpec::Top(1)).unwrap();
        assert_eq!(p.blocks(), &[0, 1, 2]);
    }
}
