use alloc::vec;
use alloc::vec::Vec;

use super::TreeTopology;
use crate::correlation::CorrelationVector;
use crate::error::{Error, Result};

/// Precomputed traversal for pairing leaf subsets of one topology.
///
/// The tree is rooted at its smallest leaf. Walking up from the leaves, each
/// subtree hands at most one unmatched leaf to its parent, and a node that
/// collects two unmatched leaves pairs them. On a binary tree this yields the
/// unique pairing whose connecting paths share no edge.
#[derive(Debug, Clone)]
pub struct MatchingPlan {
    /// Nodes children-first, as (node, leaf label or 0, parent slot).
    post: Vec<(usize, usize, usize)>,
    slots: usize,
}

const NO_PARENT: usize = usize::MAX;

impl MatchingPlan {
    pub fn new(tree: &TreeTopology) -> Self {
        let r = tree.rooted();
        let mut slot = vec![0usize; tree.id_bound()];
        for (k, &v) in r.order.iter().enumerate() {
            slot[v] = k;
        }
        let post = r
            .order
            .iter()
            .rev()
            .map(|&v| {
                let label = if tree.is_leaf(v) { v } else { 0 };
                let p = r.parent[v];
                (slot[v], label, if p == usize::MAX { NO_PARENT } else { slot[p] })
            })
            .collect();
        MatchingPlan { post, slots: r.order.len() }
    }

    /// Calls `visit(a, b)` for every matched pair of the subset selected by
    /// `member`. Returns the leaf left unmatched at the root, if any.
    pub fn for_each_pair(
        &self,
        member: impl Fn(usize) -> bool,
        mut visit: impl FnMut(usize, usize),
        carry: &mut Vec<usize>,
    ) -> Option<usize> {
        carry.clear();
        carry.resize(self.slots, 0);
        let mut left = None;
        for &(s, label, p) in &self.post {
            let mut cur = carry[s];
            if label != 0 && member(label) {
                if cur != 0 {
                    visit(cur.min(label), cur.max(label));
                    cur = 0;
                } else {
                    cur = label;
                }
            }
            if p == NO_PARENT {
                left = if cur == 0 { None } else { Some(cur) };
            } else if cur != 0 {
                if carry[p] != 0 {
                    let other = carry[p];
                    visit(other.min(cur), other.max(cur));
                    carry[p] = 0;
                } else {
                    carry[p] = cur;
                }
            }
        }
        left
    }

    /// `α_S`: product of `alpha` over the matching of the leaves whose bit
    /// `label - 1` is set in `mask`.
    pub fn coefficient(&self, alpha: &CorrelationVector, mask: u64, carry: &mut Vec<usize>) -> f64 {
        let mut prod = 1.0;
        self.for_each_pair(
            |l| mask >> (l - 1) & 1 == 1,
            |a, b| prod *= alpha.get(a, b),
            carry,
        );
        prod
    }
}

/// The pairing of an even leaf subset whose connecting paths are pairwise
/// edge-disjoint, as sorted pairs in sorted order.
pub fn closest_relative_matching(tree: &TreeTopology, subset: &[usize]) -> Result<Vec<(usize, usize)>> {
    for &l in subset {
        if !tree.is_leaf(l) {
            return Err(Error::UnknownLeaf(l));
        }
    }
    let mut sorted = subset.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != subset.len() {
        return Err(Error::BadParameter("repeated leaf in subset".into()));
    }
    if sorted.len() % 2 == 1 {
        return Err(Error::OddSubset(sorted.len()));
    }
    let plan = MatchingPlan::new(tree);
    let mut pairs = Vec::new();
    let mut carry = Vec::new();
    plan.for_each_pair(|l| sorted.binary_search(&l).is_ok(), |a, b| pairs.push((a, b)), &mut carry);
    pairs.sort_unstable();
    Ok(pairs)
}
