//! Exact leaf distributions.
//!
//! Configurations are bitmasks: bit `label - 1` is set when that leaf has
//! spin −1.

use alloc::vec;
use alloc::vec::Vec;

use crate::correlation::CorrelationVector;
use crate::error::{Error, Result};
use crate::tree::{MatchingPlan, TreeTopology, WeightedTree};

/// Largest leaf count for full-distribution enumeration.
pub const MAX_EXACT_LEAVES: usize = 14;
/// Largest leaf count for single-configuration evaluation.
pub const MAX_POINT_LEAVES: usize = 24;

/// Spins of leaves `1..=n`, each ±1.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LeafConfiguration {
    spins: Vec<i8>,
}

impl LeafConfiguration {
    pub fn new(spins: Vec<i8>) -> Result<Self> {
        if let Some(col) = spins.iter().position(|&s| s != 1 && s != -1) {
            return Err(Error::BadSpinValue { row: 0, col, value: spins[col] as i64 });
        }
        Ok(LeafConfiguration { spins })
    }

    pub fn from_mask(n: usize, mask: u64) -> Self {
        let spins = (0..n).map(|k| if mask >> k & 1 == 1 { -1 } else { 1 }).collect();
        LeafConfiguration { spins }
    }

    pub fn mask(&self) -> u64 {
        self.spins.iter().enumerate().filter(|(_, &s)| s < 0).fold(0, |m, (k, _)| m | 1 << k)
    }

    pub fn spins(&self) -> &[i8] {
        &self.spins
    }

    pub fn len(&self) -> usize {
        self.spins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spins.is_empty()
    }
}

/// A probability vector over all `2^n` configurations.
#[derive(Debug, Clone, PartialEq)]
pub struct LeafDistribution {
    n: usize,
    probs: Vec<f64>,
}

impl LeafDistribution {
    /// Leaf distribution of a model. Round-off negatives are clamped to zero.
    pub fn of_model(tree: &WeightedTree) -> Result<Self> {
        let probs = closed_form_distribution(tree.topology(), &tree.correlations())?;
        Ok(LeafDistribution {
            n: tree.leaf_count(),
            probs: probs.into_iter().map(|p| p.max(0.0)).collect(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, x: &LeafConfiguration) -> f64 {
        self.probs[x.mask() as usize]
    }

    pub fn total_variation(&self, other: &LeafDistribution) -> Result<f64> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: other.n });
        }
        Ok(half_l1(&self.probs, &other.probs))
    }
}

fn half_l1(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(x, y)| libm::fabs(x - y)).sum::<f64>()
}

fn check_dims(topology: &TreeTopology, alpha: &CorrelationVector, limit: usize) -> Result<usize> {
    let n = alpha.n();
    if topology.leaf_count() != n {
        return Err(Error::DimensionMismatch { expected: n, found: topology.leaf_count() });
    }
    if !topology.has_standard_leaves() {
        let bad = topology.leaves().iter().enumerate().find(|(k, &l)| l != k + 1).unwrap();
        return Err(Error::UnknownLeaf(*bad.1));
    }
    if n > limit {
        return Err(Error::TooLarge { n, max: limit });
    }
    Ok(n)
}

/// `α_S` for every subset mask; zero on odd subsets.
pub fn closed_form_coefficients(topology: &TreeTopology, alpha: &CorrelationVector) -> Result<Vec<f64>> {
    let n = check_dims(topology, alpha, MAX_EXACT_LEAVES)?;
    let plan = MatchingPlan::new(topology);
    let mut carry = Vec::new();
    Ok((0..1u64 << n)
        .map(|s| if s.count_ones() % 2 == 0 { plan.coefficient(alpha, s, &mut carry) } else { 0.0 })
        .collect())
}

/// In-place unnormalized Walsh–Hadamard transform:
/// `out[x] = Σ_s in[s]·(−1)^{|s ∧ x|}`.
fn walsh_hadamard(v: &mut [f64]) {
    let mut h = 1;
    while h < v.len() {
        for block in v.chunks_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a, *b);
                *a = x + y;
                *b = x - y;
            }
        }
        h *= 2;
    }
}

/// `f_x(α) = 2^{-n} Σ_{S even} α_S Π_{i∈S} x_i` for every configuration.
/// `alpha` need not come from weights on `topology`; the values are then
/// those of the multilinear extension and may be negative.
pub fn closed_form_distribution(topology: &TreeTopology, alpha: &CorrelationVector) -> Result<Vec<f64>> {
    let mut c = closed_form_coefficients(topology, alpha)?;
    walsh_hadamard(&mut c);
    let scale = 1.0 / (c.len() as f64);
    c.iter_mut().for_each(|p| *p *= scale);
    Ok(c)
}

/// `f_x(α)` at a single configuration.
pub fn closed_form_prob(topology: &TreeTopology, alpha: &CorrelationVector, x: &LeafConfiguration) -> Result<f64> {
    let n = check_dims(topology, alpha, MAX_POINT_LEAVES)?;
    if x.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: x.len() });
    }
    let plan = MatchingPlan::new(topology);
    let xm = x.mask();
    let mut carry = Vec::new();
    let mut total = 0.0;
    for s in 0..1u64 << n {
        if s.count_ones() % 2 == 0 {
            let c = plan.coefficient(alpha, s, &mut carry);
            total += if (s & xm).count_ones() % 2 == 0 { c } else { -c };
        }
    }
    Ok(total / (1u64 << n) as f64)
}

/// Leaf probability by summing out internal spins one node at a time.
pub fn marginalize_prob(tree: &WeightedTree, x: &LeafConfiguration) -> Result<f64> {
    let t = tree.topology();
    let n = t.leaf_count();
    if x.len() != n || !t.has_standard_leaves() {
        return Err(Error::DimensionMismatch { expected: n, found: x.len() });
    }
    let r = t.rooted();
    let theta = tree.theta();
    let spin = |l: usize| x.spins()[l - 1] as f64;
    // belief[v] = (product of child messages at +1, at −1)
    let mut belief = vec![(1.0f64, 1.0f64); t.id_bound()];
    for &v in r.order[1..].iter().rev() {
        let w = theta[r.parent_edge[v]];
        let edge = |s: f64, u: f64| 0.5 * (1.0 + w * s * u);
        let msg = if t.is_leaf(v) {
            let xv = spin(v);
            (edge(1.0, xv), edge(-1.0, xv))
        } else {
            let (bp, bm) = belief[v];
            (edge(1.0, 1.0) * bp + edge(1.0, -1.0) * bm, edge(-1.0, 1.0) * bp + edge(-1.0, -1.0) * bm)
        };
        let p = r.parent[v];
        belief[p].0 *= msg.0;
        belief[p].1 *= msg.1;
    }
    let root = r.root();
    let (bp, bm) = belief[root];
    Ok(0.5 * if spin(root) > 0.0 { bp } else { bm })
}

/// Leaf distribution by [`marginalize_prob`] at every configuration.
pub fn marginal_distribution(tree: &WeightedTree) -> Result<Vec<f64>> {
    let n = tree.leaf_count();
    if n > MAX_EXACT_LEAVES {
        return Err(Error::TooLarge { n, max: MAX_EXACT_LEAVES });
    }
    (0..1u64 << n).map(|m| marginalize_prob(tree, &LeafConfiguration::from_mask(n, m))).collect()
}

/// `½ Σ_x |f_x^{T_A}(α_A) − f_x^{T_B}(α_B)|` by full enumeration.
pub fn exact_tv(a: (&TreeTopology, &CorrelationVector), b: (&TreeTopology, &CorrelationVector)) -> Result<f64> {
    if a.1.n() != b.1.n() {
        return Err(Error::DimensionMismatch { expected: a.1.n(), found: b.1.n() });
    }
    let pa = closed_form_distribution(a.0, a.1)?;
    let pb = closed_form_distribution(b.0, b.1)?;
    Ok(half_l1(&pa, &pb))
}

/// Exact TV between two weighted models.
pub fn model_tv(a: &WeightedTree, b: &WeightedTree) -> Result<f64> {
    exact_tv((a.topology(), &a.correlations()), (b.topology(), &b.correlations()))
}

/// Copy of `alpha` with every pair zeroed whose path in `topology` shares an
/// edge with the subtree spanned by `removal`.
pub fn path_removed(alpha: &CorrelationVector, topology: &TreeTopology, removal: &[usize]) -> Result<CorrelationVector> {
    if let Some(&l) = topology.leaves().iter().find(|&&l| l > alpha.n()) {
        return Err(Error::UnknownLeaf(l));
    }
    for &l in removal {
        if !topology.is_leaf(l) {
            return Err(Error::UnknownLeaf(l));
        }
    }
    if removal.len() < 2 {
        return Err(Error::TooFewLeaves(removal.len()));
    }
    let mut cut = vec![false; topology.edges().len()];
    for &l in &removal[1..] {
        if l == removal[0] {
            return Err(Error::UnknownPair(l, l));
        }
        for e in topology.path_edge_indices(removal[0], l)? {
            cut[e] = true;
        }
    }
    let mut out = alpha.clone();
    for &i in topology.leaves() {
        let r = topology.rooted_at(i);
        let mut touched = vec![false; topology.id_bound()];
        for &v in &r.order[1..] {
            touched[v] = touched[r.parent[v]] || cut[r.parent_edge[v]];
            if v > i && topology.is_leaf(v) && touched[v] {
                out.set(i, v, 0.0);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests;
