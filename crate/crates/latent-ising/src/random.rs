//! Seeded random trees. All randomness in the crate comes from ChaCha8
//! streams keyed by a 64-bit seed.

use alloc::vec::Vec;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

use crate::error::{Error, Result};
use crate::tree::{TreeTopology, WeightedTree};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Binary topology on leaves `1..=n`, built by attaching each new leaf to
/// a uniformly chosen edge. This is uniform over labelled binary trees.
pub fn random_topology<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<TreeTopology> {
    if n == 0 {
        return Err(Error::TooFewLeaves(0));
    }
    if n == 1 {
        return TreeTopology::single_leaf(1);
    }
    let mut edges: Vec<(usize, usize)> = alloc::vec![(1, 2)];
    let mut next_internal = n + 1;
    for leaf in 3..=n {
        let k = rng.gen_range(0..edges.len());
        let (a, b) = edges[k];
        let t = next_internal;
        next_internal += 1;
        edges[k] = (a, t);
        edges.push((t, b));
        edges.push((t, leaf));
    }
    TreeTopology::from_edges(&(1..=n).collect::<Vec<_>>(), &edges)
}

/// Weights drawn uniformly from `[lo, hi]` for each edge of `topology`.
pub fn random_weights<R: Rng + ?Sized>(
    topology: TreeTopology,
    lo: f64,
    hi: f64,
    rng: &mut R,
) -> Result<WeightedTree> {
    if !(lo <= hi) || lo < -1.0 || hi > 1.0 {
        return Err(Error::BadParameter(alloc::format!("weight range [{lo}, {hi}]")));
    }
    let theta = topology.edges().iter().map(|_| lo + (hi - lo) * rng.gen::<f64>()).collect();
    WeightedTree::new(topology, theta)
}

/// Random binary topology with uniform weights in `[lo, hi]`.
pub fn random_tree<R: Rng + ?Sized>(n: usize, lo: f64, hi: f64, rng: &mut R) -> Result<WeightedTree> {
    let t = random_topology(n, rng)?;
    random_weights(t, lo, hi, rng)
}
