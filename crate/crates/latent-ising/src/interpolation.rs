//! Step-by-step interpolation between two topologies on the same leaves.
//!
//! Clusters of leaves whose subtree already agrees with the target are
//! paired up round by round. Whenever a target cherry is not yet a cherry of
//! the current tree, the weaker of the two clusters is walked along the path
//! to the other one edge at a time (an epoch of moves). Each move changes
//! exactly the quartets `{w, z, y, u}` with `w` in the moving cluster, `z`
//! hanging behind the old position, `y` at the node being crossed and `u`
//! ahead of it.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use crate::correlation::CorrelationVector;
use crate::error::{Error, Result};
use crate::tree::{cut_paste, TreeTopology, WeightedTree};

/// `i` and `j` share a neighbour.
pub fn is_cherry(topology: &TreeTopology, i: usize, j: usize) -> Result<bool> {
    for v in [i, j] {
        if !topology.contains(v) {
            return Err(Error::UnknownNode(v));
        }
    }
    if i == j {
        return Err(Error::UnknownPair(i, j));
    }
    Ok(topology.neighbors(i).any(|u| topology.neighbors(j).any(|w| w == u)))
}

/// Trees obtained by cutting `i` off its neighbour on the path to `j` and
/// pasting it on each later edge of that path in turn. With path
/// `i = v₀, v₁, …, v_m = j` the result has `m − 1` entries; the first
/// is the input itself and the last has `i, j` as a cherry.
pub fn sequence(topology: &TreeTopology, i: usize, j: usize) -> Result<Vec<TreeTopology>> {
    for v in [i, j] {
        if !topology.contains(v) {
            return Err(Error::UnknownNode(v));
        }
    }
    if i == j {
        return Err(Error::UnknownPair(i, j));
    }
    let path = topology.node_path(i, j)?;
    let m = path.len() - 1;
    if m < 3 {
        return Err(Error::AlreadyCherry(i, j));
    }
    (1..m).map(|r| cut_paste(topology, i, path[1], (path[r], path[r + 1]))).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Move {
    /// Both counted from one.
    pub epoch: usize,
    pub round: usize,
    /// Index into [`InterpolationTrace::topologies`] of the tree the epoch
    /// started from; `moved`, `anchor` and `target_edge` are its node ids.
    pub base: usize,
    pub moved: usize,
    /// Neighbour of `moved` it was cut from.
    pub anchor: usize,
    pub target_edge: (usize, usize),
    pub moved_leaves: Vec<usize>,
    pub partner_leaves: Vec<usize>,
    /// Quartets whose topology differs before and after the move, sorted.
    pub changed: Vec<[usize; 4]>,
    /// Largest `Δ(α)` over `changed`, zero when it is empty.
    pub max_gap: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InterpolationTrace {
    /// Source first, target topology last; entry `k + 1` follows move `k`.
    pub topologies: Vec<TreeTopology>,
    pub moves: Vec<Move>,
    pub rounds: usize,
    pub epochs: usize,
}

impl InterpolationTrace {
    pub fn final_topology(&self) -> &TreeTopology {
        self.topologies.last().expect("trace starts with the source")
    }

    pub fn total_changed(&self) -> usize {
        self.moves.iter().map(|m| m.changed.len()).sum()
    }
}

/// Signed quartet gap: spread of `α_ab·α_cd` over the three pairings.
pub fn signed_gap(alpha: &CorrelationVector, q: [usize; 4]) -> f64 {
    let [a, b, c, d] = q;
    let p = [alpha.get(a, b) * alpha.get(c, d), alpha.get(a, c) * alpha.get(b, d), alpha.get(a, d) * alpha.get(b, c)];
    let max = p.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = p.iter().cloned().fold(f64::INFINITY, f64::min);
    max - min
}

#[derive(Debug, Clone)]
struct Cluster {
    leaves: Vec<usize>,
    /// Root of the cluster's subtree in the target.
    node: usize,
}

/// Node of `t` whose side away from the rest holds exactly `leaves`.
fn representative(t: &TreeTopology, leaves: &[usize]) -> usize {
    if leaves.len() == 1 {
        return leaves[0];
    }
    for &(a, b) in t.edges() {
        for (x, y) in [(a, b), (b, a)] {
            if !t.is_leaf(x) && t.side_leaves(x, y) == leaves {
                return x;
            }
        }
    }
    unreachable!("clusters stay intact in the current tree")
}

/// Quartets changed by moving `path[0]` from edge `(v_k, v_{k+1})` to
/// `(v_{k+1}, v_{k+2})`, for `1 ≤ k ≤ m − 2`.
fn changed_quartets(t: &TreeTopology, path: &[usize], k: usize) -> Vec<[usize; 4]> {
    let m = path.len() - 1;
    let on_path: BTreeSet<usize> = path.iter().copied().collect();
    let hanging = |q: usize| -> Vec<usize> {
        let mut s = Vec::new();
        for u in t.neighbors(path[q]) {
            if !on_path.contains(&u) {
                s.extend(t.side_leaves(u, path[q]));
            }
        }
        s
    };
    let moving = t.side_leaves(path[0], path[1]);
    let behind: Vec<usize> = (1..=k).flat_map(hanging).collect();
    let crossed = hanging(k + 1);
    let mut ahead: Vec<usize> = (k + 2..m).flat_map(hanging).collect();
    ahead.extend(t.side_leaves(path[m], path[m - 1]));
    let mut out = Vec::with_capacity(moving.len() * behind.len() * crossed.len() * ahead.len());
    for &w in &moving {
        for &z in &behind {
            for &y in &crossed {
                for &u in &ahead {
                    let mut q = [w, z, y, u];
                    q.sort_unstable();
                    out.push(q);
                }
            }
        }
    }
    out.sort_unstable();
    out
}

/// Interpolates from `source` to the topology of `target`. Which of two
/// clusters moves is decided by the target's weights; `alpha` is only used
/// to report the quartet gaps of each move.
pub fn interpolate(source: &TreeTopology, target: &WeightedTree, alpha: &CorrelationVector) -> Result<InterpolationTrace> {
    let tt = target.topology();
    if source.leaves() != tt.leaves() {
        return Err(Error::LeafSetMismatch);
    }
    if !source.is_binary() || !tt.is_binary() {
        return Err(Error::MalformedTree("both topologies must be normalized".into()));
    }
    if let Some(&l) = source.leaves().iter().find(|&&l| l > alpha.n()) {
        return Err(Error::UnknownLeaf(l));
    }

    let mut trace = InterpolationTrace { topologies: alloc::vec![source.clone()], moves: Vec::new(), rounds: 0, epochs: 0 };
    let mut current = source.clone();
    let mut live: Vec<Cluster> = source.leaves().iter().map(|&l| Cluster { leaves: alloc::vec![l], node: l }).collect();
    let common_neighbor = |a: usize, b: usize| tt.neighbors(a).find(|&u| tt.neighbors(b).any(|w| w == u));

    while live.len() >= 4 {
        trace.rounds += 1;
        let before = live.len();
        let snapshot: Vec<Vec<usize>> = live.iter().map(|c| c.leaves.clone()).collect();
        for x in 0..snapshot.len() {
            for y in x + 1..snapshot.len() {
                let (Some(ci), Some(cj)) = (
                    live.iter().position(|c| c.leaves == snapshot[x]),
                    live.iter().position(|c| c.leaves == snapshot[y]),
                ) else {
                    continue;
                };
                let Some(p) = common_neighbor(live[ci].node, live[cj].node) else { continue };
                let (ri, rj) = (representative(&current, &live[ci].leaves), representative(&current, &live[cj].leaves));
                if !is_cherry(&current, ri, rj)? {
                    trace.epochs += 1;
                    let strength = |c: &Cluster| {
                        let from_root = target.products_to(c.node);
                        let z = *c
                            .leaves
                            .iter()
                            .max_by(|&&a, &&b| libm::fabs(from_root[a]).total_cmp(&libm::fabs(from_root[b])).then(b.cmp(&a)))
                            .unwrap();
                        libm::fabs(target.products_to(p)[z])
                    };
                    let (mover, partner, i, j) = if strength(&live[ci]) > strength(&live[cj]) {
                        (cj, ci, rj, ri)
                    } else {
                        (ci, cj, ri, rj)
                    };
                    let path = current.node_path(i, j)?;
                    let steps = sequence(&current, i, j)?;
                    let base = trace.topologies.len() - 1;
                    for r in 2..path.len() - 1 {
                        let changed = changed_quartets(&current, &path, r - 1);
                        let max_gap = changed.iter().map(|&q| signed_gap(alpha, q)).fold(0.0, f64::max);
                        trace.moves.push(Move {
                            epoch: trace.epochs,
                            round: trace.rounds,
                            base,
                            moved: i,
                            anchor: path[1],
                            target_edge: (path[r], path[r + 1]),
                            moved_leaves: live[mover].leaves.clone(),
                            partner_leaves: live[partner].leaves.clone(),
                            changed,
                            max_gap,
                        });
                        trace.topologies.push(steps[r - 1].clone());
                    }
                    current = steps.last().unwrap().clone();
                }
                let mut merged = live[ci].leaves.clone();
                merged.extend_from_slice(&live[cj].leaves);
                merged.sort_unstable();
                let (hi, lo) = (ci.max(cj), ci.min(cj));
                live.remove(hi);
                live.remove(lo);
                live.push(Cluster { leaves: merged, node: p });
                live.sort_by_key(|c| c.leaves[0]);
            }
        }
        if live.len() == before {
            return Err(Error::MalformedTree("interpolation made no progress".into()));
        }
    }
    Ok(trace)
}
