//! Forest reconstruction from approximate correlations.
//!
//! Leaves are grouped by chains of strong correlations, each group gets a
//! binary topology by incremental quartet insertion, and internal edges whose
//! estimated weight is within `ξ` of one are contracted. Everything works on
//! `|α̂|`; signs are left to the weight fit.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::correlation::CorrelationVector;
use crate::error::{Error, Result};
use crate::tree::{quartet_split, TreeTopology, WeightedTree};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReconstructConfig {
    /// Constant of the contract: contracted edges have `|θ*| ≥ 1 − C·ξ` and
    /// cross-component pairs `|α*| ≤ C·√δ`.
    pub c: f64,
    /// Leaves are linked when `|α̂| > max(split_scale·δ, 2η)`.
    pub split_scale: f64,
    /// Quartets consulted per edge when estimating its weight.
    pub witnesses: usize,
}

impl Default for ReconstructConfig {
    fn default() -> Self {
        ReconstructConfig { c: 4.0, split_scale: 0.1, witnesses: 16 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructedForest {
    /// Sorted by smallest leaf. No internal node has degree two; contracted
    /// edges leave nodes of degree four or more.
    pub components: Vec<TreeTopology>,
    pub xi: f64,
    pub delta: f64,
    pub eta: f64,
    /// Correlation magnitude above which two leaves were linked.
    pub link_threshold: f64,
}

impl ReconstructedForest {
    pub fn leaf_sets(&self) -> Vec<Vec<usize>> {
        self.components.iter().map(|c| c.leaves().to_vec()).collect()
    }
}

pub fn reconstruct_forest(alpha_hat: &CorrelationVector, xi: f64, delta: f64, eta: f64) -> Result<ReconstructedForest> {
    reconstruct_forest_with(alpha_hat, xi, delta, eta, &ReconstructConfig::default())
}

pub fn reconstruct_forest_with(
    alpha_hat: &CorrelationVector,
    xi: f64,
    delta: f64,
    eta: f64,
    config: &ReconstructConfig,
) -> Result<ReconstructedForest> {
    if !(xi > 0.0) || !(delta > 0.0 && delta < 1.0) || !(eta >= 0.0) {
        return Err(Error::BadParameter(format!("need ξ > 0, 0 < δ < 1, η ≥ 0 (got {xi}, {delta}, {eta})")));
    }
    if xi * delta < eta * (1.0 - 1e-12) {
        return Err(Error::BadParameter(format!("ξ·δ = {} is below η = {eta}", xi * delta)));
    }
    let n = alpha_hat.n();
    if n == 0 {
        return Err(Error::TooFewLeaves(0));
    }
    let alpha = alpha_hat.abs();
    let link_threshold = (config.split_scale * delta).max(2.0 * eta);
    let mut components = Vec::new();
    for leaves in linked_groups(&alpha, link_threshold) {
        let t = grow_topology(&alpha, &leaves)?;
        components.push(contract_heavy_edges(&t, &alpha, 1.0 - xi, config.witnesses)?);
    }
    Ok(ReconstructedForest { components, xi, delta, eta, link_threshold })
}

/// Connected components of the graph joining pairs with `|α| > threshold`,
/// sorted by smallest leaf.
fn linked_groups(alpha: &CorrelationVector, threshold: f64) -> Vec<Vec<usize>> {
    let n = alpha.n();
    let mut group = vec![usize::MAX; n + 1];
    let mut out = Vec::new();
    for start in 1..=n {
        if group[start] != usize::MAX {
            continue;
        }
        let id = out.len();
        group[start] = id;
        let mut members = vec![start];
        let mut k = 0;
        while k < members.len() {
            let i = members[k];
            for j in 1..=n {
                if group[j] == usize::MAX && alpha.get(i, j) > threshold {
                    group[j] = id;
                    members.push(j);
                }
            }
            k += 1;
        }
        members.sort_unstable();
        out.push(members);
    }
    out
}

struct Growing {
    adj: Vec<Vec<usize>>,
    label: Vec<Option<usize>>,
}

impl Growing {
    fn add_node(&mut self, label: Option<usize>) -> usize {
        self.adj.push(Vec::new());
        self.label.push(label);
        self.adj.len() - 1
    }

    fn link(&mut self, a: usize, b: usize) {
        self.adj[a].push(b);
        self.adj[b].push(a);
    }

    fn unlink(&mut self, a: usize, b: usize) {
        self.adj[a].retain(|&x| x != b);
        self.adj[b].retain(|&x| x != a);
    }

    fn edges(&self) -> Vec<(usize, usize)> {
        let mut e = Vec::new();
        for (a, list) in self.adj.iter().enumerate() {
            e.extend(list.iter().filter(|&&b| a < b).map(|&b| (a, b)));
        }
        e
    }

    fn hops(&self) -> Vec<Vec<usize>> {
        let k = self.adj.len();
        (0..k)
            .map(|s| {
                let mut d = vec![usize::MAX; k];
                d[s] = 0;
                let mut queue = vec![s];
                let mut h = 0;
                while h < queue.len() {
                    let v = queue[h];
                    h += 1;
                    for &u in &self.adj[v] {
                        if d[u] == usize::MAX {
                            d[u] = d[v] + 1;
                            queue.push(u);
                        }
                    }
                }
                d
            })
            .collect()
    }
}

/// Partner of `x` in the quartet pairing chosen by the correlations, and the
/// pairing's gap.
fn observed_partner(alpha: &CorrelationVector, x: usize, others: [usize; 3]) -> (usize, f64) {
    let q = quartet_split(alpha, [x, others[0], others[1], others[2]]).expect("distinct valid leaves");
    let [(a, b), (c, d)] = q.split.pairs(q.quartet);
    let partner = if a == x {
        b
    } else if b == x {
        a
    } else if c == x {
        d
    } else {
        c
    };
    (partner, q.gap)
}

/// Binary topology on `leaves` by inserting one leaf at a time on the edge
/// that agrees with the most gap-weighted quartets.
fn grow_topology(alpha: &CorrelationVector, leaves: &[usize]) -> Result<TreeTopology> {
    let internal_base = alpha.n() + 1;
    match leaves.len() {
        0 => return Err(Error::TooFewLeaves(0)),
        1 => return TreeTopology::single_leaf(leaves[0]),
        2 => return TreeTopology::from_edges(leaves, &[(leaves[0], leaves[1])]),
        _ => {}
    }
    let mut g = Growing { adj: Vec::new(), label: Vec::new() };
    let mut placed: Vec<usize> = Vec::new();
    let hub = g.add_node(None);
    for &l in &leaves[..3] {
        let v = g.add_node(Some(l));
        g.link(hub, v);
        placed.push(v);
    }
    for &x in &leaves[3..] {
        let triples = triples_of(placed.len());
        let obs: Vec<(usize, f64)> = triples
            .iter()
            .map(|t| observed_partner(alpha, x, t.map(|k| g.label[placed[k]].unwrap())))
            .collect();
        let d = g.hops();
        let mut best: Option<((usize, usize), f64)> = None;
        for (a, b) in g.edges() {
            let mut score = 0.0;
            for (t, &(partner, gap)) in triples.iter().zip(&obs) {
                let [p, q, r] = t.map(|k| placed[k]);
                let dx = |v: usize| d[a][v].min(d[b][v]);
                let sums = [dx(p) + d[q][r], dx(q) + d[p][r], dx(r) + d[p][q]];
                let k = (0..3).min_by_key(|&k| sums[k]).unwrap();
                if g.label[[p, q, r][k]] == Some(partner) {
                    score += gap;
                }
            }
            if best.map_or(true, |(_, s)| score > s) {
                best = Some(((a, b), score));
            }
        }
        let ((a, b), _) = best.expect("a tree with three leaves has edges");
        let t = g.add_node(None);
        let v = g.add_node(Some(x));
        g.unlink(a, b);
        g.link(a, t);
        g.link(t, b);
        g.link(t, v);
        placed.push(v);
    }
    let id = |v: usize| g.label[v].unwrap_or(internal_base + v);
    let edges: Vec<(usize, usize)> = g.edges().into_iter().map(|(a, b)| (id(a), id(b))).collect();
    TreeTopology::from_edges(leaves, &edges)
}

fn triples_of(k: usize) -> Vec<[usize; 3]> {
    let mut out = Vec::new();
    for a in 0..k {
        for b in a + 1..k {
            for c in b + 1..k {
                out.push([a, b, c]);
            }
        }
    }
    out
}

/// Weight of internal edge `k` implied by `|α_ac·α_bd| / |α_ab·α_cd|` for
/// quartets with `a, b` on different branches behind one endpoint and
/// `c, d` behind the other: the median of the square roots over up to
/// `max_witnesses` quartets built from the leaves nearest the edge. `None`
/// for pendant edges or when every witness has a zero denominator.
pub fn implied_edge_weight(
    topology: &TreeTopology,
    alpha: &CorrelationVector,
    k: usize,
    max_witnesses: usize,
) -> Option<f64> {
    let (u, v) = *topology.edges().get(k)?;
    if topology.is_leaf(u) || topology.is_leaf(v) {
        return None;
    }
    let near = |end: usize, other: usize| -> Vec<Vec<usize>> {
        let r = topology.rooted_at(end);
        let mut depth = vec![0usize; topology.id_bound()];
        for &x in &r.order[1..] {
            depth[x] = depth[r.parent[x]] + 1;
        }
        topology
            .neighbors(end)
            .filter(|&w| w != other)
            .map(|w| {
                let mut side = topology.side_leaves(w, end);
                side.sort_by_key(|&l| (depth[l], l));
                side.truncate(2);
                side
            })
            .collect()
    };
    let left = near(u, v);
    let right = near(v, u);
    let mut est = Vec::new();
    // every pair of branches behind each end, nearest leaves first
    'outer: for x in 0..left.len() {
        for y in x + 1..left.len() {
            for z in 0..right.len() {
                for w in z + 1..right.len() {
                    for &a in &left[x] {
                        for &b in &left[y] {
                            for &c in &right[z] {
                                for &d in &right[w] {
                                    if est.len() >= max_witnesses {
                                        break 'outer;
                                    }
                                    let den = libm::fabs(alpha.get(a, b) * alpha.get(c, d));
                                    if den > 0.0 {
                                        let num = libm::fabs(alpha.get(a, c) * alpha.get(b, d));
                                        est.push(libm::sqrt(num / den));
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    if est.is_empty() {
        return None;
    }
    est.sort_by(f64::total_cmp);
    let m = est.len();
    Some(if m % 2 == 1 { est[m / 2] } else { 0.5 * (est[m / 2 - 1] + est[m / 2]) })
}

fn contract_heavy_edges(
    t: &TreeTopology,
    alpha: &CorrelationVector,
    cutoff: f64,
    witnesses: usize,
) -> Result<TreeTopology> {
    let heavy: Vec<bool> = (0..t.edges().len())
        .map(|k| implied_edge_weight(t, alpha, k, witnesses).is_some_and(|w| w > cutoff))
        .collect();
    if !heavy.contains(&true) {
        return Ok(t.clone());
    }
    let mut rep: Vec<usize> = (0..t.id_bound()).collect();
    fn find(rep: &mut [usize], v: usize) -> usize {
        let mut r = v;
        while rep[r] != r {
            r = rep[r];
        }
        rep[v] = r;
        r
    }
    for (k, &(a, b)) in t.edges().iter().enumerate() {
        if heavy[k] {
            let (ra, rb) = (find(&mut rep, a), find(&mut rep, b));
            rep[ra.max(rb)] = ra.min(rb);
        }
    }
    let edges: Vec<(usize, usize)> = t
        .edges()
        .iter()
        .enumerate()
        .filter(|(k, _)| !heavy[*k])
        .map(|(_, &(a, b))| (find(&mut rep, a), find(&mut rep, b)))
        .collect();
    TreeTopology::from_edges(t.leaves(), &edges)
}

/// Outcome of comparing a reconstruction with the model that generated the
/// correlations.
#[derive(Debug, Clone, PartialEq)]
pub struct ContractCheck {
    /// Leaf sets partition `1..=n`.
    pub partition: bool,
    /// Every component's splits are splits of the true induced subtree.
    pub compatible: bool,
    /// Smallest `|θ*|` over true edges missing from the reconstruction, one
    /// when none are missing.
    pub min_contracted_weight: f64,
    /// Largest `|α*|` across components, zero for a single component.
    pub max_cross_correlation: f64,
    /// All of the above within the bounds for constant `c`.
    pub holds: bool,
}

/// Checks the reconstruction contract against a ground-truth tree on leaves
/// `1..=n`.
pub fn check_contract(forest: &ReconstructedForest, truth: &WeightedTree, c: f64) -> Result<ContractCheck> {
    let n = truth.leaf_count();
    if !truth.topology().has_standard_leaves() {
        return Err(Error::LeafSetMismatch);
    }
    let mut seen = vec![0usize; n + 1];
    let mut partition = true;
    for comp in &forest.components {
        for &l in comp.leaves() {
            if l > n {
                partition = false;
            } else {
                seen[l] += 1;
            }
        }
    }
    partition &= seen[1..].iter().all(|&s| s == 1);

    let alpha = truth.correlations();
    let mut compatible = true;
    let mut min_contracted_weight: f64 = 1.0;
    let mut component_of = vec![usize::MAX; n + 1];
    for (ci, comp) in forest.components.iter().enumerate() {
        for &l in comp.leaves() {
            if l <= n {
                component_of[l] = ci;
            }
        }
        if comp.leaf_count() < 4 || !partition {
            continue;
        }
        let induced = truth.induced(comp.leaves())?.normalize();
        let got: BTreeSet<Vec<usize>> = comp.splits();
        let it = induced.topology();
        let mut want = BTreeSet::new();
        for k in 0..it.edges().len() {
            let (a, b) = it.edges()[k];
            if it.is_leaf(a) || it.is_leaf(b) {
                continue;
            }
            let s = it.edge_split(k);
            if !got.contains(&s) {
                min_contracted_weight = min_contracted_weight.min(libm::fabs(induced.theta()[k]));
            }
            want.insert(s);
        }
        compatible &= got.is_subset(&want);
    }
    let mut max_cross: f64 = 0.0;
    for (i, j, a) in alpha.pairs() {
        if component_of[i] != component_of[j] {
            max_cross = max_cross.max(libm::fabs(a));
        }
    }
    let holds = partition
        && compatible
        && min_contracted_weight >= 1.0 - c * forest.xi
        && max_cross <= c * libm::sqrt(forest.delta);
    Ok(ContractCheck { partition, compatible, min_contracted_weight, max_cross_correlation: max_cross, holds })
}

#[cfg(test)]
mod tests;
