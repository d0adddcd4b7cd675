//! Unrooted leaf-labelled trees, their weighted versions, and surgery.

mod graph;
mod matching;
mod quartet;
mod surgery;

pub(crate) use graph::Graph;
pub use matching::{closest_relative_matching, MatchingPlan};
pub use quartet::{quartet_split, Pairing, QuartetSplit, TIE_TOLERANCE};
pub use surgery::{cut_paste, induced_subtree};

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use crate::correlation::CorrelationVector;
use crate::error::{Error, Result};

/// A side of an internal edge: the sorted leaf labels on the side that does
/// not contain the tree's smallest leaf.
pub type Split = Vec<usize>;

/// Unrooted tree topology. Leaves carry their labels as node ids; internal
/// nodes are numbered from `max_label + 1` in a canonical order, so two
/// topologies compare equal exactly when they are the same labelled tree.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TreeTopology {
    leaves: Vec<usize>,
    first_internal: usize,
    // (neighbour, edge index), sorted by neighbour
    adj: Vec<Vec<(usize, usize)>>,
    edges: Vec<(usize, usize)>,
}

/// A tree rooted at some node, listed in preorder.
#[derive(Debug, Clone)]
pub struct Rooted {
    pub order: Vec<usize>,
    /// `usize::MAX` for the root and for absent ids.
    pub parent: Vec<usize>,
    pub parent_edge: Vec<usize>,
}

impl Rooted {
    pub fn root(&self) -> usize {
        self.order[0]
    }
}

impl TreeTopology {
    pub(crate) fn from_canonical(
        leaves: Vec<usize>,
        id_bound: usize,
        edges: Vec<(usize, usize)>,
    ) -> Self {
        let mut adj = vec![Vec::new(); id_bound];
        for (k, &(a, b)) in edges.iter().enumerate() {
            adj[a].push((b, k));
            adj[b].push((a, k));
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        let first_internal = leaves.last().copied().unwrap_or(0) + 1;
        TreeTopology { leaves, first_internal, adj, edges }
    }

    /// Builds a topology from an edge list. Ids listed in `leaves` are leaf
    /// labels; every other id is an internal node and may be arbitrary.
    pub fn from_edges(leaves: &[usize], edges: &[(usize, usize)]) -> Result<Self> {
        let weighted: Vec<(usize, usize, f64)> = edges.iter().map(|&(a, b)| (a, b, 1.0)).collect();
        Ok(WeightedTree::from_edges(leaves, &weighted)?.topology)
    }

    /// The tree with a single leaf and no edges.
    pub fn single_leaf(label: usize) -> Result<Self> {
        Self::from_edges(&[label], &[])
    }

    /// Leaves `1..=n` hanging off a path of internal nodes.
    pub fn caterpillar(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::TooFewLeaves(n));
        }
        if n == 2 {
            return Self::from_edges(&[1, 2], &[(1, 2)]);
        }
        let spine: Vec<usize> = (0..n - 2).map(|k| n + 1 + k).collect();
        let mut edges = vec![(1, spine[0]), (2, spine[0])];
        for k in 1..spine.len() {
            edges.push((spine[k - 1], spine[k]));
        }
        for (k, &s) in spine.iter().enumerate().skip(1) {
            edges.push((k + 2, s));
        }
        edges.push((n, spine[n - 3]));
        Self::from_edges(&(1..=n).collect::<Vec<_>>(), &edges)
    }

    /// One internal node adjacent to every leaf `1..=n`.
    pub fn star(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::TooFewLeaves(n));
        }
        let edges: Vec<(usize, usize)> = (1..=n).map(|l| (l, n + 1)).collect();
        Self::from_edges(&(1..=n).collect::<Vec<_>>(), &edges)
    }

    pub fn leaf_count(&self) -> usize {
        self.leaves.len()
    }

    /// Sorted leaf labels.
    pub fn leaves(&self) -> &[usize] {
        &self.leaves
    }

    /// True when the leaves are exactly `1..=n`.
    pub fn has_standard_leaves(&self) -> bool {
        self.leaves.iter().enumerate().all(|(k, &l)| l == k + 1)
    }

    pub fn internal_nodes(&self) -> Range<usize> {
        self.first_internal..self.adj.len()
    }

    pub fn node_count(&self) -> usize {
        self.leaves.len() + self.internal_nodes().len()
    }

    /// Leaves in label order, then internal nodes.
    pub fn nodes(&self) -> impl Iterator<Item = usize> + '_ {
        self.leaves.iter().copied().chain(self.internal_nodes())
    }

    /// One past the largest node id.
    pub fn id_bound(&self) -> usize {
        self.adj.len()
    }

    pub fn is_leaf(&self, v: usize) -> bool {
        self.leaves.binary_search(&v).is_ok()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.is_leaf(v) || self.internal_nodes().contains(&v)
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge_index(&self, a: usize, b: usize) -> Option<usize> {
        if !self.contains(a) {
            return None;
        }
        self.adj[a].iter().find(|&&(u, _)| u == b).map(|&(_, k)| k)
    }

    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.adj[v].iter().map(|&(u, _)| u)
    }

    /// `(neighbour, edge index)` pairs.
    pub fn incident(&self, v: usize) -> &[(usize, usize)] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    /// Every internal node has degree three.
    pub fn is_binary(&self) -> bool {
        self.internal_nodes().all(|v| self.degree(v) == 3)
    }

    /// Binary form: degree-two nodes contracted, higher degrees resolved.
    pub fn normalize(&self) -> TreeTopology {
        let mut g = Graph::from_tree(self, None);
        g.split_high_degree();
        g.contract_degree_two();
        g.finish().expect("normalizing a valid tree").0
    }

    pub fn rooted_at(&self, root: usize) -> Rooted {
        let size = self.adj.len();
        let mut parent = vec![usize::MAX; size];
        let mut parent_edge = vec![usize::MAX; size];
        let mut order = Vec::with_capacity(self.node_count());
        let mut stack = vec![root];
        let mut seen = vec![false; size];
        seen[root] = true;
        while let Some(v) = stack.pop() {
            order.push(v);
            for &(u, k) in self.adj[v].iter().rev() {
                if !seen[u] {
                    seen[u] = true;
                    parent[u] = v;
                    parent_edge[u] = k;
                    stack.push(u);
                }
            }
        }
        Rooted { order, parent, parent_edge }
    }

    /// Rooted at the smallest leaf.
    pub fn rooted(&self) -> Rooted {
        self.rooted_at(self.leaves[0])
    }

    fn check_node(&self, v: usize) -> Result<()> {
        if self.contains(v) {
            Ok(())
        } else {
            Err(Error::UnknownNode(v))
        }
    }

    /// Nodes on the path from `a` to `b`, both included.
    pub fn node_path(&self, a: usize, b: usize) -> Result<Vec<usize>> {
        self.check_node(a)?;
        self.check_node(b)?;
        let r = self.rooted_at(b);
        let mut path = vec![a];
        let mut v = a;
        while v != b {
            v = r.parent[v];
            path.push(v);
        }
        Ok(path)
    }

    /// Edge indices on the path from `a` to `b`, in order.
    pub fn path_edge_indices(&self, a: usize, b: usize) -> Result<Vec<usize>> {
        let nodes = self.node_path(a, b)?;
        Ok(nodes.windows(2).map(|w| self.edge_index(w[0], w[1]).unwrap()).collect())
    }

    /// The unique path between two distinct leaves as oriented edges.
    pub fn path(&self, i: usize, j: usize) -> Result<Vec<(usize, usize)>> {
        for l in [i, j] {
            if !self.is_leaf(l) {
                return Err(Error::UnknownLeaf(l));
            }
        }
        if i == j {
            return Err(Error::UnknownPair(i, j));
        }
        let nodes = self.node_path(i, j)?;
        Ok(nodes.windows(2).map(|w| (w[0], w[1])).collect())
    }

    /// Leaf labels reachable from `v` without using the edge to `avoid`.
    pub fn side_leaves(&self, v: usize, avoid: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![(v, avoid)];
        while let Some((x, from)) = stack.pop() {
            if self.is_leaf(x) {
                out.push(x);
            }
            for u in self.neighbors(x) {
                if u != from {
                    stack.push((u, x));
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Number of edges between every pair of nodes reachable from each leaf,
    /// indexed `[leaf position][node id]`.
    pub fn leaf_hop_distances(&self) -> Vec<Vec<usize>> {
        self.leaves
            .iter()
            .map(|&l| {
                let r = self.rooted_at(l);
                let mut d = vec![usize::MAX; self.adj.len()];
                d[l] = 0;
                for &v in &r.order[1..] {
                    d[v] = d[r.parent[v]] + 1;
                }
                d
            })
            .collect()
    }

    /// Longest leaf-to-leaf path, in edges.
    pub fn diameter(&self) -> usize {
        let d = self.leaf_hop_distances();
        let mut best = 0;
        for row in &d {
            for &l in &self.leaves {
                best = best.max(row[l]);
            }
        }
        best
    }

    /// Non-trivial splits (both sides at least two leaves), sorted.
    pub fn splits(&self) -> BTreeSet<Split> {
        let mut out = BTreeSet::new();
        let n = self.leaf_count();
        if n < 4 {
            return out;
        }
        let r = self.rooted();
        let mut below: Vec<Vec<usize>> = vec![Vec::new(); self.adj.len()];
        for &v in r.order.iter().rev() {
            if self.is_leaf(v) {
                below[v].push(v);
            }
            let p = r.parent[v];
            if p != usize::MAX {
                let size = below[v].len();
                if size >= 2 && size <= n - 2 {
                    let mut s = below[v].clone();
                    s.sort_unstable();
                    out.insert(s);
                }
                let mine = core::mem::take(&mut below[v]);
                below[p].extend(mine);
            }
        }
        out
    }

    /// Split of edge `k`, possibly trivial.
    pub fn edge_split(&self, k: usize) -> Split {
        let (a, b) = self.edges[k];
        let side = self.side_leaves(b, a);
        if side.first() == self.leaves.first() {
            self.side_leaves(a, b)
        } else {
            side
        }
    }

    /// Same labelled tree up to degree-two nodes: equal leaves and splits.
    pub fn same_topology(&self, other: &TreeTopology) -> bool {
        self.leaves == other.leaves && self.splits() == other.splits()
    }

    /// Induced pairing of four leaves, `None` when they meet at one node.
    pub fn quartet_topology(&self, quartet: [usize; 4]) -> Result<Option<Pairing>> {
        let mut q = quartet;
        q.sort_unstable();
        for &l in &q {
            if !self.is_leaf(l) {
                return Err(Error::UnknownLeaf(l));
            }
        }
        let dist: Vec<Vec<usize>> = q
            .iter()
            .map(|&l| {
                let r = self.rooted_at(l);
                let mut d = vec![0usize; self.adj.len()];
                for &v in &r.order[1..] {
                    d[v] = d[r.parent[v]] + 1;
                }
                d
            })
            .collect();
        Ok(quartet::pairing_from_sums([
            dist[0][q[1]] + dist[2][q[3]],
            dist[0][q[2]] + dist[1][q[3]],
            dist[0][q[3]] + dist[1][q[2]],
        ]))
    }

    /// Induced pairing of every quartet of leaves, quartets in lexicographic
    /// order.
    pub fn quartet_topologies(&self) -> Vec<([usize; 4], Option<Pairing>)> {
        let d = self.leaf_hop_distances();
        let l = &self.leaves;
        let n = l.len();
        let mut out = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                for c in b + 1..n {
                    for e in c + 1..n {
                        let p = quartet::pairing_from_sums([
                            d[a][l[b]] + d[c][l[e]],
                            d[a][l[c]] + d[b][l[e]],
                            d[a][l[e]] + d[b][l[c]],
                        ]);
                        out.push(([l[a], l[b], l[c], l[e]], p));
                    }
                }
            }
        }
        out
    }
}

/// A topology with one weight per edge, aligned with [`TreeTopology::edges`].
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedTree {
    topology: TreeTopology,
    theta: Vec<f64>,
}

impl WeightedTree {
    pub fn new(topology: TreeTopology, theta: Vec<f64>) -> Result<Self> {
        if theta.len() != topology.edges().len() {
            return Err(Error::DimensionMismatch {
                expected: topology.edges().len(),
                found: theta.len(),
            });
        }
        if let Some(w) = theta.iter().find(|w| !w.is_finite() || libm::fabs(**w) > 1.0) {
            return Err(Error::BadParameter(alloc::format!("edge weight {w} outside [-1, 1]")));
        }
        Ok(WeightedTree { topology, theta })
    }

    /// Same weight on every edge.
    pub fn uniform(topology: TreeTopology, theta: f64) -> Result<Self> {
        let k = topology.edges().len();
        Self::new(topology, vec![theta; k])
    }

    /// Builds from `(a, b, theta)` triples; see [`TreeTopology::from_edges`].
    pub fn from_edges(leaves: &[usize], edges: &[(usize, usize, f64)]) -> Result<Self> {
        let mut g = Graph::new();
        let mut ids = alloc::collections::BTreeMap::new();
        let leaf_set: BTreeSet<usize> = leaves.iter().copied().collect();
        for &l in leaves {
            ids.insert(l, g.add_node(Some(l)));
        }
        for &(a, b, w) in edges {
            for x in [a, b] {
                if !ids.contains_key(&x) {
                    let label = if leaf_set.contains(&x) { Some(x) } else { None };
                    ids.insert(x, g.add_node(label));
                }
            }
            g.add_edge(ids[&a], ids[&b], w);
        }
        let (topology, theta) = g.finish()?;
        Ok(WeightedTree { topology, theta })
    }

    pub(crate) fn from_graph(g: &Graph) -> Result<Self> {
        let (topology, theta) = g.finish()?;
        Ok(WeightedTree { topology, theta })
    }

    pub fn topology(&self) -> &TreeTopology {
        &self.topology
    }

    pub fn into_topology(self) -> TreeTopology {
        self.topology
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn leaf_count(&self) -> usize {
        self.topology.leaf_count()
    }

    pub fn weight(&self, a: usize, b: usize) -> Option<f64> {
        self.topology.edge_index(a, b).map(|k| self.theta[k])
    }

    /// Copy with edge `k` reweighted.
    pub fn with_weight(&self, k: usize, theta: f64) -> Result<Self> {
        let mut t = self.theta.clone();
        *t.get_mut(k).ok_or(Error::BadParameter(alloc::format!("no edge {k}")))? = theta;
        Self::new(self.topology.clone(), t)
    }

    /// All weights replaced by their absolute values.
    pub fn ferromagnetic(&self) -> Self {
        WeightedTree {
            topology: self.topology.clone(),
            theta: self.theta.iter().map(|w| libm::fabs(*w)).collect(),
        }
    }

    /// Binary form with the same leaf distribution: degree-two paths become
    /// one edge carrying the product of their weights, and nodes of degree
    /// four or more are resolved with weight-one edges.
    pub fn normalize(&self) -> WeightedTree {
        let mut g = Graph::from_tree(&self.topology, Some(&self.theta));
        g.split_high_degree();
        g.contract_degree_two();
        Self::from_graph(&g).expect("normalizing a valid tree")
    }

    /// Merges the endpoints of internal edge `k`. The result may have a node
    /// of degree four or more.
    pub fn contract_edge(&self, k: usize) -> Result<WeightedTree> {
        let &(a, b) = self
            .topology
            .edges()
            .get(k)
            .ok_or(Error::BadParameter(alloc::format!("no edge {k}")))?;
        if self.topology.is_leaf(a) || self.topology.is_leaf(b) {
            return Err(Error::BadParameter("cannot contract a pendant edge".into()));
        }
        let mut g = Graph::from_tree(&self.topology, Some(&self.theta));
        g.remove_edge(a, b);
        let moved: Vec<(usize, f64)> = self
            .topology
            .incident(b)
            .iter()
            .filter(|&&(u, _)| u != a)
            .map(|&(u, e)| (u, self.theta[e]))
            .collect();
        for (u, w) in moved {
            g.remove_edge(b, u);
            g.add_edge(a, u, w);
        }
        g.prune_to(&self.topology.leaves().iter().copied().collect());
        Self::from_graph(&g)
    }

    /// Minimal subtree spanning `leaves`, with degree-two paths merged into
    /// product-weight edges.
    pub fn induced(&self, leaves: &[usize]) -> Result<WeightedTree> {
        let keep = surgery::check_subset(&self.topology, leaves)?;
        let mut g = Graph::from_tree(&self.topology, Some(&self.theta));
        g.prune_to(&keep);
        g.contract_degree_two();
        Self::from_graph(&g)
    }

    /// Leaf correlations: the product of weights along each leaf path.
    pub fn correlations(&self) -> CorrelationVector {
        let t = &self.topology;
        let n = t.leaves().last().copied().unwrap_or(0);
        let mut alpha = CorrelationVector::zeros(n);
        for &i in t.leaves() {
            let r = t.rooted_at(i);
            let mut prod = vec![1.0; t.id_bound()];
            for &v in &r.order[1..] {
                prod[v] = prod[r.parent[v]] * self.theta[r.parent_edge[v]];
                if t.is_leaf(v) && v > i {
                    alpha.set(i, v, prod[v]);
                }
            }
        }
        alpha
    }

    /// Product of weights from every node to `target`, indexed by node id.
    pub fn products_to(&self, target: usize) -> Vec<f64> {
        let r = self.topology.rooted_at(target);
        let mut prod = vec![0.0; self.topology.id_bound()];
        prod[target] = 1.0;
        for &v in &r.order[1..] {
            prod[v] = prod[r.parent[v]] * self.theta[r.parent_edge[v]];
        }
        prod
    }
}

#[cfg(test)]
pub(crate) mod tests;
