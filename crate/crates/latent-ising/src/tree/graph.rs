//! Mutable adjacency-list tree used for surgery. Every public tree value is
//! produced by [`Graph::finish`], which validates and renumbers canonically.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::TreeTopology;
use crate::error::{Error, Result};

const NONE: usize = usize::MAX;

#[derive(Debug, Clone)]
pub(crate) struct Graph {
    adj: Vec<Vec<(usize, f64)>>,
    label: Vec<Option<usize>>,
    alive: Vec<bool>,
}

impl Graph {
    pub(crate) fn new() -> Self {
        Graph { adj: Vec::new(), label: Vec::new(), alive: Vec::new() }
    }

    /// Copy of `tree` with graph index equal to node id.
    pub(crate) fn from_tree(tree: &TreeTopology, theta: Option<&[f64]>) -> Self {
        let size = tree.id_bound();
        let mut g = Graph {
            adj: vec![Vec::new(); size],
            label: vec![None; size],
            alive: vec![false; size],
        };
        for v in tree.nodes() {
            g.alive[v] = true;
            if tree.is_leaf(v) {
                g.label[v] = Some(v);
            }
        }
        for (k, &(a, b)) in tree.edges().iter().enumerate() {
            let w = theta.map_or(1.0, |t| t[k]);
            g.adj[a].push((b, w));
            g.adj[b].push((a, w));
        }
        g
    }

    pub(crate) fn add_node(&mut self, label: Option<usize>) -> usize {
        self.adj.push(Vec::new());
        self.label.push(label);
        self.alive.push(true);
        self.adj.len() - 1
    }

    pub(crate) fn add_edge(&mut self, a: usize, b: usize, w: f64) {
        self.adj[a].push((b, w));
        self.adj[b].push((a, w));
    }

    pub(crate) fn remove_edge(&mut self, a: usize, b: usize) -> Option<f64> {
        let pa = self.adj[a].iter().position(|&(x, _)| x == b)?;
        let (_, w) = self.adj[a].remove(pa);
        if let Some(pb) = self.adj[b].iter().position(|&(x, _)| x == a) {
            self.adj[b].remove(pb);
        }
        Some(w)
    }

    pub(crate) fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub(crate) fn neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.adj[v].iter().map(|&(x, _)| x)
    }

    fn kill(&mut self, v: usize) {
        let nbrs: Vec<usize> = self.neighbors(v).collect();
        for u in nbrs {
            self.remove_edge(v, u);
        }
        self.alive[v] = false;
    }

    /// Nodes reachable from `start` without crossing the edge `(start, avoid)`.
    pub(crate) fn component_avoiding(&self, start: usize, avoid: usize) -> Vec<bool> {
        let mut seen = vec![false; self.adj.len()];
        seen[start] = true;
        let mut stack = vec![start];
        while let Some(v) = stack.pop() {
            for u in self.neighbors(v) {
                if v == start && u == avoid {
                    continue;
                }
                if !seen[u] {
                    seen[u] = true;
                    stack.push(u);
                }
            }
        }
        seen
    }

    /// Drops leaves whose label is not in `keep`, then repeatedly removes
    /// internal nodes left with degree at most one.
    pub(crate) fn prune_to(&mut self, keep: &BTreeSet<usize>) {
        for v in 0..self.adj.len() {
            if let (true, Some(l)) = (self.alive[v], self.label[v]) {
                if !keep.contains(&l) {
                    self.kill(v);
                }
            }
        }
        loop {
            let mut changed = false;
            for v in 0..self.adj.len() {
                if self.alive[v] && self.label[v].is_none() && self.degree(v) <= 1 {
                    self.kill(v);
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
    }

    /// Replaces every internal node of degree two by a single edge whose
    /// weight is the product of the two merged edges.
    pub(crate) fn contract_degree_two(&mut self) {
        for v in 0..self.adj.len() {
            if self.alive[v] && self.label[v].is_none() && self.degree(v) == 2 {
                let (a, wa) = self.adj[v][0];
                let (b, wb) = self.adj[v][1];
                self.kill(v);
                self.add_edge(a, b, wa * wb);
            }
        }
    }

    /// Resolves internal nodes of degree four or more with weight-one edges,
    /// keeping the first two neighbours in adjacency order at each step.
    pub(crate) fn split_high_degree(&mut self) {
        let mut v = 0;
        while v < self.adj.len() {
            if self.alive[v] && self.label[v].is_none() && self.degree(v) >= 4 {
                let moved: Vec<(usize, f64)> = self.adj[v][2..].to_vec();
                let t = self.add_node(None);
                for &(u, w) in &moved {
                    self.remove_edge(v, u);
                    self.add_edge(t, u, w);
                }
                self.add_edge(v, t, 1.0);
            }
            v += 1;
        }
    }

    /// Validates the graph as a tree and renumbers it canonically: leaves
    /// keep their labels, internal nodes are numbered from `max_label + 1` in
    /// depth-first preorder from the smallest leaf, visiting children in
    /// order of the smallest leaf label below them.
    pub(crate) fn finish(&self) -> Result<(TreeTopology, Vec<f64>)> {
        let nodes: Vec<usize> = (0..self.adj.len()).filter(|&v| self.alive[v]).collect();
        let mut leaves: Vec<(usize, usize)> = nodes
            .iter()
            .filter_map(|&v| self.label[v].map(|l| (l, v)))
            .collect();
        leaves.sort_unstable();
        if leaves.is_empty() {
            return Err(Error::MalformedTree("no leaves".into()));
        }
        for w in leaves.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::MalformedTree(format!("duplicate leaf label {}", w[0].0)));
            }
        }
        if leaves[0].0 == 0 {
            return Err(Error::MalformedTree("leaf labels start at 1".into()));
        }
        let edge_count: usize = nodes.iter().map(|&v| self.degree(v)).sum::<usize>() / 2;
        if edge_count + 1 != nodes.len() {
            return Err(Error::MalformedTree(format!(
                "{} nodes but {} edges",
                nodes.len(),
                edge_count
            )));
        }
        for &v in &nodes {
            let d = self.degree(v);
            match self.label[v] {
                Some(l) if nodes.len() > 1 && d != 1 => {
                    return Err(Error::MalformedTree(format!("leaf {l} has degree {d}")));
                }
                None if d < 2 => {
                    return Err(Error::MalformedTree(format!("internal node of degree {d}")));
                }
                _ => {}
            }
            for &(u, w) in &self.adj[v] {
                if u == v || !self.alive[u] {
                    return Err(Error::MalformedTree("dangling or looping edge".into()));
                }
                if !w.is_finite() || libm::fabs(w) > 1.0 + 1e-12 {
                    return Err(Error::MalformedTree(format!("edge weight {w} outside [-1, 1]")));
                }
            }
        }

        // Root at the smallest leaf; compute the minimum leaf label per subtree.
        let root = leaves[0].1;
        let mut parent = vec![NONE; self.adj.len()];
        let mut order = Vec::with_capacity(nodes.len());
        let mut seen = vec![false; self.adj.len()];
        seen[root] = true;
        let mut stack = vec![root];
        while let Some(v) = stack.pop() {
            order.push(v);
            for u in self.neighbors(v) {
                if !seen[u] {
                    seen[u] = true;
                    parent[u] = v;
                    stack.push(u);
                }
            }
        }
        if order.len() != nodes.len() {
            return Err(Error::MalformedTree("disconnected".into()));
        }
        let mut min_label = vec![usize::MAX; self.adj.len()];
        for &v in order.iter().rev() {
            if let Some(l) = self.label[v] {
                min_label[v] = min_label[v].min(l);
            }
            if parent[v] != NONE {
                let p = parent[v];
                min_label[p] = min_label[p].min(min_label[v]);
            }
        }

        let max_label = leaves.last().unwrap().0;
        let first_internal = max_label + 1;
        let mut new_id = vec![NONE; self.adj.len()];
        for &(l, v) in &leaves {
            new_id[v] = l;
        }
        let mut next = first_internal;
        let mut stack = vec![root];
        while let Some(v) = stack.pop() {
            if self.label[v].is_none() {
                new_id[v] = next;
                next += 1;
            }
            let mut kids: Vec<usize> = self.neighbors(v).filter(|&u| parent[u] == v).collect();
            kids.sort_unstable_by_key(|&u| core::cmp::Reverse(min_label[u]));
            stack.extend(kids);
        }

        let mut edges: Vec<(usize, usize, f64)> = Vec::with_capacity(edge_count);
        for &v in &nodes {
            for &(u, w) in &self.adj[v] {
                let (a, b) = (new_id[v], new_id[u]);
                if a < b {
                    edges.push((a, b, w.clamp(-1.0, 1.0)));
                }
            }
        }
        edges.sort_unstable_by(|x, y| (x.0, x.1).cmp(&(y.0, y.1)));
        let theta = edges.iter().map(|e| e.2).collect();
        let pairs: Vec<(usize, usize)> = edges.iter().map(|e| (e.0, e.1)).collect();
        let labels: Vec<usize> = leaves.iter().map(|x| x.0).collect();
        Ok((TreeTopology::from_canonical(labels, next, pairs), theta))
    }
}
