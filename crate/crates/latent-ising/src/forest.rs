//! Forests of independent tree components.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::correlation::CorrelationVector;
use crate::error::{Error, Result};
use crate::tree::{Graph, WeightedTree};

/// Mutually independent weighted trees whose leaf sets partition `1..=n`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedForest {
    n: usize,
    components: Vec<WeightedTree>,
}

impl WeightedForest {
    pub fn new(mut components: Vec<WeightedTree>) -> Result<Self> {
        let n: usize = components.iter().map(|c| c.leaf_count()).sum();
        let mut seen = vec![false; n + 1];
        for c in &components {
            for &l in c.topology().leaves() {
                if l > n || seen[l] {
                    return Err(Error::MalformedTree(format!("leaf {l} repeated or out of range 1..={n}")));
                }
                seen[l] = true;
            }
        }
        if n == 0 {
            return Err(Error::TooFewLeaves(0));
        }
        components.sort_by_key(|c| c.topology().leaves()[0]);
        Ok(WeightedForest { n, components })
    }

    pub fn from_tree(tree: WeightedTree) -> Result<Self> {
        Self::new(vec![tree])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Sorted by smallest leaf.
    pub fn components(&self) -> &[WeightedTree] {
        &self.components
    }

    /// Within-component path products; zero across components.
    pub fn correlations(&self) -> CorrelationVector {
        let mut alpha = CorrelationVector::zeros(self.n);
        for c in &self.components {
            let a = c.correlations();
            let leaves = c.topology().leaves();
            for (x, &i) in leaves.iter().enumerate() {
                for &j in &leaves[x + 1..] {
                    alpha.set(i, j, a.get(i, j));
                }
            }
        }
        alpha
    }

    /// Largest component diameter in edges, at least 1.
    pub fn diameter(&self) -> usize {
        self.components.iter().map(|c| c.topology().diameter()).max().unwrap_or(0).max(1)
    }

    /// One tree with the same leaf distribution: components are linked
    /// through weight-zero edges, which makes them independent.
    pub fn joined(&self) -> WeightedTree {
        if self.components.len() == 1 {
            return self.components[0].clone();
        }
        let mut g = Graph::new();
        let hub = g.add_node(None);
        for c in &self.components {
            let t = c.topology();
            let mut id = vec![usize::MAX; t.id_bound()];
            for v in t.nodes() {
                id[v] = g.add_node(if t.is_leaf(v) { Some(v) } else { None });
            }
            if t.edges().is_empty() {
                g.add_edge(hub, id[t.leaves()[0]], 0.0);
                continue;
            }
            for (k, &(a, b)) in t.edges().iter().enumerate() {
                if k == 0 {
                    let mid = g.add_node(None);
                    g.add_edge(id[a], mid, c.theta()[0]);
                    g.add_edge(mid, id[b], 1.0);
                    g.add_edge(hub, mid, 0.0);
                } else {
                    g.add_edge(id[a], id[b], c.theta()[k]);
                }
            }
        }
        g.split_high_degree();
        g.contract_degree_two();
        WeightedTree::from_graph(&g).expect("joining valid components")
    }
}
