use alloc::collections::BTreeSet;
use alloc::format;

use super::{Graph, TreeTopology};
use crate::error::{Error, Result};

pub(crate) fn check_subset(tree: &TreeTopology, leaves: &[usize]) -> Result<BTreeSet<usize>> {
    let keep: BTreeSet<usize> = leaves.iter().copied().collect();
    if keep.len() < 2 {
        return Err(Error::TooFewLeaves(keep.len()));
    }
    if let Some(&l) = keep.iter().find(|&&l| !tree.is_leaf(l)) {
        return Err(Error::UnknownLeaf(l));
    }
    Ok(keep)
}

/// Detaches `u` (with everything on its side of edge `(u, v)`) and reattaches
/// it at a new node subdividing `target`, then contracts degree-two nodes.
/// `target` must lie on `v`'s side of `(u, v)`.
pub fn cut_paste(tree: &TreeTopology, u: usize, v: usize, target: (usize, usize)) -> Result<TreeTopology> {
    let (r, s) = target;
    if tree.edge_index(u, v).is_none() {
        return Err(Error::InvalidCut(format!("({u}, {v}) is not an edge")));
    }
    if tree.edge_index(r, s).is_none() {
        return Err(Error::InvalidCut(format!("target ({r}, {s}) is not an edge")));
    }
    if (r, s) == (u, v) || (r, s) == (v, u) {
        return Err(Error::InvalidCut("target is the cut edge".into()));
    }
    let mut g = Graph::from_tree(tree, None);
    let v_side = g.component_avoiding(v, u);
    if !v_side[r] || !v_side[s] {
        return Err(Error::InvalidCut(format!("target ({r}, {s}) lies on the side of {u}")));
    }
    g.remove_edge(u, v);
    g.remove_edge(r, s);
    let t = g.add_node(None);
    g.add_edge(t, u, 1.0);
    g.add_edge(t, r, 1.0);
    g.add_edge(t, s, 1.0);
    g.contract_degree_two();
    Ok(g.finish()?.0)
}

/// Minimal subtree spanning `leaves`, with degree-two nodes contracted.
pub fn induced_subtree(tree: &TreeTopology, leaves: &[usize]) -> Result<TreeTopology> {
    let keep = check_subset(tree, leaves)?;
    let mut g = Graph::from_tree(tree, None);
    g.prune_to(&keep);
    g.contract_degree_two();
    Ok(g.finish()?.0)
}
