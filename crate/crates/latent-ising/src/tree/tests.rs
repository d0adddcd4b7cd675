use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use proptest::prelude::*;
use rand::Rng;

use super::*;
use crate::random::{random_tree, rng};

fn four_leaf(leaf: f64, middle: f64) -> WeightedTree {
    WeightedTree::from_edges(
        &[1, 2, 3, 4],
        &[(1, 5, leaf), (2, 5, leaf), (5, 6, middle), (3, 6, leaf), (4, 6, leaf)],
    )
    .unwrap()
}

fn split(v: &[usize]) -> Split {
    v.to_vec()
}

/// Random tree with some internal edges contracted (degree > 3) and some
/// edges subdivided (degree 2), keeping the leaf distribution meaningful.
pub(crate) fn messy_tree(n: usize, seed: u64) -> WeightedTree {
    let mut r = rng(seed);
    let mut t = random_tree(n, -1.0, 1.0, &mut r).unwrap();
    loop {
        let internal: Vec<usize> = (0..t.topology().edges().len())
            .filter(|&k| {
                let (a, b) = t.topology().edges()[k];
                !t.topology().is_leaf(a) && !t.topology().is_leaf(b)
            })
            .collect();
        if internal.is_empty() || r.gen::<f64>() < 0.6 {
            break;
        }
        let k = internal[r.gen_range(0..internal.len())];
        t = t.with_weight(k, 1.0).unwrap().contract_edge(k).unwrap();
    }
    let top = t.topology();
    let mut next = top.id_bound();
    let mut edges = Vec::new();
    for (k, &(a, b)) in top.edges().iter().enumerate() {
        let w = t.theta()[k];
        if r.gen::<f64>() < 0.3 {
            let root = libm::sqrt(libm::fabs(w));
            edges.push((a, next, if w < 0.0 { -root } else { root }));
            edges.push((next, b, root));
            next += 1;
        } else {
            edges.push((a, b, w));
        }
    }
    WeightedTree::from_edges(top.leaves(), &edges).unwrap()
}

#[test]
fn canonical_numbering_ignores_input_ids() {
    let a = TreeTopology::from_edges(&[1, 2, 3, 4], &[(1, 50), (2, 50), (50, 60), (3, 60), (4, 60)]).unwrap();
    let b = TreeTopology::from_edges(&[1, 2, 3, 4], &[(4, 9), (3, 9), (9, 7), (7, 2), (1, 7)]).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.internal_nodes(), 5..7);
    assert_eq!(a.edges(), &[(1, 5), (2, 5), (3, 6), (4, 6), (5, 6)]);
}

#[test]
fn malformed_trees_are_rejected() {
    let cyc = TreeTopology::from_edges(&[1, 2], &[(1, 5), (2, 5), (5, 6), (6, 7), (7, 5)]);
    assert!(matches!(cyc, Err(Error::MalformedTree(_))));
    let split = TreeTopology::from_edges(&[1, 2, 3, 4], &[(1, 2), (3, 4)]);
    assert!(matches!(split, Err(Error::MalformedTree(_))));
    let fat_leaf = TreeTopology::from_edges(&[1, 2, 3], &[(1, 2), (1, 3)]);
    assert!(matches!(fat_leaf, Err(Error::MalformedTree(_))));
}

#[test]
fn normalize_keeps_binary_tree() {
    let t = four_leaf(0.5, 0.8);
    assert_eq!(t.normalize(), t);
}

#[test]
fn normalize_contracts_chain_to_product() {
    let t = WeightedTree::from_edges(&[1, 2], &[(1, 10, 0.5), (10, 11, 0.5), (11, 2, 0.5)]).unwrap();
    let n = t.normalize();
    assert_eq!(n.topology().edges(), &[(1, 2)]);
    assert!((n.theta()[0] - 0.125).abs() < 1e-15);
}

#[test]
fn normalize_splits_degree_four_star() {
    let t = WeightedTree::uniform(TreeTopology::star(4).unwrap(), 0.5).unwrap();
    let n = t.normalize();
    assert!(n.topology().is_binary());
    assert_eq!(n.topology().internal_nodes().len(), 2);
    let (a, b) = (n.topology().internal_nodes().start, n.topology().internal_nodes().start + 1);
    assert_eq!(n.weight(a, b), Some(1.0));
    assert_eq!(n.correlations(), t.correlations());
}

#[test]
fn path_examples() {
    let star = TreeTopology::star(3).unwrap();
    assert_eq!(star.path(1, 2).unwrap(), vec![(1, 4), (4, 2)]);
    let cat = TreeTopology::caterpillar(4).unwrap();
    let (u, v) = (5, 6);
    assert!(cat.neighbors(1).eq([u]));
    assert_eq!(cat.path(1, 3).unwrap(), vec![(1, u), (u, v), (v, 3)]);
    assert_eq!(cat.path(2, 2), Err(Error::UnknownPair(2, 2)));
    assert_eq!(cat.path(1, 9), Err(Error::UnknownLeaf(9)));
    assert_eq!(cat.path(1, 5), Err(Error::UnknownLeaf(5)));
}

#[test]
fn star_correlations() {
    let t = WeightedTree::from_edges(&[1, 2, 3], &[(1, 4, 0.5), (2, 4, 0.5), (3, 4, 1.0)]).unwrap();
    let a = t.correlations();
    assert_eq!((a.get(1, 2), a.get(1, 3), a.get(2, 3)), (0.25, 0.5, 0.5));
    let t = WeightedTree::from_edges(&[1, 2, 3], &[(1, 4, -0.5), (2, 4, 0.5), (3, 4, 1.0)]).unwrap();
    let a = t.correlations();
    assert_eq!((a.get(1, 2), a.get(1, 3), a.get(2, 3)), (-0.25, -0.5, 0.5));
}

#[test]
fn quartet_split_examples() {
    let q = quartet_split(&four_leaf(0.5, 0.8).correlations(), [3, 1, 4, 2]).unwrap();
    assert_eq!(q.quartet, [1, 2, 3, 4]);
    assert_eq!(q.split, Pairing::AbCd);
    // 0.0625 against 0.25 * 0.8^2 * 0.25
    assert!((q.gap - (0.0625 - 0.04)).abs() < 1e-15);

    let q = quartet_split(&four_leaf(0.5, 1.0).correlations(), [1, 2, 3, 4]).unwrap();
    assert_eq!((q.split, q.gap), (Pairing::AbCd, 0.0));

    // exact tie between the last two pairings goes to the earlier one
    let a = CorrelationVector::from_fn(4, |i, j| if (i, j) == (1, 2) || (i, j) == (3, 4) { 0.1 } else { 0.5 });
    assert_eq!(quartet_split(&a, [1, 2, 3, 4]).unwrap().split, Pairing::AcBd);

    assert_eq!(quartet_split(&a, [1, 2, 3, 7]), Err(Error::UnknownLeaf(7)));
}

#[test]
fn gap_moves_by_up_to_four_eps() {
    // Every entry moves by at most eps, yet the gap moves by nearly 4 eps,
    // so a 2 eps bound on the gap change does not hold.
    let eps = 0.01;
    let alpha = CorrelationVector::from_fn(4, |_, _| 1.0 - eps);
    let hat = CorrelationVector::from_fn(4, |i, j| match (i, j) {
        (1, 2) | (3, 4) => 1.0,
        (1, 3) | (2, 4) => 1.0 - 2.0 * eps,
        _ => 1.0 - eps,
    });
    assert!(alpha.max_abs_diff(&hat).unwrap() <= eps + 1e-15);
    let g0 = quartet_split(&alpha, [1, 2, 3, 4]).unwrap().gap;
    let g1 = quartet_split(&hat, [1, 2, 3, 4]).unwrap().gap;
    let change = (g1 - g0).abs();
    assert!(change > 2.0 * eps);
    assert!(change <= 4.0 * eps);
}

#[test]
fn cut_paste_on_caterpillar() {
    let cat = TreeTopology::caterpillar(4).unwrap();
    let (u, v) = (5, 6);
    let out = cut_paste(&cat, 1, u, (v, 4)).unwrap();
    assert_eq!(out.quartet_topology([1, 2, 3, 4]).unwrap(), Some(Pairing::AdBc));
    assert_eq!(out.node_count(), cat.node_count());
    assert!(matches!(cut_paste(&cat, u, v, (1, u)), Err(Error::InvalidCut(_))));
    assert!(matches!(cut_paste(&cat, 1, 3, (v, 4)), Err(Error::InvalidCut(_))));
}

#[test]
fn cut_paste_moves_subtree_onto_far_edge() {
    // v holds leaf 1 and subtree u = {2,3}; r holds leaf 4; s leads to {5,6}.
    let (v, u, r, s, w) = (10, 11, 12, 13, 14);
    let t = TreeTopology::from_edges(
        &[1, 2, 3, 4, 5, 6],
        &[(v, u), (v, r), (v, 1), (u, 2), (u, 3), (r, 4), (r, s), (s, w), (w, 5), (w, 6)],
    )
    .unwrap();
    let find = |x: &[usize]| {
        // internal node ids are renumbered, so locate them by their leaves
        t.internal_nodes().find(|&c| {
            let mut got: Vec<usize> = t.neighbors(c).filter(|l| t.is_leaf(*l)).collect();
            got.sort_unstable();
            got == x
        })
    };
    let (cv, cu, cr) = (find(&[1]).unwrap(), find(&[2, 3]).unwrap(), find(&[4]).unwrap());
    let cs = t.neighbors(cr).find(|&x| x != cv && !t.is_leaf(x)).unwrap();
    let out = cut_paste(&t, cu, cv, (cr, cs)).unwrap();
    let expected: BTreeSet<Split> = [split(&[2, 3]), split(&[5, 6]), split(&[2, 3, 5, 6])].into();
    assert_eq!(out.splits(), expected);
    assert!(out.is_binary());
}

#[test]
fn induced_subtree_examples() {
    // (1,2) and (3,4) under one side of the anchor, ((5,6),(7,8)) under the other
    let t = TreeTopology::from_edges(
        &[1, 2, 3, 4, 5, 6, 7, 8],
        &[
            (20, 21), (21, 1), (21, 2), (20, 22), (22, 3), (22, 4), (20, 23),
            (23, 24), (24, 5), (24, 6), (23, 25), (25, 7), (25, 8),
        ],
    )
    .unwrap();
    let a = induced_subtree(&t, &[1, 2, 3, 5]).unwrap();
    assert_eq!(a.leaves(), &[1, 2, 3, 5]);
    assert_eq!(a.splits(), [split(&[3, 5])].into());
    assert!(a.is_binary());
    let b = induced_subtree(&t, &[4, 6, 7, 8]).unwrap();
    assert_eq!(b.splits(), [split(&[7, 8])].into());

    assert_eq!(induced_subtree(&t, &[1, 2, 3, 4, 5, 6, 7, 8]).unwrap(), t.normalize());
    let pair = induced_subtree(&t, &[3, 7]).unwrap();
    assert_eq!(pair.edges(), &[(3, 7)]);
    assert_eq!(induced_subtree(&t, &[3]), Err(Error::TooFewLeaves(1)));
}

#[test]
fn matching_examples() {
    // i = 6 and j = 7 on a path whose first node holds (1,2) and whose
    // second holds 3 and (4,5)
    let t = TreeTopology::from_edges(
        &[1, 2, 3, 4, 5, 6, 7],
        &[(6, 10), (10, 11), (11, 1), (11, 2), (10, 12), (12, 7), (12, 13), (13, 3), (13, 14), (14, 4), (14, 5)],
    )
    .unwrap();
    assert_eq!(closest_relative_matching(&t, &[6, 7, 1, 2, 3, 4]).unwrap(), vec![(1, 2), (3, 4), (6, 7)]);
    assert_eq!(closest_relative_matching(&t, &[6, 1, 3, 7]).unwrap(), vec![(1, 6), (3, 7)]);
    assert_eq!(closest_relative_matching(&t, &[2, 5]).unwrap(), vec![(2, 5)]);
    assert_eq!(closest_relative_matching(&t, &[2, 5, 1]), Err(Error::OddSubset(3)));
}

#[test]
fn splits_and_quartets_agree() {
    for seed in 0..20 {
        let t = random_tree(7, 0.1, 0.9, &mut rng(seed)).unwrap();
        let top = t.topology();
        let alpha = t.correlations();
        for (q, p) in top.quartet_topologies() {
            assert_eq!(Some(quartet_split(&alpha, q).unwrap().split), p);
            assert_eq!(top.quartet_topology(q).unwrap(), p);
        }
        assert_eq!(top.splits().len(), 7 - 3);
    }
}

#[test]
fn diameter_of_caterpillar() {
    assert_eq!(TreeTopology::caterpillar(6).unwrap().diameter(), 5);
    assert_eq!(TreeTopology::star(5).unwrap().diameter(), 2);
}

#[test]
fn contract_edge_merges_endpoints() {
    let t = four_leaf(0.5, 1.0);
    let k = t.topology().edge_index(5, 6).unwrap();
    let c = t.contract_edge(k).unwrap();
    assert_eq!(c.topology(), &TreeTopology::star(4).unwrap());
    assert_eq!(c.correlations(), t.correlations());
}

fn edge_sets(t: &TreeTopology, pairs: &[(usize, usize)]) -> Vec<BTreeSet<usize>> {
    pairs.iter().map(|&(a, b)| t.path_edge_indices(a, b).unwrap().into_iter().collect()).collect()
}

proptest! {
    #[test]
    fn normalize_is_idempotent(seed in any::<u64>(), n in 2usize..10) {
        let t = messy_tree(n, seed);
        let once = t.normalize();
        prop_assert!(once.topology().is_binary());
        prop_assert_eq!(once.normalize(), once);
    }

    #[test]
    fn normalize_preserves_correlations(seed in any::<u64>(), n in 2usize..10) {
        let t = messy_tree(n, seed);
        let d = t.correlations().max_abs_diff(&t.normalize().correlations()).unwrap();
        prop_assert!(d <= 1e-12);
    }

    #[test]
    fn matching_paths_are_edge_disjoint(seed in any::<u64>(), n in 2usize..12, mask in any::<u64>()) {
        let t = random_tree(n, 0.0, 1.0, &mut rng(seed)).unwrap().into_topology();
        let mut s: Vec<usize> = (1..=n).filter(|l| mask >> l & 1 == 1).collect();
        if s.len() % 2 == 1 { s.pop(); }
        let m = closest_relative_matching(&t, &s).unwrap();
        prop_assert_eq!(m.len() * 2, s.len());
        let covered: BTreeSet<usize> = m.iter().flat_map(|&(a, b)| [a, b]).collect();
        prop_assert_eq!(covered, s.iter().copied().collect::<BTreeSet<_>>());
        let sets = edge_sets(&t, &m);
        for x in 0..sets.len() {
            for y in x + 1..sets.len() {
                prop_assert!(sets[x].is_disjoint(&sets[y]));
            }
        }
    }

    #[test]
    fn induced_quartet_products_have_equal_minor_pair(seed in any::<u64>(), n in 4usize..10) {
        let t = random_tree(n, -1.0, 1.0, &mut rng(seed)).unwrap();
        let alpha = t.correlations();
        for (q, _) in t.topology().quartet_topologies() {
            let mut p = quartet::cross_products(&alpha, q);
            p.sort_by(f64::total_cmp);
            prop_assert!(p[1] - p[0] <= 1e-12);
        }
    }

    #[test]
    fn cut_paste_preserves_nodes_and_leaves(seed in any::<u64>(), n in 4usize..12) {
        let mut r = rng(seed);
        let t = random_tree(n, 0.0, 1.0, &mut r).unwrap().into_topology();
        let (u, v) = t.edges()[r.gen_range(0..t.edges().len())];
        let (u, v) = if r.gen() { (u, v) } else { (v, u) };
        let g = Graph::from_tree(&t, None);
        let side = g.component_avoiding(v, u);
        let targets: Vec<(usize, usize)> = t.edges().iter().copied()
            .filter(|&(a, b)| side[a] && side[b]).collect();
        prop_assume!(!targets.is_empty());
        let target = targets[r.gen_range(0..targets.len())];
        let out = cut_paste(&t, u, v, target).unwrap();
        prop_assert_eq!(out.node_count(), t.node_count());
        prop_assert_eq!(out.leaves(), t.leaves());
        prop_assert!(out.is_binary());
    }
}
