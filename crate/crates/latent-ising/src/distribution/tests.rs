use alloc::vec;
use alloc::vec::Vec;

use proptest::prelude::*;
use rand::Rng;

use super::*;
use crate::random::{random_tree, random_weights, rng};
use crate::tree::tests::messy_tree;

/// Sums the full joint over every node spin. Exponential in the node count;
/// only for tiny trees.
fn brute_force(tree: &WeightedTree) -> Vec<f64> {
    let t = tree.topology();
    let nodes: Vec<usize> = t.nodes().collect();
    let n = t.leaf_count();
    let mut out = vec![0.0; 1 << n];
    for assign in 0u64..1 << nodes.len() {
        let spin = |v: usize| {
            let k = nodes.iter().position(|&x| x == v).unwrap();
            if assign >> k & 1 == 1 { -1.0 } else { 1.0 }
        };
        let mut p = 0.5;
        for (e, &(a, b)) in t.edges().iter().enumerate() {
            p *= 0.5 * (1.0 + tree.theta()[e] * spin(a) * spin(b));
        }
        let mask = (assign & ((1 << n) - 1)) as usize;
        out[mask] += p;
    }
    out
}

fn four_leaf() -> WeightedTree {
    WeightedTree::from_edges(&[1, 2, 3, 4], &[(1, 5, 0.5), (2, 5, 0.5), (5, 6, 0.8), (3, 6, 0.5), (4, 6, 0.5)])
        .unwrap()
}

fn plus(n: usize) -> LeafConfiguration {
    LeafConfiguration::from_mask(n, 0)
}

#[test]
fn two_leaf_probability() {
    let t = WeightedTree::from_edges(&[1, 2], &[(1, 2, 0.5)]).unwrap();
    let a = t.correlations();
    assert_eq!(closed_form_prob(t.topology(), &a, &plus(2)).unwrap(), 0.375);
    assert_eq!(marginalize_prob(&t, &plus(2)).unwrap(), 0.375);
}

#[test]
fn zero_correlations_give_uniform() {
    for n in 1..7 {
        let t = TreeTopology::caterpillar(n.max(2)).unwrap();
        let n = t.leaf_count();
        let a = CorrelationVector::zeros(n);
        for mask in 0..1 << n {
            let p = closed_form_prob(&t, &a, &LeafConfiguration::from_mask(n, mask)).unwrap();
            assert_eq!(p, 1.0 / (1 << n) as f64);
        }
    }
}

#[test]
fn four_leaf_all_plus() {
    let t = four_leaf();
    let oracle = brute_force(&t)[0];
    assert!((oracle - 0.14765625).abs() < 1e-15);
    let p = closed_form_prob(t.topology(), &t.correlations(), &plus(4)).unwrap();
    assert!((p - 0.14765625).abs() < 1e-15);
    assert!((marginalize_prob(&t, &plus(4)).unwrap() - 0.14765625).abs() < 1e-15);
}

#[test]
fn perfect_correlation_marginals() {
    let t = WeightedTree::uniform(TreeTopology::caterpillar(5).unwrap(), 1.0).unwrap();
    for mask in 0..32u64 {
        let p = marginalize_prob(&t, &LeafConfiguration::from_mask(5, mask)).unwrap();
        let expect = if mask == 0 || mask == 31 { 0.5 } else { 0.0 };
        assert_eq!(p, expect);
    }
}

#[test]
fn brute_force_agrees_on_small_trees() {
    for seed in 0..10 {
        let t = random_tree(5, -1.0, 1.0, &mut rng(seed)).unwrap();
        let b = brute_force(&t);
        let c = closed_form_distribution(t.topology(), &t.correlations()).unwrap();
        let m = marginal_distribution(&t).unwrap();
        for x in 0..32 {
            assert!((b[x] - c[x]).abs() < 1e-12);
            assert!((b[x] - m[x]).abs() < 1e-12);
        }
    }
}

#[test]
fn chain_contraction_keeps_distribution() {
    let chain = WeightedTree::from_edges(&[1, 2], &[(1, 10, 0.5), (10, 11, 0.5), (11, 2, 0.5)]).unwrap();
    let before = marginal_distribution(&chain).unwrap();
    let after = LeafDistribution::of_model(&chain.normalize()).unwrap();
    assert_eq!(half_l1(&before, after.probabilities()), 0.0);
}

#[test]
fn tv_examples() {
    let t = four_leaf();
    let a = t.correlations();
    assert_eq!(exact_tv((t.topology(), &a), (t.topology(), &a)).unwrap(), 0.0);

    let e = TreeTopology::from_edges(&[1, 2], &[(1, 2)]).unwrap();
    let x = CorrelationVector::from_values(2, vec![0.5]).unwrap();
    let y = CorrelationVector::from_values(2, vec![0.6]).unwrap();
    assert!((exact_tv((&e, &x), (&e, &y)).unwrap() - 0.05).abs() < 1e-15);

    let chain = WeightedTree::uniform(TreeTopology::caterpillar(3).unwrap(), 1.0).unwrap();
    let zero = CorrelationVector::zeros(3);
    let tv = exact_tv((chain.topology(), &chain.correlations()), (chain.topology(), &zero)).unwrap();
    assert!((tv - 0.75).abs() < 1e-15);
}

#[test]
fn tv_refuses_large_models() {
    let t = TreeTopology::caterpillar(15).unwrap();
    let a = CorrelationVector::zeros(15);
    assert_eq!(exact_tv((&t, &a), (&t, &a)), Err(Error::TooLarge { n: 15, max: 14 }));
}

#[test]
fn path_removed_examples() {
    let cat = WeightedTree::from_edges(&[1, 2, 3, 4], &[(1, 5, 0.9), (2, 5, 0.8), (5, 6, 0.7), (3, 6, 0.6), (4, 6, 0.5)])
        .unwrap();
    let a = cat.correlations();
    let g = path_removed(&a, cat.topology(), &[1, 2]).unwrap();
    assert_eq!(g.get(3, 4), a.get(3, 4));
    for (i, j) in [(1, 2), (1, 3), (1, 4), (2, 3), (2, 4)] {
        assert_eq!(g.get(i, j), 0.0);
    }

    // on a caterpillar, removing the far cherry only touches pairs with 5 or 6
    let t = random_weights(TreeTopology::caterpillar(6).unwrap(), 0.2, 0.9, &mut rng(1)).unwrap();
    let a = t.correlations();
    let g = path_removed(&a, t.topology(), &[5, 6]).unwrap();
    for (i, j, v) in g.pairs() {
        if j >= 5 {
            assert_eq!(v, 0.0);
        } else {
            assert_eq!(v, a.get(i, j));
        }
    }
    assert_eq!(path_removed(&a, t.topology(), &[1, 9]), Err(Error::UnknownLeaf(9)));
}

fn random_special_weight<R: Rng>(r: &mut R) -> f64 {
    match r.gen_range(0..8) {
        0 => 0.0,
        1 => 1.0,
        2 => -1.0,
        _ => r.gen_range(-1.0..=1.0),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn closed_form_matches_marginalization(seed in any::<u64>(), n in 2usize..=10) {
        let mut r = rng(seed);
        let top = crate::random::random_topology(n, &mut r).unwrap();
        let theta = top.edges().iter().map(|_| random_special_weight(&mut r)).collect();
        let t = WeightedTree::new(top, theta).unwrap();
        let c = closed_form_distribution(t.topology(), &t.correlations()).unwrap();
        let m = marginal_distribution(&t).unwrap();
        let worst = c.iter().zip(&m).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        prop_assert!(worst <= 1e-9);
        prop_assert!((c.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn messy_trees_marginalize_like_their_normal_form(seed in any::<u64>(), n in 2usize..=8) {
        let t = messy_tree(n, seed);
        let m = marginal_distribution(&t).unwrap();
        let c = LeafDistribution::of_model(&t.normalize()).unwrap();
        prop_assert!(half_l1(&m, c.probabilities()) <= 1e-9);
    }

    #[test]
    fn one_coordinate_identity(seed in any::<u64>(), n in 2usize..=8) {
        let mut r = rng(seed);
        let t = random_tree(n, -1.0, 1.0, &mut r).unwrap();
        let alpha = t.correlations();
        let i = r.gen_range(1..=n);
        let mut j = r.gen_range(1..=n - 1);
        if j >= i { j += 1; }
        let mut beta = alpha.clone();
        beta.set(i, j, r.gen_range(-1.0..=1.0));
        let gamma = path_removed(&alpha, t.topology(), &[i, j]).unwrap();
        let fa = closed_form_distribution(t.topology(), &alpha).unwrap();
        let fb = closed_form_distribution(t.topology(), &beta).unwrap();
        let fg = closed_form_distribution(t.topology(), &gamma).unwrap();
        for x in 0..fa.len() {
            let sign = if (x >> (i - 1) ^ x >> (j - 1)) & 1 == 1 { -1.0 } else { 1.0 };
            let rhs = sign * (alpha.get(i, j) - beta.get(i, j)) * fg[x];
            prop_assert!((fa[x] - fb[x] - rhs).abs() <= 1e-9);
        }
    }

    #[test]
    fn single_edge_change_moves_tv_by_half_delta(seed in any::<u64>(), n in 2usize..=9) {
        let mut r = rng(seed);
        let t = random_tree(n, -1.0, 1.0, &mut r).unwrap();
        let k = r.gen_range(0..t.theta().len());
        let w = r.gen_range(-1.0..=1.0);
        let u = t.with_weight(k, w).unwrap();
        let tv = model_tv(&t, &u).unwrap();
        prop_assert!(tv <= (w - t.theta()[k]).abs() / 2.0 + 1e-12);
    }

    #[test]
    fn contracting_unit_edge_is_exact(seed in any::<u64>(), n in 4usize..=9) {
        let mut r = rng(seed);
        let t = random_tree(n, -1.0, 1.0, &mut r).unwrap();
        let internal: Vec<usize> = (0..t.theta().len()).filter(|&k| {
            let (a, b) = t.topology().edges()[k];
            !t.topology().is_leaf(a) && !t.topology().is_leaf(b)
        }).collect();
        let k = internal[r.gen_range(0..internal.len())];
        let t = t.with_weight(k, 1.0).unwrap();
        let c = t.contract_edge(k).unwrap();
        let before = marginal_distribution(&t).unwrap();
        let after = marginal_distribution(&c).unwrap();
        for (x, y) in before.iter().zip(&after) {
            prop_assert!((x - y).abs() <= 1e-15);
        }
    }

    #[test]
    fn same_topology_tv_bound(seed in any::<u64>(), n in 2usize..=9, size in 1e-4f64..0.2) {
        let mut r = rng(seed);
        let t = random_tree(n, -1.0, 1.0, &mut r).unwrap();
        let theta: Vec<f64> = t.theta().iter().map(|w| (w + r.gen_range(-size..=size)).clamp(-1.0, 1.0)).collect();
        let u = WeightedTree::new(t.topology().clone(), theta).unwrap();
        let eps = t.correlations().max_abs_diff(&u.correlations()).unwrap();
        let tv = model_tv(&t, &u).unwrap();
        prop_assert!(tv <= 2.0 * (n * n) as f64 * eps + 1e-12);
    }
}
