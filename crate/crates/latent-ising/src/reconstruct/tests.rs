use alloc::vec::Vec;

use proptest::prelude::*;
use rand::Rng;

use super::*;
use crate::learn_known::fit_known;
use crate::random::{random_tree, random_weights, rng};

fn bounded_tree(n: usize, lo: f64, hi: f64, seed: u64) -> WeightedTree {
    let mut r = rng(seed);
    let t = random_tree(n, lo, hi, &mut r).unwrap();
    let w: Vec<f64> = t.theta().iter().map(|&x| if r.gen::<bool>() { x } else { -x }).collect();
    WeightedTree::new(t.into_topology(), w).unwrap()
}

#[test]
fn caterpillar_is_recovered_exactly() {
    let truth = random_weights(TreeTopology::caterpillar(6).unwrap(), 0.4, 0.6, &mut rng(1)).unwrap();
    let f = reconstruct_forest(&truth.correlations(), 0.05, 0.01, 0.0).unwrap();
    assert_eq!(f.components.len(), 1);
    assert_eq!(f.components[0], truth.topology().normalize());
}

#[test]
fn weak_bridge_splits_two_stars() {
    let truth = WeightedTree::from_edges(
        &[1, 2, 3, 4, 5, 6],
        &[(1, 7, 0.6), (2, 7, 0.55), (3, 7, 0.5), (4, 8, 0.6), (5, 8, 0.5), (6, 8, 0.58), (7, 8, 0.01)],
    )
    .unwrap();
    let f = reconstruct_forest(&truth.correlations(), 0.05, 0.25, 0.0).unwrap();
    assert_eq!(f.leaf_sets(), [[1, 2, 3], [4, 5, 6]]);
    let check = check_contract(&f, &truth, 4.0).unwrap();
    assert!(check.holds, "{check:?}");
    assert!(check.max_cross_correlation <= 0.01 * 0.36);
}

#[test]
fn near_unit_edge_may_be_contracted() {
    let truth = WeightedTree::from_edges(
        &[1, 2, 3, 4, 5],
        &[(1, 6, 0.7), (2, 6, 0.6), (6, 7, 0.999), (3, 7, 0.5), (7, 8, 0.6), (4, 8, 0.7), (5, 8, 0.65)],
    )
    .unwrap();
    let f = reconstruct_forest(&truth.correlations(), 0.05, 0.01, 0.0).unwrap();
    assert_eq!(f.components.len(), 1);
    let got = f.components[0].splits();
    assert!(!got.contains(&alloc::vec![3, 4, 5]));
    assert!(got.contains(&alloc::vec![4, 5]));
    let check = check_contract(&f, &truth, 4.0).unwrap();
    assert!(check.holds, "{check:?}");
    assert!((check.min_contracted_weight - 0.999).abs() < 1e-12);
}

#[test]
fn implied_weight_is_exact_on_tree_correlations() {
    let truth = bounded_tree(9, 0.2, 0.95, 5);
    let alpha = truth.correlations();
    let t = truth.topology();
    for (k, &(a, b)) in t.edges().iter().enumerate() {
        let w = implied_edge_weight(t, &alpha, k, 16);
        if t.is_leaf(a) || t.is_leaf(b) {
            assert_eq!(w, None);
        } else {
            assert!((w.unwrap() - truth.theta()[k].abs()).abs() < 1e-12);
        }
    }
}

#[test]
fn rejects_insufficient_slack() {
    let a = CorrelationVector::zeros(4);
    assert!(matches!(reconstruct_forest(&a, 0.01, 0.01, 1e-3), Err(Error::BadParameter(_))));
    assert!(matches!(reconstruct_forest(&a, 0.5, 1.5, 0.0), Err(Error::BadParameter(_))));
}

#[test]
fn independent_leaves_are_singletons() {
    let f = reconstruct_forest(&CorrelationVector::zeros(4), 0.1, 0.1, 0.001).unwrap();
    assert_eq!(f.leaf_sets(), [[1], [2], [3], [4]]);
}

#[test]
fn reconstruction_is_idempotent_on_fitted_output() {
    let truth = bounded_tree(8, 0.3, 0.8, 17);
    let f = reconstruct_forest(&truth.correlations(), 0.05, 0.01, 0.0).unwrap();
    let fit = fit_known(&f.components[0], &truth.correlations(), 1e-6).unwrap();
    let again = reconstruct_forest(&fit.tree.correlations(), 0.05, 0.01, 0.0).unwrap();
    assert_eq!(again.components, f.components);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn any_input_gives_a_partition(n in 1usize..12, seed in any::<u64>(), delta in 0.01f64..0.9) {
        let mut r = rng(seed);
        let a = CorrelationVector::from_fn(n, |_, _| r.gen_range(-1.0..=1.0));
        let f = reconstruct_forest(&a, 0.2, delta, 0.0).unwrap();
        let mut all: Vec<usize> = f.leaf_sets().concat();
        all.sort_unstable();
        prop_assert_eq!(all, (1..=n).collect::<Vec<_>>());
        for c in &f.components {
            prop_assert!(c.internal_nodes().all(|v| c.degree(v) >= 3));
        }
    }

    #[test]
    fn exact_bounded_trees_are_recovered(n in 2usize..11, seed in any::<u64>()) {
        let truth = bounded_tree(n, 0.3, 0.8, seed);
        let f = reconstruct_forest(&truth.correlations(), 0.05, 0.01, 0.0).unwrap();
        prop_assert_eq!(f.components.len(), 1);
        prop_assert_eq!(&f.components[0], truth.topology());
        prop_assert!(check_contract(&f, &truth, 4.0).unwrap().holds);
    }

    #[test]
    fn noisy_inputs_respect_the_contract(n in 4usize..9, seed in any::<u64>()) {
        let truth = random_tree(n, -1.0, 1.0, &mut rng(seed)).unwrap();
        let eta = 1e-3;
        let mut r = rng(!seed);
        let alpha = truth.correlations();
        let hat = CorrelationVector::from_fn(n, |i, j| alpha.get(i, j) + r.gen_range(-eta..=eta));
        let f = reconstruct_forest(&hat, 0.1, 0.01, eta).unwrap();
        let check = check_contract(&f, &truth, 4.0).unwrap();
        prop_assert!(check.partition && check.max_cross_correlation <= 4.0 * 0.1, "{:?}", check);
    }
}
