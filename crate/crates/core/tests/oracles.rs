mod common;

use common::*;
use pmn_core::graph::SparseFeatures;
use pmn_core::losses::{potts_loss, CollapseScaling, LossKind, LossWeights, Objective};
use pmn_core::metrics::{modularity, nmi, pairwise_f1};
use pmn_core::model::{backward, forward, DropoutMask};
use pmn_core::{normalized_adjacency, Partition, SoftAssignment};
use rand::Rng;

fn flatten_grad(inst: &GradInstance, objective: &Objective) -> Vec<f64> {
    let abar = normalized_adjacency(&inst.graph);
    let x = SparseFeatures::from(&inst.features);
    let mask = inst
        .keep
        .clone()
        .map(|k| DropoutMask::from_keep(k, inst.keep_prob));
    let (c, cache) = forward(&abar, &x, &inst.params, mask.as_ref()).unwrap();
    let (_, upstream) = objective
        .evaluate_with_grad(&inst.graph, &c, inst.params.gamma)
        .unwrap();
    let g = backward(&cache, &upstream).unwrap();
    let mut out = Vec::new();
    out.extend_from_slice(g.w.as_slice());
    out.extend_from_slice(g.w_skip.as_slice());
    out.extend_from_slice(g.w_out.as_slice());
    out.push(upstream.gamma);
    out
}

fn objective(kind: LossKind) -> Objective {
    Objective {
        kind,
        weights: LossWeights::default(),
        gamma_max: 5.0,
        scaling: CollapseScaling::SqrtKOverN,
    }
}

#[test]
fn backward_matches_central_differences() {
    let mut r = rng(11);
    for kind in [LossKind::Potts, LossKind::Dmon, LossKind::MincutOrtho] {
        let obj = objective(kind);
        for _ in 0..20 {
            let inst = random_grad_instance(&mut r);
            let analytic = flatten_grad(&inst, &obj);
            let numeric = finite_difference(&inst, &obj, 1e-5);
            let err = max_relative_error(&analytic, &numeric, 1e-6);
            assert!(err <= 1e-4, "{kind:?}: relative error {err}");
        }
    }
}

#[test]
fn potts_matches_double_sum() {
    let mut r = rng(5);
    for _ in 0..100 {
        let n = r.random_range(2..=30);
        let k = r.random_range(1..=6);
        let (g, edges) = random_graph(&mut r, n, 0.2);
        let c = random_stochastic(&mut r, n, k);
        let gamma = r.random_range(0.0..5.0);
        let got = potts_loss(&g, &to_assignment(&c), gamma).unwrap();
        let want = potts_double_sum(&dense_adjacency(&edges, n), &c, gamma);
        assert!((got - want).abs() <= 1e-9, "{got} vs {want}");
    }
}

#[test]
fn modularity_matches_both_forms() {
    let mut r = rng(9);
    for _ in 0..100 {
        let n = r.random_range(2..=30);
        let (g, edges) = random_graph(&mut r, n, 0.25);
        let k = r.random_range(1..=n);
        let labels: Vec<usize> = (0..n).map(|_| r.random_range(0..k)).collect();
        let got = modularity(&g, &Partition::new(labels.clone())).unwrap();
        let dense = modularity_double_sum(&dense_adjacency(&edges, n), &labels);
        let tallies = modularity_tallies(&edges, n, &labels);
        assert!((got - 100.0 * dense).abs() <= 1e-9);
        assert!((got - 100.0 * tallies).abs() <= 1e-9);
    }
}

#[test]
fn nmi_and_f1_match_pair_counting_on_all_small_partitions() {
    for n in 1..=6 {
        let parts = all_partitions(n);
        for a in &parts {
            for b in &parts {
                let pa = Partition::new(a.clone());
                let pb = Partition::new(b.clone());
                let got = nmi(&pa, &pb).unwrap();
                assert!((got - nmi_oracle(a, b)).abs() <= 1e-9, "{a:?} {b:?}");
                let got = pairwise_f1(&pa, &pb).unwrap();
                assert!((got - f1_oracle(a, b)).abs() <= 1e-9, "{a:?} {b:?}");
            }
        }
    }
}

#[test]
fn hard_potts_is_negative_modularity() {
    let mut r = rng(21);
    for _ in 0..50 {
        let n = r.random_range(2..=25);
        let (g, _) = random_graph(&mut r, n, 0.3);
        let k = r.random_range(1..=5);
        let labels: Vec<usize> = (0..n).map(|_| r.random_range(0..k)).collect();
        let c = SoftAssignment::one_hot(&labels, k).unwrap();
        let q = modularity(&g, &Partition::new(labels)).unwrap();
        let p = potts_loss(&g, &c, 1.0).unwrap();
        assert!((p + q / 100.0).abs() <= 1e-9);
    }
}

#[test]
fn partition_enumeration_counts_are_bell_numbers() {
    let bell = [1, 1, 2, 5, 15, 52, 203, 877, 4140];
    for (n, &b) in bell.iter().enumerate().skip(1) {
        assert_eq!(all_partitions(n).len(), b);
    }
}
