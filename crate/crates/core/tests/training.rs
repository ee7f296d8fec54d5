use pmn_core::generators::{ring_of_cliques, sbm};
use pmn_core::metrics::nmi;
use pmn_core::trainer::{run_seeds, train, LossKind, TrainConfig};
use pmn_core::FeatureMatrix;

fn small(loss: LossKind, epochs: usize) -> TrainConfig {
    TrainConfig {
        k: 4,
        hidden: 8,
        epochs,
        loss,
        ..Default::default()
    }
}

#[test]
fn runs_are_bitwise_deterministic() {
    let lg = ring_of_cliques(4, 4).unwrap();
    let x = FeatureMatrix::identity(16);
    for loss in [LossKind::Potts, LossKind::Dmon, LossKind::MincutOrtho] {
        let a = train(&lg.graph, &x, &small(loss, 30)).unwrap();
        let b = train(&lg.graph, &x, &small(loss, 30)).unwrap();
        assert_eq!(a, b);
    }
}

#[test]
fn different_seeds_differ() {
    let lg = ring_of_cliques(4, 4).unwrap();
    let x = FeatureMatrix::identity(16);
    let a = train(&lg.graph, &x, &small(LossKind::Potts, 5)).unwrap();
    let cfg = TrainConfig {
        seed: 1,
        ..small(LossKind::Potts, 5)
    };
    let b = train(&lg.graph, &x, &cfg).unwrap();
    assert_ne!(a.records, b.records);
}

#[test]
fn zero_epochs_gives_initial_record_only() {
    let lg = ring_of_cliques(3, 3).unwrap();
    let x = FeatureMatrix::identity(9);
    let t = train(&lg.graph, &x, &small(LossKind::Potts, 0)).unwrap();
    assert_eq!(t.records.len(), 1);
    assert_eq!(t.records[0].epoch, 0);
    assert_eq!(t.records[0].gamma, 1.0);
}

#[test]
fn record_count_and_gamma_bounds() {
    let lg = ring_of_cliques(5, 4).unwrap();
    let x = FeatureMatrix::identity(20);
    let cfg = TrainConfig {
        gamma_max: 1.5,
        learning_rate: 0.05,
        ..small(LossKind::Potts, 60)
    };
    let t = train(&lg.graph, &x, &cfg).unwrap();
    assert_eq!(t.records.len(), 61);
    for (i, r) in t.records.iter().enumerate() {
        assert_eq!(r.epoch, i);
        assert!((0.0..=1.5).contains(&r.gamma));
        assert!(r.loss.is_finite());
        let w = r.loss.weights;
        let sum =
            w.potts * r.loss.potts + w.collapse * r.loss.collapse + w.gamma * r.loss.gamma_reg;
        assert!((r.loss.total - sum).abs() <= 1e-12);
    }
}

#[test]
fn dmon_keeps_gamma_at_one() {
    let lg = ring_of_cliques(4, 4).unwrap();
    let x = FeatureMatrix::identity(16);
    let cfg = TrainConfig {
        learning_rate: 0.05,
        ..small(LossKind::Dmon, 40)
    };
    let t = train(&lg.graph, &x, &cfg).unwrap();
    assert!(t.gammas().all(|g| g == 1.0));
    let no_gamma_term =
        |r: &pmn_core::trainer::EpochRecord| r.loss.weights.gamma * r.loss.gamma_reg == 0.0;
    assert!(t.records.iter().all(no_gamma_term));
}

#[test]
fn two_cliques_recovered_with_two_clusters() {
    let lg = sbm(&[4, 4], 1.0, 0.0, 0).unwrap();
    let x = FeatureMatrix::identity(8);
    let cfg = TrainConfig {
        k: 2,
        epochs: 500,
        ..Default::default()
    };
    let summary = run_seeds(&lg.graph, &x, &cfg, 10, Some(&lg.labels)).unwrap();
    let perfect = summary
        .runs
        .iter()
        .filter(|r| r.metrics.nmi == Some(100.0))
        .count();
    assert!(perfect >= 8, "{perfect} of 10 seeds recovered the blocks");
    let t = train(&lg.graph, &x, &cfg).unwrap();
    assert_eq!(nmi(&lg.labels, &t.partition()).unwrap(), 100.0);
}
