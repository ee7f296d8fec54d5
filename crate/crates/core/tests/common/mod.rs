//! Reference implementations used as test oracles. Nothing here calls into
//! the library's loss or metric code; everything is recomputed from dense
//! matrices, double sums and pair counting.

#![allow(dead_code)]

use std::collections::HashMap;

use pmn_core::graph::SparseFeatures;
use pmn_core::losses::Objective;
use pmn_core::model::{forward, DropoutMask};
use pmn_core::{normalized_adjacency, FeatureMatrix, Graph, Matrix, ModelParams, SoftAssignment};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Erdős–Rényi edge list on `n` nodes with at least one edge.
pub fn random_edges(rng: &mut impl Rng, n: usize, p: f64) -> Vec<(usize, usize)> {
    assert!(n >= 2);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.random::<f64>() < p {
                edges.push((u, v));
            }
        }
    }
    if edges.is_empty() {
        let u = rng.random_range(0..n - 1);
        edges.push((u, u + 1));
    }
    edges
}

pub fn random_graph(rng: &mut impl Rng, n: usize, p: f64) -> (Graph, Vec<(usize, usize)>) {
    let edges = random_edges(rng, n, p);
    (Graph::from_edge_list(&edges, n).unwrap(), edges)
}

pub fn dense_adjacency(edges: &[(usize, usize)], n: usize) -> Vec<Vec<f64>> {
    let mut a = vec![vec![0.0; n]; n];
    for &(u, v) in edges {
        if u != v {
            a[u][v] = 1.0;
            a[v][u] = 1.0;
        }
    }
    a
}

/// Rows drawn from a softmax of Gaussian-ish logits, so every entry is
/// strictly positive.
pub fn random_stochastic(rng: &mut impl Rng, n: usize, k: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| {
            let logits: Vec<f64> = (0..k).map(|_| rng.random_range(-3.0..3.0)).collect();
            let z: f64 = logits.iter().map(|x| x.exp()).sum();
            logits.iter().map(|x| x.exp() / z).collect()
        })
        .collect()
}

pub fn to_assignment(c: &[Vec<f64>]) -> SoftAssignment {
    SoftAssignment::new(Matrix::from_rows(c).unwrap()).unwrap()
}

/// `−(1/2m) Σ_{i,j} (A_ij − γ d_i d_j / 2m) (C Cᵀ)_ij`, diagonal included.
pub fn potts_double_sum(a: &[Vec<f64>], c: &[Vec<f64>], gamma: f64) -> f64 {
    let n = a.len();
    let d: Vec<f64> = a.iter().map(|r| r.iter().sum()).collect();
    let two_m: f64 = d.iter().sum();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            let cc: f64 = c[i].iter().zip(&c[j]).map(|(x, y)| x * y).sum();
            s += (a[i][j] - gamma * d[i] * d[j] / two_m) * cc;
        }
    }
    -s / two_m
}

/// `Σ_ij (A_ij − d_i d_j/2m) [σ_i = σ_j] / 2m`, unscaled.
pub fn modularity_double_sum(a: &[Vec<f64>], labels: &[usize]) -> f64 {
    let n = a.len();
    let d: Vec<f64> = a.iter().map(|r| r.iter().sum()).collect();
    let two_m: f64 = d.iter().sum();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if labels[i] == labels[j] {
                s += a[i][j] - d[i] * d[j] / two_m;
            }
        }
    }
    s / two_m
}

/// `Σ_c (e_c/m − (k_c/2m)²)` from an explicit edge list, unscaled.
pub fn modularity_tallies(edges: &[(usize, usize)], n: usize, labels: &[usize]) -> f64 {
    let m = edges.len() as f64;
    let mut internal: HashMap<usize, f64> = HashMap::new();
    let mut volume: HashMap<usize, f64> = HashMap::new();
    let mut deg = vec![0.0; n];
    for &(u, v) in edges {
        deg[u] += 1.0;
        deg[v] += 1.0;
        if labels[u] == labels[v] {
            *internal.entry(labels[u]).or_default() += 1.0;
        }
    }
    for (u, &l) in labels.iter().enumerate() {
        *volume.entry(l).or_default() += deg[u];
    }
    volume
        .iter()
        .map(|(l, &vol)| internal.get(l).copied().unwrap_or(0.0) / m - (vol / (2.0 * m)).powi(2))
        .sum()
}

fn entropy_of(counts: impl Iterator<Item = usize>, n: f64) -> f64 {
    counts
        .filter(|&c| c > 0)
        .map(|c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum()
}

/// `100 · 2 I(a;b) / (H(a) + H(b))` via `I = H(a) + H(b) − H(a,b)`.
pub fn nmi_oracle(a: &[usize], b: &[usize]) -> f64 {
    let n = a.len() as f64;
    let mut ca: HashMap<usize, usize> = HashMap::new();
    let mut cb: HashMap<usize, usize> = HashMap::new();
    let mut cab: HashMap<(usize, usize), usize> = HashMap::new();
    for (&x, &y) in a.iter().zip(b) {
        *ca.entry(x).or_default() += 1;
        *cb.entry(y).or_default() += 1;
        *cab.entry((x, y)).or_default() += 1;
    }
    let ha = entropy_of(ca.values().copied(), n);
    let hb = entropy_of(cb.values().copied(), n);
    if ca.len() == 1 && cb.len() == 1 {
        return 100.0;
    }
    let hab = entropy_of(cab.values().copied(), n);
    let denom = ha + hb;
    if denom <= 0.0 {
        return 0.0;
    }
    (100.0 * 2.0 * (ha + hb - hab) / denom).clamp(0.0, 100.0)
}

/// Pair-counting F1 over every unordered pair `i < j`, times 100.
pub fn f1_oracle(truth: &[usize], pred: &[usize]) -> f64 {
    let (mut tp, mut fp, mut fneg) = (0u64, 0u64, 0u64);
    for i in 0..truth.len() {
        for j in i + 1..truth.len() {
            match (truth[i] == truth[j], pred[i] == pred[j]) {
                (true, true) => tp += 1,
                (false, true) => fp += 1,
                (true, false) => fneg += 1,
                (false, false) => {}
            }
        }
    }
    let p = if tp + fp == 0 {
        0.0
    } else {
        tp as f64 / (tp + fp) as f64
    };
    let r = if tp + fneg == 0 {
        0.0
    } else {
        tp as f64 / (tp + fneg) as f64
    };
    if p + r == 0.0 {
        0.0
    } else {
        100.0 * 2.0 * p * r / (p + r)
    }
}

/// Every set partition of `0..n` as a restricted growth string.
pub fn all_partitions(n: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, max: usize, n: usize, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == n {
            out.push(prefix.clone());
            return;
        }
        let next = if prefix.is_empty() { 0 } else { max + 1 };
        for l in 0..=next {
            prefix.push(l);
            rec(prefix, max.max(l), n, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::with_capacity(n), 0, n, &mut out);
    out
}

/// One random gradient-check instance: graph, features, parameters and an
/// optional dropout mask.
pub struct GradInstance {
    pub graph: Graph,
    pub features: FeatureMatrix,
    pub params: ModelParams,
    pub keep: Option<Vec<bool>>,
    pub keep_prob: f64,
}

pub fn random_grad_instance(rng: &mut impl Rng) -> GradInstance {
    let n = rng.random_range(2..=10);
    let l = rng.random_range(1..=5);
    let h = rng.random_range(2..=6);
    let k = rng.random_range(2..=4);
    let (graph, _) = random_graph(rng, n, 0.4);
    let mut x = Matrix::zeros(n, l);
    for v in x.as_mut_slice() {
        if rng.random::<f64>() < 0.6 {
            *v = rng.random_range(-1.0..1.0);
        }
    }
    let features = FeatureMatrix::new(x).unwrap();
    let mut fill = |r, c| {
        let mut m = Matrix::zeros(r, c);
        for v in m.as_mut_slice() {
            *v = rng.random_range(-1.0..1.0);
        }
        m
    };
    let (w, w_skip, w_out) = (fill(l, h), fill(l, h), fill(h, k));
    let params = ModelParams {
        w,
        w_skip,
        w_out,
        gamma: rng.random_range(0.1..4.9),
    };
    let nnz = SparseFeatures::from(&features).nnz();
    let (keep, keep_prob) = if rng.random::<bool>() {
        (
            Some((0..nnz).map(|_| rng.random::<f64>() < 0.7).collect()),
            0.7,
        )
    } else {
        (None, 1.0)
    };
    GradInstance {
        graph,
        features,
        params,
        keep,
        keep_prob,
    }
}

/// Full objective as a function of the parameters, through forward only.
pub fn loss_at(inst: &GradInstance, objective: &Objective, params: &ModelParams) -> f64 {
    let abar = normalized_adjacency(&inst.graph);
    let x = SparseFeatures::from(&inst.features);
    let mask = inst
        .keep
        .clone()
        .map(|k| DropoutMask::from_keep(k, inst.keep_prob));
    let (c, _) = forward(&abar, &x, params, mask.as_ref()).unwrap();
    objective
        .evaluate(&inst.graph, &c, params.gamma)
        .unwrap()
        .total
}

/// Central-difference gradient of [`loss_at`] in the order
/// `w, w_skip, w_out, gamma`.
pub fn finite_difference(inst: &GradInstance, objective: &Objective, h: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let base = inst.params.clone();
    for which in 0..3 {
        let len = match which {
            0 => base.w.as_slice().len(),
            1 => base.w_skip.as_slice().len(),
            _ => base.w_out.as_slice().len(),
        };
        for i in 0..len {
            let bump = |delta: f64| {
                let mut p = base.clone();
                let m = match which {
                    0 => &mut p.w,
                    1 => &mut p.w_skip,
                    _ => &mut p.w_out,
                };
                m.as_mut_slice()[i] += delta;
                loss_at(inst, objective, &p)
            };
            out.push((bump(h) - bump(-h)) / (2.0 * h));
        }
    }
    let bump_gamma = |delta: f64| {
        let mut p = base.clone();
        p.gamma += delta;
        loss_at(inst, objective, &p)
    };
    out.push((bump_gamma(h) - bump_gamma(-h)) / (2.0 * h));
    out
}

/// `max_i |a_i − b_i| / max(|a_i|, |b_i|, floor)`.
pub fn max_relative_error(a: &[f64], b: &[f64], floor: f64) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs() / x.abs().max(y.abs()).max(floor))
        .fold(0.0, f64::max)
}
