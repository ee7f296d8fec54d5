//! Partition quality scores, all reported on a 0–100 scale.
//!
//! | metric      | source       | better |
//! |-------------|--------------|--------|
//! | conductance | graph        | lower  |
//! | modularity  | graph        | higher |
//! | nmi         | ground truth | higher |
//! | f1          | ground truth | higher |

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::model::SoftAssignment;

/// Hard cluster label per node. Labels need not be contiguous.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Partition(Vec<usize>);

impl Partition {
    pub fn new(labels: Vec<usize>) -> Self {
        Self(labels)
    }

    pub fn labels(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Number of distinct labels.
    pub fn num_clusters(&self) -> usize {
        let mut l = self.0.clone();
        l.sort_unstable();
        l.dedup();
        l.len()
    }

    /// Relabels to `0..c` in order of first appearance.
    pub fn compact(&self) -> (Vec<usize>, usize) {
        let mut map = BTreeMap::new();
        let labels = self
            .0
            .iter()
            .map(|&l| {
                let next = map.len();
                *map.entry(l).or_insert(next)
            })
            .collect();
        (labels, map.len())
    }
}

impl From<Vec<usize>> for Partition {
    fn from(v: Vec<usize>) -> Self {
        Self(v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MetricsReport {
    pub conductance: f64,
    pub modularity: f64,
    /// `None` when no ground truth is available.
    pub nmi: Option<f64>,
    pub f1: Option<f64>,
}

/// Row-wise argmax; ties go to the lowest cluster index.
pub fn hard_assign(c: &SoftAssignment) -> Partition {
    Partition(
        c.matrix()
            .row_iter()
            .map(|row| {
                let mut best = 0;
                for (j, &v) in row.iter().enumerate() {
                    if v > row[best] {
                        best = j;
                    }
                }
                best
            })
            .collect(),
    )
}

fn check_graph_partition(g: &Graph, p: &Partition) -> Result<(Vec<usize>, usize)> {
    if p.len() != g.num_nodes() {
        return Err(Error::DimensionMismatch {
            context: "partition length vs graph nodes",
            expected: g.num_nodes(),
            got: p.len(),
        });
    }
    if g.num_edges() == 0 {
        return Err(Error::EmptyGraph);
    }
    Ok(p.compact())
}

/// Per-cluster internal edge count and degree volume.
fn cluster_tallies(g: &Graph, labels: &[usize], k: usize) -> (Vec<usize>, Vec<usize>) {
    let mut internal = vec![0usize; k];
    let mut volume = vec![0usize; k];
    for (u, &c) in labels.iter().enumerate() {
        volume[c] += g.degree(u);
        for &v in g.neighbors(u) {
            if u < v && labels[v] == c {
                internal[c] += 1;
            }
        }
    }
    (internal, volume)
}

/// `100 · Σ_c [e_c/m − (k_c/2m)²]` with `e_c` the internal edges and `k_c`
/// the degree volume of cluster `c`.
pub fn modularity(g: &Graph, p: &Partition) -> Result<f64> {
    let (labels, k) = check_graph_partition(g, p)?;
    let (internal, volume) = cluster_tallies(g, &labels, k);
    let m = g.num_edges() as f64;
    let q: f64 = internal
        .iter()
        .zip(&volume)
        .map(|(&e, &vol)| {
            let frac = vol as f64 / (2.0 * m);
            e as f64 / m - frac * frac
        })
        .sum();
    Ok(100.0 * q)
}

/// Macro average over non-empty clusters of `cut(S) / min(vol S, vol V∖S)`,
/// times 100. Clusters whose smaller side has no volume count as 0.
pub fn conductance(g: &Graph, p: &Partition) -> Result<f64> {
    let (labels, k) = check_graph_partition(g, p)?;
    let (internal, volume) = cluster_tallies(g, &labels, k);
    let total = 2 * g.num_edges();
    let sum: f64 = internal
        .iter()
        .zip(&volume)
        .map(|(&e, &vol)| {
            let cut = vol - 2 * e;
            let denom = vol.min(total - vol);
            if denom == 0 {
                0.0
            } else {
                cut as f64 / denom as f64
            }
        })
        .sum();
    Ok(100.0 * sum / k as f64)
}

struct Contingency {
    n: usize,
    cells: Vec<usize>,
    rows: Vec<usize>,
    cols: Vec<usize>,
}

fn contingency(truth: &Partition, pred: &Partition) -> Result<Contingency> {
    if truth.len() != pred.len() {
        return Err(Error::DimensionMismatch {
            context: "partition lengths",
            expected: truth.len(),
            got: pred.len(),
        });
    }
    let (t, kt) = truth.compact();
    let (q, kp) = pred.compact();
    let mut cells = vec![0usize; kt * kp];
    let mut rows = vec![0usize; kt];
    let mut cols = vec![0usize; kp];
    for (&a, &b) in t.iter().zip(&q) {
        cells[a * kp + b] += 1;
        rows[a] += 1;
        cols[b] += 1;
    }
    Ok(Contingency {
        n: t.len(),
        cells,
        rows,
        cols,
    })
}

fn entropy(counts: &[usize], n: f64) -> f64 {
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * libm::log(p)
        })
        .sum()
}

/// Mutual information normalized by the arithmetic mean of the two
/// entropies (natural log), times 100. Two single-cluster partitions score
/// 100.
pub fn nmi(truth: &Partition, pred: &Partition) -> Result<f64> {
    let ct = contingency(truth, pred)?;
    if ct.n == 0 {
        return Ok(100.0);
    }
    let n = ct.n as f64;
    let h_t = entropy(&ct.rows, n);
    let h_p = entropy(&ct.cols, n);
    if ct.rows.len() == 1 && ct.cols.len() == 1 {
        return Ok(100.0);
    }
    let kp = ct.cols.len();
    let mut mi = 0.0;
    for (a, &ra) in ct.rows.iter().enumerate() {
        for (b, &cb) in ct.cols.iter().enumerate() {
            let nab = ct.cells[a * kp + b];
            if nab == 0 {
                continue;
            }
            let nab = nab as f64;
            mi += nab / n * libm::log(n * nab / (ra as f64 * cb as f64));
        }
    }
    let mean = 0.5 * (h_t + h_p);
    if mean <= 0.0 {
        return Ok(0.0);
    }
    Ok((100.0 * mi / mean).clamp(0.0, 100.0))
}

fn pairs(c: usize) -> u64 {
    let c = c as u64;
    c * c.saturating_sub(1) / 2
}

/// Pair-counting F1 over unordered node pairs, times 100. Precision or
/// recall with an empty denominator counts as 0.
pub fn pairwise_f1(truth: &Partition, pred: &Partition) -> Result<f64> {
    let ct = contingency(truth, pred)?;
    let tp: u64 = ct.cells.iter().map(|&c| pairs(c)).sum();
    let true_pairs: u64 = ct.rows.iter().map(|&c| pairs(c)).sum();
    let pred_pairs: u64 = ct.cols.iter().map(|&c| pairs(c)).sum();
    let ratio = |a: u64, b: u64| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    let precision = ratio(tp, pred_pairs);
    let recall = ratio(tp, true_pairs);
    if precision + recall == 0.0 {
        return Ok(0.0);
    }
    Ok(100.0 * 2.0 * precision * recall / (precision + recall))
}

/// All four scores for a predicted partition; NMI and F1 need `truth`.
pub fn evaluate(g: &Graph, pred: &Partition, truth: Option<&Partition>) -> Result<MetricsReport> {
    Ok(MetricsReport {
        conductance: conductance(g, pred)?,
        modularity: modularity(g, pred)?,
        nmi: truth.map(|t| nmi(t, pred)).transpose()?,
        f1: truth.map(|t| pairwise_f1(t, pred)).transpose()?,
    })
}
