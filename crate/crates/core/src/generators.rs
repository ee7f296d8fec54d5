//! Synthetic graphs with planted communities.

use alloc::format;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::metrics::Partition;

/// A generated graph together with its planted labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledGraph {
    pub graph: Graph,
    pub labels: Partition,
}

/// `cliques` disjoint complete graphs of `size` nodes joined in a ring: node 0
/// of clique `i` links to node 1 of clique `i + 1 (mod cliques)`.
///
/// Node `j` of clique `i` has index `i * size + j` and label `i`.
pub fn ring_of_cliques(cliques: usize, size: usize) -> Result<LabeledGraph> {
    if cliques < 3 || size < 3 {
        return Err(Error::InvalidParameter(format!(
            "ring of cliques needs at least 3 cliques of size 3, got {cliques} of size {size}"
        )));
    }
    let n = cliques * size;
    let mut edges = Vec::with_capacity(cliques * size * (size - 1) / 2 + cliques);
    for c in 0..cliques {
        let base = c * size;
        for a in 0..size {
            for b in a + 1..size {
                edges.push((base + a, base + b));
            }
        }
        let next = (c + 1) % cliques;
        edges.push((base, next * size + 1));
    }
    let graph = Graph::from_edge_list(&edges, n)?;
    let labels = Partition::new((0..n).map(|u| u / size).collect());
    Ok(LabeledGraph { graph, labels })
}

/// Stochastic block model. Each unordered pair is considered once in
/// lexicographic order and linked with probability `p_in` inside a block and
/// `p_out` across blocks.
pub fn sbm(sizes: &[usize], p_in: f64, p_out: f64, seed: u64) -> Result<LabeledGraph> {
    if !(0.0..=1.0).contains(&p_in) || !(0.0..=1.0).contains(&p_out) || p_out > p_in {
        return Err(Error::InvalidParameter(format!(
            "sbm needs 0 <= p_out <= p_in <= 1, got p_in={p_in}, p_out={p_out}"
        )));
    }
    let labels: Vec<usize> = sizes
        .iter()
        .enumerate()
        .flat_map(|(b, &s)| core::iter::repeat_n(b, s))
        .collect();
    let n = labels.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            let p = if labels[u] == labels[v] { p_in } else { p_out };
            // draw unconditionally so the stream does not depend on p
            let r: f64 = rng.random();
            if r < p {
                edges.push((u, v));
            }
        }
    }
    Ok(LabeledGraph {
        graph: Graph::from_edge_list(&edges, n)?,
        labels: Partition::new(labels),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ring_counts() {
        let r = ring_of_cliques(3, 3).unwrap();
        assert_eq!(r.graph.num_nodes(), 9);
        assert_eq!(r.graph.num_edges(), 12);
        assert_eq!(r.labels.labels(), &[0, 0, 0, 1, 1, 1, 2, 2, 2]);

        let r = ring_of_cliques(10, 5).unwrap();
        assert_eq!(r.graph.num_nodes(), 50);
        assert_eq!(r.graph.num_edges(), 110);
        assert!(r.graph.has_edge(45, 1));
    }

    #[test]
    fn ring_bounds() {
        assert!(ring_of_cliques(2, 5).is_err());
        assert!(ring_of_cliques(5, 2).is_err());
    }

    #[test]
    fn sbm_extremes() {
        let s = sbm(&[4, 4], 1.0, 0.0, 7).unwrap();
        assert_eq!(s.graph.num_edges(), 12);
        assert!(!s.graph.has_edge(0, 4));
        assert_eq!(s.labels.labels(), &[0, 0, 0, 0, 1, 1, 1, 1]);

        let k3 = sbm(&[3], 1.0, 0.0, 0).unwrap();
        assert_eq!(k3.graph.num_edges(), 3);
    }

    #[test]
    fn sbm_deterministic() {
        let a = sbm(&[50, 50], 0.5, 0.05, 11).unwrap();
        let b = sbm(&[50, 50], 0.5, 0.05, 11).unwrap();
        assert_eq!(a, b);
        let c = sbm(&[50, 50], 0.5, 0.05, 12).unwrap();
        assert_ne!(a.graph, c.graph);
    }

    #[test]
    fn sbm_bounds() {
        assert!(sbm(&[2], 0.2, 0.5, 0).is_err());
        assert!(sbm(&[2], 1.5, 0.0, 0).is_err());
        assert!(sbm(&[2], 0.5, -0.1, 0).is_err());
    }
}
