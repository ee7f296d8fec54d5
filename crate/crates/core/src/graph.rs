//! Undirected simple graphs in CSR form, the symmetric degree normalization
//! `D^{-1/2} A D^{-1/2}` and sparse × dense products.

use alloc::vec;
use alloc::vec::Vec;

use crate::dense::Matrix;
use crate::error::{Error, Result};

/// Undirected, unweighted simple graph. Every edge is stored in both
/// directions; rows are sorted and free of duplicates and self-loops.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    degrees: Vec<usize>,
    m: usize,
}

impl Graph {
    /// Builds a graph on `n` nodes. Self-loops are dropped and duplicate
    /// edges (in either orientation) collapse into one.
    pub fn from_edge_list(edges: &[(usize, usize)], n: usize) -> Result<Self> {
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
        for &(u, v) in edges {
            for index in [u, v] {
                if index >= n {
                    return Err(Error::NodeOutOfRange { index, n });
                }
            }
            if u == v {
                continue;
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::new();
        let mut degrees = Vec::with_capacity(n);
        row_ptr.push(0);
        for mut row in adj {
            row.sort_unstable();
            row.dedup();
            degrees.push(row.len());
            col_idx.extend_from_slice(&row);
            row_ptr.push(col_idx.len());
        }
        let m = col_idx.len() / 2;
        Ok(Self {
            n,
            row_ptr,
            col_idx,
            degrees,
            m,
        })
    }

    #[inline]
    pub fn num_nodes(&self) -> usize {
        self.n
    }

    /// Number of distinct undirected edges.
    #[inline]
    pub fn num_edges(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn degrees(&self) -> &[usize] {
        &self.degrees
    }

    #[inline]
    pub fn degree(&self, u: usize) -> usize {
        self.degrees[u]
    }

    #[inline]
    pub fn neighbors(&self, u: usize) -> &[usize] {
        &self.col_idx[self.row_ptr[u]..self.row_ptr[u + 1]]
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    /// Degrees as floats, the `d` vector of the null model.
    pub fn degree_vector(&self) -> Vec<f64> {
        self.degrees.iter().map(|&d| d as f64).collect()
    }

    /// Each undirected edge once, as `(u, v)` with `u < v`, in CSR order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .copied()
                .filter(move |&v| u < v)
                .map(move |v| (u, v))
        })
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.n && self.neighbors(u).binary_search(&v).is_ok()
    }

    /// Checks every structural invariant: sorted duplicate-free rows, no
    /// self-loops, symmetry, and consistent degree/edge counts.
    pub fn check_invariants(&self) -> bool {
        if self.row_ptr.len() != self.n + 1 || self.degrees.len() != self.n {
            return false;
        }
        let mut degree_sum = 0;
        for u in 0..self.n {
            let row = self.neighbors(u);
            if row.len() != self.degrees[u] {
                return false;
            }
            if row.windows(2).any(|w| w[0] >= w[1]) {
                return false;
            }
            if row
                .iter()
                .any(|&v| v == u || v >= self.n || !self.has_edge(v, u))
            {
                return false;
            }
            degree_sum += row.len();
        }
        degree_sum == 2 * self.m
    }

    /// Dense 0/1 adjacency. Only for small graphs and test oracles.
    pub fn to_dense(&self) -> Matrix {
        let mut a = Matrix::zeros(self.n, self.n);
        for u in 0..self.n {
            for &v in self.neighbors(u) {
                a[(u, v)] = 1.0;
            }
        }
        a
    }
}

/// `D^{-1/2} A D^{-1/2}` sharing the sparsity pattern of its graph.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedAdjacency {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl NormalizedAdjacency {
    #[inline]
    pub fn num_nodes(&self) -> usize {
        self.n
    }

    pub fn row(&self, u: usize) -> (&[usize], &[f64]) {
        let r = self.row_ptr[u]..self.row_ptr[u + 1];
        (&self.col_idx[r.clone()], &self.values[r])
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn to_dense(&self) -> Matrix {
        let mut a = Matrix::zeros(self.n, self.n);
        for u in 0..self.n {
            let (cols, vals) = self.row(u);
            for (&v, &x) in cols.iter().zip(vals) {
                a[(u, v)] = x;
            }
        }
        a
    }
}

/// Value at `(u, v)` is `1/sqrt(d_u d_v)`. Isolated nodes keep empty rows;
/// no self-loops are added.
pub fn normalized_adjacency(g: &Graph) -> NormalizedAdjacency {
    let mut values = Vec::with_capacity(g.col_idx.len());
    for u in 0..g.n {
        let du = g.degrees[u];
        for &v in g.neighbors(u) {
            values.push(1.0 / libm::sqrt((du * g.degrees[v]) as f64));
        }
    }
    NormalizedAdjacency {
        n: g.n,
        row_ptr: g.row_ptr.clone(),
        col_idx: g.col_idx.clone(),
        values,
    }
}

/// A square sparse operator that can multiply a dense matrix.
pub trait SparseOperator {
    fn dim(&self) -> usize;

    /// Calls `f(col, value)` for each stored entry of row `u`, ascending `col`.
    fn for_each_in_row(&self, u: usize, f: impl FnMut(usize, f64));
}

impl SparseOperator for Graph {
    fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    fn for_each_in_row(&self, u: usize, mut f: impl FnMut(usize, f64)) {
        for &v in self.neighbors(u) {
            f(v, 1.0);
        }
    }
}

impl SparseOperator for NormalizedAdjacency {
    fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    fn for_each_in_row(&self, u: usize, mut f: impl FnMut(usize, f64)) {
        let (cols, vals) = self.row(u);
        for (&v, &x) in cols.iter().zip(vals) {
            f(v, x);
        }
    }
}

/// Exact sparse × dense product. Each output row accumulates its terms in
/// ascending column order.
pub fn spmm<A: SparseOperator>(a: &A, x: &Matrix) -> Result<Matrix> {
    let n = a.dim();
    if x.rows() != n {
        return Err(Error::DimensionMismatch {
            context: "spmm rows",
            expected: n,
            got: x.rows(),
        });
    }
    let c = x.cols();
    let mut out = Matrix::zeros(n, c);
    for u in 0..n {
        let o = out.row_mut(u);
        a.for_each_in_row(u, |v, w| {
            for (ov, &xv) in o.iter_mut().zip(x.row(v)) {
                *ov += w * xv;
            }
        });
    }
    Ok(out)
}

/// Dense `n × l` node-feature matrix with finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix(Matrix);

impl FeatureMatrix {
    pub fn new(m: Matrix) -> Result<Self> {
        if !m.is_finite() {
            return Err(Error::InvalidParameter(
                "feature matrix has non-finite entries".into(),
            ));
        }
        Ok(Self(m))
    }

    /// Identity features (one indicator column per node).
    pub fn identity(n: usize) -> Self {
        Self(Matrix::identity(n))
    }

    pub fn num_nodes(&self) -> usize {
        self.0.rows()
    }

    pub fn num_features(&self) -> usize {
        self.0.cols()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn check_nodes(&self, g: &Graph) -> Result<()> {
        if self.num_nodes() != g.num_nodes() {
            return Err(Error::DimensionMismatch {
                context: "feature rows vs graph nodes",
                expected: g.num_nodes(),
                got: self.num_nodes(),
            });
        }
        Ok(())
    }
}

/// Row-compressed copy of the nonzero entries of a [`FeatureMatrix`].
///
/// Bag-of-words features are mostly zeros, so products with the encoder
/// weights run over stored entries only. Dropout masks index these entries:
/// a masked zero is still zero, so masking only the stored ones is
/// equivalent to masking every entry.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseFeatures {
    n: usize,
    l: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseFeatures {
    pub fn num_nodes(&self) -> usize {
        self.n
    }

    pub fn num_features(&self) -> usize {
        self.l
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// `X̃ · W` where `X̃` is these features with an optional dropout mask
    /// applied (kept entries scaled by `scale`).
    pub fn matmul(&self, w: &Matrix, mask: Option<(&[bool], f64)>) -> Result<Matrix> {
        if w.rows() != self.l {
            return Err(Error::DimensionMismatch {
                context: "feature matmul inner dimension",
                expected: self.l,
                got: w.rows(),
            });
        }
        let h = w.cols();
        let mut out = Matrix::zeros(self.n, h);
        for u in 0..self.n {
            let o = out.row_mut(u);
            for p in self.row_ptr[u]..self.row_ptr[u + 1] {
                let x = match mask {
                    Some((keep, _)) if !keep[p] => continue,
                    Some((_, scale)) => self.values[p] * scale,
                    None => self.values[p],
                };
                for (ov, &wv) in o.iter_mut().zip(w.row(self.col_idx[p])) {
                    *ov += x * wv;
                }
            }
        }
        Ok(out)
    }

    /// `X̃ᵀ · G` for an `n × h` matrix `G`, masked like [`Self::matmul`].
    pub fn t_matmul(&self, g: &Matrix, mask: Option<(&[bool], f64)>) -> Result<Matrix> {
        if g.rows() != self.n {
            return Err(Error::DimensionMismatch {
                context: "feature transposed matmul rows",
                expected: self.n,
                got: g.rows(),
            });
        }
        let h = g.cols();
        let mut out = Matrix::zeros(self.l, h);
        for u in 0..self.n {
            let gr = g.row(u);
            for p in self.row_ptr[u]..self.row_ptr[u + 1] {
                let x = match mask {
                    Some((keep, _)) if !keep[p] => continue,
                    Some((_, scale)) => self.values[p] * scale,
                    None => self.values[p],
                };
                let o = out.row_mut(self.col_idx[p]);
                for (ov, &gv) in o.iter_mut().zip(gr) {
                    *ov += x * gv;
                }
            }
        }
        Ok(out)
    }
}

impl From<&FeatureMatrix> for SparseFeatures {
    fn from(x: &FeatureMatrix) -> Self {
        let m = x.matrix();
        let mut row_ptr = Vec::with_capacity(m.rows() + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for r in m.row_iter() {
            for (j, &v) in r.iter().enumerate() {
                if v != 0.0 {
                    col_idx.push(j);
                    values.push(v);
                }
            }
            row_ptr.push(values.len());
        }
        Self {
            n: m.rows(),
            l: m.cols(),
            row_ptr,
            col_idx,
            values,
        }
    }
}
