//! The encoder: one graph-convolution layer with a skip path and SeLU, a
//! linear output layer, and a row softmax producing the soft assignment.
//!
//! ```text
//! H = selu(Ā X̃ W + X̃ W_skip)
//! C = softmax_rows(H W_out)
//! ```
//!
//! `X̃` is the input with inverted dropout in training and `X` otherwise.
//! Gradients are written out by hand for this fixed stack.

use alloc::vec::Vec;

use rand::Rng;

use crate::dense::Matrix;
use crate::error::{Error, Result};
use crate::graph::{spmm, NormalizedAdjacency, SparseFeatures};

pub const SELU_LAMBDA: f64 = 1.0507009873554805;
pub const SELU_ALPHA: f64 = 1.6732632423543772;

#[inline]
pub fn selu(x: f64) -> f64 {
    if x > 0.0 {
        SELU_LAMBDA * x
    } else {
        SELU_LAMBDA * SELU_ALPHA * libm::expm1(x)
    }
}

#[inline]
pub fn selu_derivative(x: f64) -> f64 {
    if x > 0.0 {
        SELU_LAMBDA
    } else {
        SELU_LAMBDA * SELU_ALPHA * libm::exp(x)
    }
}

/// Row-stochastic `n × k` matrix of cluster probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct SoftAssignment(Matrix);

impl SoftAssignment {
    /// Wraps a matrix whose rows already sum to one. Used for hard
    /// assignments and test fixtures; rows are checked to 1e-9.
    pub fn new(c: Matrix) -> Result<Self> {
        for (i, row) in c.row_iter().enumerate() {
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > 1e-9 || row.iter().any(|&v| !(0.0..=1.0).contains(&v)) {
                return Err(Error::InvalidParameter(alloc::format!(
                    "row {i} of the assignment is not a probability vector"
                )));
            }
        }
        Ok(Self(c))
    }

    /// Wraps any matrix without checking rows. Gradient checks perturb single
    /// entries and need to evaluate objectives off the simplex.
    pub fn unchecked(c: Matrix) -> Self {
        Self(c)
    }

    /// One-hot assignment from integer labels.
    pub fn one_hot(labels: &[usize], k: usize) -> Result<Self> {
        let mut c = Matrix::zeros(labels.len(), k);
        for (u, &l) in labels.iter().enumerate() {
            if l >= k {
                return Err(Error::InvalidParameter(alloc::format!(
                    "label {l} of node {u} exceeds cluster count {k}"
                )));
            }
            c[(u, l)] = 1.0;
        }
        Ok(Self(c))
    }

    pub fn uniform(n: usize, k: usize) -> Self {
        Self(Matrix::filled(n, k, 1.0 / k as f64))
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn num_nodes(&self) -> usize {
        self.0.rows()
    }

    pub fn num_clusters(&self) -> usize {
        self.0.cols()
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }
}

/// Numerically stable row softmax (row maximum subtracted first).
pub fn softmax_rows(logits: &Matrix) -> SoftAssignment {
    let mut c = logits.clone();
    for i in 0..c.rows() {
        let row = c.row_mut(i);
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        for v in row.iter_mut() {
            *v = libm::exp(*v - max);
            sum += *v;
        }
        for v in row.iter_mut() {
            *v /= sum;
        }
    }
    SoftAssignment(c)
}

/// Encoder weights plus the trainable resolution.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ModelParams {
    /// `l × h` graph-convolution weights.
    pub w: Matrix,
    /// `l × h` skip-path weights.
    pub w_skip: Matrix,
    /// `h × k` output weights.
    pub w_out: Matrix,
    pub gamma: f64,
}

impl ModelParams {
    pub fn zeros(l: usize, h: usize, k: usize, gamma: f64) -> Self {
        Self {
            w: Matrix::zeros(l, h),
            w_skip: Matrix::zeros(l, h),
            w_out: Matrix::zeros(h, k),
            gamma,
        }
    }

    pub fn num_features(&self) -> usize {
        self.w.rows()
    }

    pub fn hidden(&self) -> usize {
        self.w.cols()
    }

    pub fn num_clusters(&self) -> usize {
        self.w_out.cols()
    }

    pub fn is_finite(&self) -> bool {
        self.w.is_finite()
            && self.w_skip.is_finite()
            && self.w_out.is_finite()
            && self.gamma.is_finite()
    }

    fn check_shapes(&self) -> Result<()> {
        let mismatch = |context, expected, got| Error::DimensionMismatch {
            context,
            expected,
            got,
        };
        if self.w_skip.shape() != self.w.shape() {
            return Err(mismatch(
                "skip weight rows",
                self.w.rows(),
                self.w_skip.rows(),
            ));
        }
        if self.w_out.rows() != self.w.cols() {
            return Err(mismatch(
                "output weight rows",
                self.w.cols(),
                self.w_out.rows(),
            ));
        }
        Ok(())
    }
}

/// Gradient of a scalar loss with respect to every [`ModelParams`] field.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientBundle {
    pub w: Matrix,
    pub w_skip: Matrix,
    pub w_out: Matrix,
    pub gamma: f64,
}

impl GradientBundle {
    pub fn is_finite(&self) -> bool {
        self.w.is_finite()
            && self.w_skip.is_finite()
            && self.w_out.is_finite()
            && self.gamma.is_finite()
    }

    pub fn max_abs(&self) -> f64 {
        [&self.w, &self.w_skip, &self.w_out]
            .iter()
            .flat_map(|m| m.as_slice().iter())
            .fold(self.gamma.abs(), |a, &b| a.max(b.abs()))
    }
}

/// Inverted-dropout mask over the stored (nonzero) input features.
#[derive(Debug, Clone, PartialEq)]
pub struct DropoutMask {
    keep: Vec<bool>,
    keep_prob: f64,
}

impl DropoutMask {
    pub fn sample<R: Rng + ?Sized>(x: &SparseFeatures, keep_prob: f64, rng: &mut R) -> Self {
        let keep = (0..x.nnz())
            .map(|_| rng.random::<f64>() < keep_prob)
            .collect();
        Self { keep, keep_prob }
    }

    pub fn from_keep(keep: Vec<bool>, keep_prob: f64) -> Self {
        Self { keep, keep_prob }
    }

    fn as_arg(&self) -> (&[bool], f64) {
        (&self.keep, 1.0 / self.keep_prob)
    }
}

/// Intermediates retained by [`forward`] for [`backward`].
#[derive(Debug, Clone)]
pub struct ForwardCache<'a> {
    abar: &'a NormalizedAdjacency,
    x: &'a SparseFeatures,
    mask: Option<&'a DropoutMask>,
    w_out: Matrix,
    pre_activation: Matrix,
    hidden: Matrix,
    c: SoftAssignment,
}

impl ForwardCache<'_> {
    pub fn assignment(&self) -> &SoftAssignment {
        &self.c
    }

    pub fn hidden(&self) -> &Matrix {
        &self.hidden
    }
}

pub fn forward<'a>(
    abar: &'a NormalizedAdjacency,
    x: &'a SparseFeatures,
    params: &ModelParams,
    mask: Option<&'a DropoutMask>,
) -> Result<(SoftAssignment, ForwardCache<'a>)> {
    params.check_shapes()?;
    if x.num_nodes() != abar.num_nodes() {
        return Err(Error::DimensionMismatch {
            context: "feature rows vs graph nodes",
            expected: abar.num_nodes(),
            got: x.num_nodes(),
        });
    }
    if let Some(m) = mask {
        if m.keep.len() != x.nnz() {
            return Err(Error::DimensionMismatch {
                context: "dropout mask length",
                expected: x.nnz(),
                got: m.keep.len(),
            });
        }
    }
    let mask_arg = mask.map(DropoutMask::as_arg);
    let xw = x.matmul(&params.w, mask_arg)?;
    let mut pre = spmm(abar, &xw)?;
    pre.add_assign(&x.matmul(&params.w_skip, mask_arg)?)?;
    let hidden = pre.map(selu);
    let logits = hidden.matmul(&params.w_out)?;
    let c = softmax_rows(&logits);
    let cache = ForwardCache {
        abar,
        x,
        mask,
        w_out: params.w_out.clone(),
        pre_activation: pre,
        hidden,
        c: c.clone(),
    };
    Ok((c, cache))
}

/// Upstream gradient of the loss: `∂L/∂C` and `∂L/∂γ`.
#[derive(Debug, Clone, PartialEq)]
pub struct LossGradient {
    pub c: Matrix,
    pub gamma: f64,
}

/// Chains `∂L/∂C` back through softmax, the output layer, SeLU and both
/// input paths.
pub fn backward(cache: &ForwardCache<'_>, upstream: &LossGradient) -> Result<GradientBundle> {
    let c = cache.c.matrix();
    if upstream.c.shape() != c.shape() {
        return Err(Error::StaleCache);
    }
    // softmax: g_logit = C ⊙ (g_C − rowsum(g_C ⊙ C))
    let mut g_logits = upstream.c.clone();
    for i in 0..c.rows() {
        let cr = c.row(i);
        let gr = g_logits.row_mut(i);
        let inner: f64 = gr.iter().zip(cr).map(|(g, p)| g * p).sum();
        for (g, &p) in gr.iter_mut().zip(cr) {
            *g = p * (*g - inner);
        }
    }
    let w_out = cache.hidden.t_matmul(&g_logits)?;
    let mut g_pre = g_logits.matmul_t(&cache.w_out)?;
    for (g, &u) in g_pre
        .as_mut_slice()
        .iter_mut()
        .zip(cache.pre_activation.as_slice())
    {
        *g *= selu_derivative(u);
    }
    let mask_arg = cache.mask.map(DropoutMask::as_arg);
    let w_skip = cache.x.t_matmul(&g_pre, mask_arg)?;
    // Ā is symmetric, so Āᵀ g = Ā g
    let w = cache.x.t_matmul(&spmm(cache.abar, &g_pre)?, mask_arg)?;
    Ok(GradientBundle {
        w,
        w_skip,
        w_out,
        gamma: upstream.gamma,
    })
}
