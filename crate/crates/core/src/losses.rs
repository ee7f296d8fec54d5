//! Clustering objectives over a soft assignment `C`.
//!
//! The Potts term is evaluated through the deflated form
//! `Tr(CᵀAC) − (γ/2m)‖dᵀC‖²`, so the dense null-model matrix `d dᵀ` is never
//! built. Every objective also has a closed-form gradient with respect to
//! `C` (and `γ` where it appears).

use libm::sqrt;

use crate::dense::Matrix;
use crate::error::{Error, Result};
use crate::graph::{spmm, Graph};
use crate::model::{LossGradient, SoftAssignment};

/// Which objective the trainer minimizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum LossKind {
    /// Potts Hamiltonian with trainable γ, collapse and γ regularization.
    #[default]
    Potts,
    /// Modularity (γ fixed at 1) plus collapse regularization.
    Dmon,
    /// Normalized min-cut plus orthogonality regularization.
    MincutOrtho,
}

/// Normalization of the collapse regularizer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum CollapseScaling {
    /// `√k / n · ‖Σ_i C_i‖ − 1`, zero for perfectly balanced clusters.
    #[default]
    SqrtKOverN,
    /// `k / √n · ‖Σ_i C_i‖ − 1`.
    KOverSqrtN,
}

impl CollapseScaling {
    fn factor(self, n: usize, k: usize) -> f64 {
        match self {
            Self::SqrtKOverN => sqrt(k as f64) / n as f64,
            Self::KOverSqrtN => k as f64 / sqrt(n as f64),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LossWeights {
    pub potts: f64,
    pub collapse: f64,
    pub gamma: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        Self {
            potts: 1.0,
            collapse: 1.0,
            gamma: 0.01,
        }
    }
}

/// Per-term values of one loss evaluation.
///
/// For [`LossKind::MincutOrtho`] the `potts` slot holds the cut term and the
/// `collapse` slot the orthogonality term.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LossBreakdown {
    pub potts: f64,
    pub collapse: f64,
    pub gamma_reg: f64,
    pub total: f64,
    pub weights: LossWeights,
}

impl LossBreakdown {
    pub fn is_finite(&self) -> bool {
        self.potts.is_finite()
            && self.collapse.is_finite()
            && self.gamma_reg.is_finite()
            && self.total.is_finite()
    }
}

fn check_rows(g: &Graph, c: &SoftAssignment) -> Result<()> {
    if c.num_nodes() != g.num_nodes() {
        return Err(Error::DimensionMismatch {
            context: "assignment rows vs graph nodes",
            expected: g.num_nodes(),
            got: c.num_nodes(),
        });
    }
    Ok(())
}

/// Pieces shared by the value and gradient of the Potts term.
struct PottsParts {
    two_m: f64,
    ac: Matrix,
    trace_cac: f64,
    degree_mass: alloc::vec::Vec<f64>,
    null_term: f64,
}

fn potts_parts(g: &Graph, c: &SoftAssignment) -> Result<PottsParts> {
    check_rows(g, c)?;
    if g.num_edges() == 0 {
        return Err(Error::EmptyGraph);
    }
    let two_m = 2.0 * g.num_edges() as f64;
    let cm = c.matrix();
    let ac = spmm(g, cm)?;
    let trace_cac = cm.frobenius_dot(&ac)?;
    let degree_mass = cm.weighted_column_sums(&g.degree_vector())?;
    let null_term = degree_mass.iter().map(|v| v * v).sum::<f64>();
    Ok(PottsParts {
        two_m,
        ac,
        trace_cac,
        degree_mass,
        null_term,
    })
}

/// `−(1/2m)·[Tr(CᵀAC) − (γ/2m)‖dᵀC‖²]`. Lower is better; for a hard
/// assignment and `γ = 1` this is minus the modularity.
pub fn potts_loss(g: &Graph, c: &SoftAssignment, gamma: f64) -> Result<f64> {
    let p = potts_parts(g, c)?;
    Ok(-(p.trace_cac - gamma * p.null_term / p.two_m) / p.two_m)
}

/// Potts loss with `∂/∂C` and `∂/∂γ`.
pub fn potts_loss_grad(g: &Graph, c: &SoftAssignment, gamma: f64) -> Result<(f64, LossGradient)> {
    let p = potts_parts(g, c)?;
    let value = -(p.trace_cac - gamma * p.null_term / p.two_m) / p.two_m;
    // ∂/∂C = −(2/2m)·AC + (2γ/(2m)²)·d (dᵀC)
    let degrees = g.degree_vector();
    let mut grad = p.ac;
    let a_scale = -2.0 / p.two_m;
    let null_scale = 2.0 * gamma / (p.two_m * p.two_m);
    for (i, &d) in degrees.iter().enumerate() {
        for (gv, &mass) in grad.row_mut(i).iter_mut().zip(&p.degree_mass) {
            *gv = a_scale * *gv + null_scale * d * mass;
        }
    }
    Ok((
        value,
        LossGradient {
            c: grad,
            gamma: p.null_term / (p.two_m * p.two_m),
        },
    ))
}

/// Scaled norm of the cluster sizes minus one.
pub fn collapse_reg(c: &SoftAssignment, scaling: CollapseScaling) -> f64 {
    let sizes = c.matrix().column_sums();
    let norm = sqrt(sizes.iter().map(|s| s * s).sum());
    scaling.factor(c.num_nodes(), c.num_clusters()) * norm - 1.0
}

pub fn collapse_reg_grad(c: &SoftAssignment, scaling: CollapseScaling) -> (f64, Matrix) {
    let sizes = c.matrix().column_sums();
    let norm = sqrt(sizes.iter().map(|s| s * s).sum());
    let factor = scaling.factor(c.num_nodes(), c.num_clusters());
    let mut grad = Matrix::zeros(c.num_nodes(), c.num_clusters());
    if norm > 0.0 {
        for i in 0..grad.rows() {
            for (gv, &s) in grad.row_mut(i).iter_mut().zip(&sizes) {
                *gv = factor * s / norm;
            }
        }
    }
    (factor * norm - 1.0, grad)
}

/// `|γ − γ_max|`.
pub fn gamma_reg(gamma: f64, gamma_max: f64) -> f64 {
    (gamma - gamma_max).abs()
}

/// Subgradient of [`gamma_reg`], zero at `γ = γ_max`.
pub fn gamma_reg_grad(gamma: f64, gamma_max: f64) -> f64 {
    if gamma > gamma_max {
        1.0
    } else if gamma < gamma_max {
        -1.0
    } else {
        0.0
    }
}

/// Weighted sum of the Potts, collapse and γ terms.
pub fn pmn_total(
    g: &Graph,
    c: &SoftAssignment,
    gamma: f64,
    gamma_max: f64,
    weights: LossWeights,
    scaling: CollapseScaling,
) -> Result<LossBreakdown> {
    let potts = potts_loss(g, c, gamma)?;
    let collapse = collapse_reg(c, scaling);
    let gamma_reg = gamma_reg(gamma, gamma_max);
    Ok(LossBreakdown {
        potts,
        collapse,
        gamma_reg,
        total: weights.potts * potts + weights.collapse * collapse + weights.gamma * gamma_reg,
        weights,
    })
}

/// Modularity loss: the Potts loss at `γ = 1`.
pub fn dmon_loss(g: &Graph, c: &SoftAssignment) -> Result<f64> {
    potts_loss(g, c, 1.0)
}

struct CutParts {
    ac: Matrix,
    num: f64,
    den: f64,
}

fn cut_parts(g: &Graph, c: &SoftAssignment) -> Result<CutParts> {
    check_rows(g, c)?;
    let cm = c.matrix();
    let ac = spmm(g, cm)?;
    let num = cm.frobenius_dot(&ac)?;
    let den: f64 = cm
        .row_iter()
        .zip(g.degrees())
        .map(|(r, &d)| d as f64 * r.iter().map(|v| v * v).sum::<f64>())
        .sum();
    if den == 0.0 {
        return Err(Error::ZeroDenominator("normalized cut Tr(CᵀDC)"));
    }
    Ok(CutParts { ac, num, den })
}

/// `−Tr(CᵀAC) / Tr(CᵀDC)`.
pub fn mincut_loss(g: &Graph, c: &SoftAssignment) -> Result<f64> {
    let p = cut_parts(g, c)?;
    Ok(-p.num / p.den)
}

pub fn mincut_loss_grad(g: &Graph, c: &SoftAssignment) -> Result<(f64, Matrix)> {
    let p = cut_parts(g, c)?;
    // ∂/∂C = −(2AC·den − num·2DC) / den²
    let mut grad = p.ac;
    let cm = c.matrix();
    let inv = 1.0 / p.den;
    let ratio = p.num * inv * inv;
    for (i, &d) in g.degrees().iter().enumerate() {
        let cr = cm.row(i);
        for (gv, &cv) in grad.row_mut(i).iter_mut().zip(cr) {
            *gv = -2.0 * *gv * inv + 2.0 * ratio * d as f64 * cv;
        }
    }
    Ok((-p.num / p.den, grad))
}

/// `‖CᵀC/‖CᵀC‖_F − I/√k‖_F`.
pub fn ortho_reg(c: &SoftAssignment) -> Result<f64> {
    Ok(ortho_reg_grad(c)?.0)
}

pub fn ortho_reg_grad(c: &SoftAssignment) -> Result<(f64, Matrix)> {
    let cm = c.matrix();
    let k = c.num_clusters();
    let gram = cm.t_matmul(cm)?;
    let f = gram.frobenius_norm();
    if f == 0.0 {
        return Err(Error::ZeroDenominator("orthogonality ‖CᵀC‖_F"));
    }
    let inv_sqrt_k = 1.0 / sqrt(k as f64);
    let mut diff = gram.clone();
    diff.scale(1.0 / f);
    for i in 0..k {
        diff[(i, i)] -= inv_sqrt_k;
    }
    let value = diff.frobenius_norm();
    if value == 0.0 {
        return Ok((0.0, Matrix::zeros(cm.rows(), k)));
    }
    // g_N = T/L; g_S = (g_N − N·⟨N, g_N⟩)/F; ∂/∂C = C(g_S + g_Sᵀ)
    let mut normalized = gram;
    normalized.scale(1.0 / f);
    let mut g_n = diff;
    g_n.scale(1.0 / value);
    let proj = normalized.frobenius_dot(&g_n)?;
    let mut g_s = g_n;
    for (gv, &nv) in g_s.as_mut_slice().iter_mut().zip(normalized.as_slice()) {
        *gv = (*gv - nv * proj) / f;
    }
    let mut sym = g_s.transpose();
    sym.add_assign(&g_s)?;
    Ok((value, cm.matmul(&sym)?))
}

/// Everything the trainer needs to evaluate one objective.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Objective {
    pub kind: LossKind,
    pub weights: LossWeights,
    pub gamma_max: f64,
    pub scaling: CollapseScaling,
}

impl Objective {
    /// Value of the objective without gradients.
    pub fn evaluate(&self, g: &Graph, c: &SoftAssignment, gamma: f64) -> Result<LossBreakdown> {
        match self.kind {
            LossKind::Potts => pmn_total(g, c, gamma, self.gamma_max, self.weights, self.scaling),
            LossKind::Dmon => {
                let potts = dmon_loss(g, c)?;
                let collapse = collapse_reg(c, self.scaling);
                Ok(self.combine(potts, collapse, 0.0))
            }
            LossKind::MincutOrtho => {
                let cut = mincut_loss(g, c)?;
                let ortho = ortho_reg(c)?;
                Ok(self.combine(cut, ortho, 0.0))
            }
        }
    }

    /// Value and `∂/∂C`, `∂/∂γ`. Only the Potts objective depends on `γ`.
    pub fn evaluate_with_grad(
        &self,
        g: &Graph,
        c: &SoftAssignment,
        gamma: f64,
    ) -> Result<(LossBreakdown, LossGradient)> {
        let w = self.weights;
        let (first, mut grad_first, second, grad_second, gamma_term, gamma_grad) = match self.kind {
            LossKind::Potts => {
                let (potts, pg) = potts_loss_grad(g, c, gamma)?;
                let (collapse, cg) = collapse_reg_grad(c, self.scaling);
                let gr = gamma_reg(gamma, self.gamma_max);
                let gamma_grad =
                    w.potts * pg.gamma + w.gamma * gamma_reg_grad(gamma, self.gamma_max);
                (potts, pg.c, collapse, cg, gr, gamma_grad)
            }
            LossKind::Dmon => {
                let (potts, pg) = potts_loss_grad(g, c, 1.0)?;
                let (collapse, cg) = collapse_reg_grad(c, self.scaling);
                (potts, pg.c, collapse, cg, 0.0, 0.0)
            }
            LossKind::MincutOrtho => {
                let (cut, cg) = mincut_loss_grad(g, c)?;
                let (ortho, og) = ortho_reg_grad(c)?;
                (cut, cg, ortho, og, 0.0, 0.0)
            }
        };
        grad_first.scale(w.potts);
        for (a, &b) in grad_first
            .as_mut_slice()
            .iter_mut()
            .zip(grad_second.as_slice())
        {
            *a += w.collapse * b;
        }
        Ok((
            self.combine(first, second, gamma_term),
            LossGradient {
                c: grad_first,
                gamma: gamma_grad,
            },
        ))
    }

    fn combine(&self, first: f64, second: f64, gamma_term: f64) -> LossBreakdown {
        let w = self.weights;
        LossBreakdown {
            potts: first,
            collapse: second,
            gamma_reg: gamma_term,
            total: w.potts * first + w.collapse * second + w.gamma * gamma_term,
            weights: w,
        }
    }
}
