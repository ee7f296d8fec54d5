//! Full-batch training with Adam, per-epoch traces and multi-seed runs.

use alloc::format;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::dense::Matrix;
use crate::error::{Error, Result};
use crate::graph::{normalized_adjacency, FeatureMatrix, Graph, SparseFeatures};
use crate::losses::{LossBreakdown, LossWeights, Objective};
use crate::metrics::{evaluate, hard_assign, MetricsReport, Partition};
use crate::model::{backward, forward, DropoutMask, GradientBundle, ModelParams, SoftAssignment};

pub use crate::losses::{CollapseScaling, LossKind};

/// Dropout masks come from a separate ChaCha stream of the run seed so the
/// initial weights do not depend on the epoch count.
const DROPOUT_STREAM: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct TrainConfig {
    pub seed: u64,
    /// Maximum number of clusters.
    pub k: usize,
    pub hidden: usize,
    /// Probability of keeping an input feature during training.
    pub keep_prob: f64,
    pub learning_rate: f64,
    pub epochs: usize,
    pub gamma_init: f64,
    pub gamma_max: f64,
    pub w_collapse: f64,
    pub w_gamma: f64,
    pub loss: LossKind,
    pub collapse_scaling: CollapseScaling,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            k: 16,
            hidden: 64,
            keep_prob: 0.5,
            learning_rate: 1e-3,
            epochs: 1000,
            gamma_init: 1.0,
            gamma_max: 5.0,
            w_collapse: 1.0,
            w_gamma: 0.01,
            loss: LossKind::Potts,
            collapse_scaling: CollapseScaling::SqrtKOverN,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: alloc::string::String| Err(Error::InvalidParameter(msg));
        if self.k < 2 {
            return bad(format!("k must be at least 2, got {}", self.k));
        }
        if self.hidden == 0 {
            return bad("hidden width must be positive".into());
        }
        if !(self.keep_prob > 0.0 && self.keep_prob <= 1.0) {
            return bad(format!(
                "keep_prob must be in (0, 1], got {}",
                self.keep_prob
            ));
        }
        if !(self.gamma_max > 0.0 && self.gamma_max.is_finite()) {
            return bad(format!(
                "gamma_max must be positive, got {}",
                self.gamma_max
            ));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad(format!(
                "learning_rate must be positive, got {}",
                self.learning_rate
            ));
        }
        if !(0.0..=self.gamma_max).contains(&self.gamma_init) {
            return bad(format!(
                "gamma_init must lie in [0, gamma_max], got {}",
                self.gamma_init
            ));
        }
        Ok(())
    }

    pub fn objective(&self) -> Objective {
        Objective {
            kind: self.loss,
            weights: LossWeights {
                potts: 1.0,
                collapse: self.w_collapse,
                gamma: if self.loss == LossKind::Potts {
                    self.w_gamma
                } else {
                    0.0
                },
            },
            gamma_max: self.gamma_max,
            scaling: self.collapse_scaling,
        }
    }

    /// Only the Potts objective trains γ; the baselines pin it to 1.
    fn initial_gamma(&self) -> f64 {
        match self.loss {
            LossKind::Potts => self.gamma_init,
            LossKind::Dmon | LossKind::MincutOrtho => 1.0,
        }
    }
}

fn normal_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Matrix {
    let data = (0..rows * cols)
        .map(|_| StandardNormal.sample(rng))
        .collect();
    Matrix::from_vec(rows, cols, data).expect("length matches by construction")
}

/// Standard-normal weights drawn in the order `W`, `W_skip`, `W_out` from the
/// seeded generator; `γ = gamma_init`.
pub fn init_params(config: &TrainConfig, num_features: usize) -> ModelParams {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    ModelParams {
        w: normal_matrix(num_features, config.hidden, &mut rng),
        w_skip: normal_matrix(num_features, config.hidden, &mut rng),
        w_out: normal_matrix(config.hidden, config.k, &mut rng),
        gamma: config.initial_gamma(),
    }
}

/// First and second moment estimates for every parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    step: u64,
    m: GradientBundle,
    v: GradientBundle,
}

impl AdamState {
    pub fn new(params: &ModelParams) -> Self {
        let zeros = || GradientBundle {
            w: Matrix::zeros(params.w.rows(), params.w.cols()),
            w_skip: Matrix::zeros(params.w_skip.rows(), params.w_skip.cols()),
            w_out: Matrix::zeros(params.w_out.rows(), params.w_out.cols()),
            gamma: 0.0,
        };
        Self {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            step: 0,
            m: zeros(),
            v: zeros(),
        }
    }

    pub fn steps(&self) -> u64 {
        self.step
    }
}

fn adam_update(
    p: &mut [f64],
    g: &[f64],
    m: &mut [f64],
    v: &mut [f64],
    lr: f64,
    (beta1, beta2, eps): (f64, f64, f64),
    (bc1, bc2): (f64, f64),
) {
    for (((p, &g), m), v) in p.iter_mut().zip(g).zip(m.iter_mut()).zip(v.iter_mut()) {
        *m = beta1 * *m + (1.0 - beta1) * g;
        *v = beta2 * *v + (1.0 - beta2) * g * g;
        let m_hat = *m / bc1;
        let v_hat = *v / bc2;
        *p -= lr * m_hat / (libm::sqrt(v_hat) + eps);
    }
}

/// One Adam step (β1 = 0.9, β2 = 0.999, ε = 1e-8) on every parameter, then γ
/// is clamped to `[0, gamma_max]`. With `train_gamma` false γ is left alone.
pub fn adam_step(
    params: &mut ModelParams,
    grads: &GradientBundle,
    state: &mut AdamState,
    lr: f64,
    gamma_max: f64,
    train_gamma: bool,
) {
    state.step += 1;
    let t = state.step as i32;
    let hyper = (state.beta1, state.beta2, state.eps);
    let corr = (
        1.0 - libm::pow(state.beta1, t as f64),
        1.0 - libm::pow(state.beta2, t as f64),
    );
    adam_update(
        params.w.as_mut_slice(),
        grads.w.as_slice(),
        state.m.w.as_mut_slice(),
        state.v.w.as_mut_slice(),
        lr,
        hyper,
        corr,
    );
    adam_update(
        params.w_skip.as_mut_slice(),
        grads.w_skip.as_slice(),
        state.m.w_skip.as_mut_slice(),
        state.v.w_skip.as_mut_slice(),
        lr,
        hyper,
        corr,
    );
    adam_update(
        params.w_out.as_mut_slice(),
        grads.w_out.as_slice(),
        state.m.w_out.as_mut_slice(),
        state.v.w_out.as_mut_slice(),
        lr,
        hyper,
        corr,
    );
    if train_gamma {
        adam_update(
            core::slice::from_mut(&mut params.gamma),
            &[grads.gamma],
            core::slice::from_mut(&mut state.m.gamma),
            core::slice::from_mut(&mut state.v.gamma),
            lr,
            hyper,
            corr,
        );
        params.gamma = params.gamma.clamp(0.0, gamma_max);
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EpochRecord {
    pub epoch: usize,
    pub loss: LossBreakdown,
    pub gamma: f64,
}

/// Evaluation-mode loss after each optimizer step. Record 0 is the state
/// before training, so there are `epochs + 1` records.
#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace {
    pub records: Vec<EpochRecord>,
    pub params: ModelParams,
    pub assignment: SoftAssignment,
}

impl RunTrace {
    pub fn final_gamma(&self) -> f64 {
        self.params.gamma
    }

    pub fn partition(&self) -> Partition {
        hard_assign(&self.assignment)
    }

    pub fn gammas(&self) -> impl Iterator<Item = f64> + '_ {
        self.records.iter().map(|r| r.gamma)
    }
}

/// Trains the encoder on one graph. Every epoch draws a fresh dropout mask,
/// runs forward/backward on the configured objective and takes an Adam step.
pub fn train(g: &Graph, x: &FeatureMatrix, config: &TrainConfig) -> Result<RunTrace> {
    config.validate()?;
    x.check_nodes(g)?;
    let abar = normalized_adjacency(g);
    let features = SparseFeatures::from(x);
    let objective = config.objective();
    let train_gamma = config.loss == LossKind::Potts;

    let mut params = init_params(config, x.num_features());
    let mut adam = AdamState::new(&params);
    let mut dropout_rng = ChaCha8Rng::seed_from_u64(config.seed);
    dropout_rng.set_stream(DROPOUT_STREAM);

    let eval = |params: &ModelParams, epoch: usize| -> Result<(EpochRecord, SoftAssignment)> {
        let (c, _) = forward(&abar, &features, params, None)?;
        let loss = objective.evaluate(g, &c, params.gamma)?;
        if !loss.is_finite() {
            return Err(Error::NonFiniteLoss {
                epoch,
                breakdown: loss,
            });
        }
        Ok((
            EpochRecord {
                epoch,
                loss,
                gamma: params.gamma,
            },
            c,
        ))
    };

    let mut records = Vec::with_capacity(config.epochs + 1);
    let (first, mut assignment) = eval(&params, 0)?;
    records.push(first);

    for epoch in 1..=config.epochs {
        let mask = (config.keep_prob < 1.0)
            .then(|| DropoutMask::sample(&features, config.keep_prob, &mut dropout_rng));
        let (c, cache) = forward(&abar, &features, &params, mask.as_ref())?;
        let (loss, upstream) = objective.evaluate_with_grad(g, &c, params.gamma)?;
        if !loss.is_finite() {
            return Err(Error::NonFiniteLoss {
                epoch,
                breakdown: loss,
            });
        }
        let grads = backward(&cache, &upstream)?;
        adam_step(
            &mut params,
            &grads,
            &mut adam,
            config.learning_rate,
            config.gamma_max,
            train_gamma,
        );
        let (record, c) = eval(&params, epoch)?;
        records.push(record);
        assignment = c;
    }

    Ok(RunTrace {
        records,
        params,
        assignment,
    })
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SeedRun {
    pub seed: u64,
    pub metrics: MetricsReport,
    pub gamma_final: f64,
}

/// Mean and (population) standard deviation of each metric across runs.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SeedSummary {
    pub runs: Vec<SeedRun>,
    pub mean: MetricsReport,
    pub std: MetricsReport,
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, libm::sqrt(var))
}

/// Aggregates runs in the order given. NMI/F1 are reported only when every
/// run has them.
pub fn aggregate(runs: Vec<SeedRun>) -> Result<SeedSummary> {
    if runs.is_empty() {
        return Err(Error::InvalidParameter("cannot aggregate zero runs".into()));
    }
    let column = |f: fn(&MetricsReport) -> f64| -> (f64, f64) {
        mean_std(&runs.iter().map(|r| f(&r.metrics)).collect::<Vec<_>>())
    };
    let optional = |f: fn(&MetricsReport) -> Option<f64>| -> Option<(f64, f64)> {
        let vals: Option<Vec<f64>> = runs.iter().map(|r| f(&r.metrics)).collect();
        vals.map(|v| mean_std(&v))
    };
    let c = column(|m| m.conductance);
    let q = column(|m| m.modularity);
    let nmi = optional(|m| m.nmi);
    let f1 = optional(|m| m.f1);
    Ok(SeedSummary {
        mean: MetricsReport {
            conductance: c.0,
            modularity: q.0,
            nmi: nmi.map(|v| v.0),
            f1: f1.map(|v| v.0),
        },
        std: MetricsReport {
            conductance: c.1,
            modularity: q.1,
            nmi: nmi.map(|v| v.1),
            f1: f1.map(|v| v.1),
        },
        runs,
    })
}

/// Trains once and scores the hard partition.
pub fn train_and_evaluate(
    g: &Graph,
    x: &FeatureMatrix,
    config: &TrainConfig,
    truth: Option<&Partition>,
) -> Result<(RunTrace, SeedRun)> {
    let trace = train(g, x, config)?;
    let metrics = evaluate(g, &trace.partition(), truth)?;
    let run = SeedRun {
        seed: config.seed,
        metrics,
        gamma_final: trace.final_gamma(),
    };
    Ok((trace, run))
}

/// Independent runs with seeds `config.seed + 0 .. num_seeds`, run one after
/// another.
pub fn run_seeds(
    g: &Graph,
    x: &FeatureMatrix,
    config: &TrainConfig,
    num_seeds: usize,
    truth: Option<&Partition>,
) -> Result<SeedSummary> {
    if num_seeds == 0 {
        return Err(Error::InvalidParameter(
            "num_seeds must be at least 1".into(),
        ));
    }
    let runs = (0..num_seeds as u64)
        .map(|i| {
            let cfg = TrainConfig {
                seed: config.seed.wrapping_add(i),
                ..*config
            };
            train_and_evaluate(g, x, &cfg, truth).map(|(_, run)| run)
        })
        .collect::<Result<Vec<_>>>()?;
    aggregate(runs)
}
