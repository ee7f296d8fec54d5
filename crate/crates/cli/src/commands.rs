//! The `train`, `eval` and `gen` subcommands, minus argument parsing.

use std::fs;
use std::path::{Path, PathBuf};

use pmn_core::generators::{ring_of_cliques, sbm, LabeledGraph};
use pmn_core::metrics::evaluate;
use pmn_core::trainer::{aggregate, train_and_evaluate, RunTrace, SeedSummary};
use pmn_core::{FeatureMatrix, MetricsReport, TrainConfig};
use rayon::prelude::*;

use crate::dataset::{degree_features, load_assignment, load_dataset, write_dataset, Meta};
use crate::error::{CliError, Result};
use crate::output::{assignment_tsv, metrics_json, trace_csv, write_atomic};

/// Progress messages go to stderr when `PMN_VERBOSE` is set to anything but
/// `0` or the empty string.
pub fn verbose() -> bool {
    std::env::var("PMN_VERBOSE").is_ok_and(|v| !v.is_empty() && v != "0")
}

/// Reads a JSON config (missing fields take their defaults) and applies a
/// seed override. Without a file the defaults are used.
pub fn load_config(path: Option<&Path>, seed: Option<u64>) -> Result<TrainConfig> {
    let mut config = match path {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(CliError::io(p))?;
            serde_json::from_str(&text)
                .map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?
        }
        None => TrainConfig::default(),
    };
    if let Some(s) = seed {
        config.seed = s;
    }
    config
        .validate()
        .map_err(|e| CliError::Config(e.to_string()))?;
    Ok(config)
}

#[derive(Debug, Clone)]
pub struct TrainRequest {
    pub data: PathBuf,
    pub config: TrainConfig,
    pub out: PathBuf,
    pub seeds: usize,
}

/// Trains `seeds` runs with seeds `config.seed ..`, in parallel, and writes
/// the outputs. The top-level `trace.csv` and `assignment.tsv` belong to the
/// first seed; with more than one seed every run also gets a `seed-<s>/`
/// directory.
pub fn train(req: &TrainRequest) -> Result<SeedSummary> {
    if req.seeds == 0 {
        return Err(CliError::Usage("--seeds must be at least 1".into()));
    }
    let data = load_dataset(&req.data)?;
    let seeds: Vec<u64> = (0..req.seeds as u64)
        .map(|i| req.config.seed.wrapping_add(i))
        .collect();
    let results: Vec<(RunTrace, _)> = seeds
        .par_iter()
        .map(|&seed| {
            let cfg = TrainConfig { seed, ..req.config };
            let out = train_and_evaluate(&data.graph, &data.features, &cfg, data.labels.as_ref())?;
            if verbose() {
                eprintln!(
                    "seed {seed}: modularity {:.2}, gamma {:.4}",
                    out.1.metrics.modularity, out.1.gamma_final
                );
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;

    fs::create_dir_all(&req.out).map_err(CliError::io(&req.out))?;
    for (i, (trace, run)) in results.iter().enumerate() {
        if i == 0 {
            write_run(&req.out, trace)?;
        }
        if req.seeds > 1 {
            let dir = req.out.join(format!("seed-{}", run.seed));
            fs::create_dir_all(&dir).map_err(CliError::io(&dir))?;
            write_run(&dir, trace)?;
        }
    }
    let summary = aggregate(results.into_iter().map(|(_, run)| run).collect())?;
    write_atomic(
        &req.out.join("metrics.json"),
        metrics_json(&req.config, &summary).as_bytes(),
    )?;
    Ok(summary)
}

fn write_run(dir: &Path, trace: &RunTrace) -> Result<()> {
    write_atomic(&dir.join("trace.csv"), trace_csv(trace).as_bytes())?;
    write_atomic(
        &dir.join("assignment.tsv"),
        assignment_tsv(&trace.partition()).as_bytes(),
    )
}

/// Scores a stored assignment; NMI and F1 are `None` without labels.
pub fn eval(data: &Path, assignment: &Path) -> Result<MetricsReport> {
    let d = load_dataset(data)?;
    let pred = load_assignment(assignment, d.meta.n)?;
    Ok(evaluate(&d.graph, &pred, d.labels.as_ref())?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FeatureKind {
    /// One-hot node degree.
    #[default]
    Degree,
    /// One indicator column per node.
    Identity,
}

fn write_generated(lg: &LabeledGraph, features: FeatureKind, out: &Path) -> Result<Meta> {
    let x = match features {
        FeatureKind::Degree => degree_features(&lg.graph),
        FeatureKind::Identity => FeatureMatrix::identity(lg.graph.num_nodes()),
    };
    write_dataset(out, &lg.graph, &x, Some(&lg.labels))
}

fn usage(e: pmn_core::Error) -> CliError {
    CliError::Usage(e.to_string())
}

pub fn gen_ring_of_cliques(
    cliques: usize,
    size: usize,
    features: FeatureKind,
    out: &Path,
) -> Result<Meta> {
    let lg = ring_of_cliques(cliques, size).map_err(usage)?;
    write_generated(&lg, features, out)
}

pub fn gen_sbm(
    sizes: &[usize],
    p_in: f64,
    p_out: f64,
    seed: u64,
    features: FeatureKind,
    out: &Path,
) -> Result<Meta> {
    let lg = sbm(sizes, p_in, p_out, seed).map_err(usage)?;
    write_generated(&lg, features, out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_defaults_and_overrides() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.json");
        fs::write(&p, r#"{"k": 4, "epochs": 3, "loss": "dmon"}"#).unwrap();
        let c = load_config(Some(&p), Some(9)).unwrap();
        assert_eq!(c.k, 4);
        assert_eq!(c.epochs, 3);
        assert_eq!(c.seed, 9);
        assert_eq!(c.hidden, TrainConfig::default().hidden);
        assert_eq!(load_config(None, None).unwrap(), TrainConfig::default());
    }

    #[test]
    fn bad_configs_are_config_errors() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.json");
        for body in [
            r#"{"k": 1}"#,
            r#"{"kk": 4}"#,
            r#"{"keep_prob": 0}"#,
            "not json",
        ] {
            fs::write(&p, body).unwrap();
            let e = load_config(Some(&p), None).unwrap_err();
            assert_eq!(e.exit_code(), 3, "{body}: {e}");
        }
    }

    #[test]
    fn bad_generator_parameters_are_usage_errors() {
        let dir = tempfile::tempdir().unwrap();
        let e = gen_ring_of_cliques(2, 5, FeatureKind::Degree, dir.path()).unwrap_err();
        assert_eq!(e.exit_code(), 2);
        let e = gen_sbm(&[3, 3], 0.1, 0.5, 0, FeatureKind::Degree, dir.path()).unwrap_err();
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn ring_generation_writes_counts() {
        let dir = tempfile::tempdir().unwrap();
        let meta = gen_ring_of_cliques(10, 5, FeatureKind::Degree, dir.path()).unwrap();
        assert_eq!((meta.n, meta.num_edges), (50, Some(110)));
        assert_eq!(meta.num_classes, 10);
    }
}
