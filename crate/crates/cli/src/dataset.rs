//! On-disk dataset directories.
//!
//! A dataset is a directory with
//!
//! - `meta.json`: `{"n": .., "num_features": .., "num_classes": ..}` plus an
//!   optional `"num_edges"` that is checked against the deduplicated graph,
//! - `edges.tsv`: `u<TAB>v`, 0-indexed, undirected, duplicates tolerated,
//! - `features.tsv`: sparse triplets `node<TAB>feature<TAB>value`,
//! - `labels.tsv` (optional): `node<TAB>label`, one line per node.
//!
//! Blank lines and lines starting with `#` are skipped.

use std::fs;
use std::path::Path;

use pmn_core::{FeatureMatrix, Graph, Matrix, Partition};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::output::write_atomic;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Meta {
    pub n: usize,
    pub num_features: usize,
    pub num_classes: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub num_edges: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct Dataset {
    pub meta: Meta,
    pub graph: Graph,
    pub features: FeatureMatrix,
    pub labels: Option<Partition>,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(CliError::io(path))
}

/// Non-blank, non-comment lines split on tabs, with 1-based line numbers.
fn records(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, line)| {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            None
        } else {
            Some((i + 1, line.split('\t').map(str::trim).collect()))
        }
    })
}

struct LineCtx<'a> {
    path: &'a Path,
    line: usize,
}

impl LineCtx<'_> {
    fn err(&self, msg: impl Into<String>) -> CliError {
        CliError::Parse {
            path: self.path.to_path_buf(),
            line: self.line,
            msg: msg.into(),
        }
    }

    fn fields<'f>(&self, fields: &'f [&'f str], want: usize) -> Result<&'f [&'f str]> {
        if fields.len() != want {
            return Err(self.err(format!(
                "expected {want} tab-separated fields, got {}",
                fields.len()
            )));
        }
        Ok(fields)
    }

    fn index(&self, s: &str, what: &str, bound: usize) -> Result<usize> {
        let v: usize = s
            .parse()
            .map_err(|_| self.err(format!("{what} {s:?} is not a non-negative integer")))?;
        if v >= bound {
            return Err(self.err(format!("{what} {v} out of range (must be < {bound})")));
        }
        Ok(v)
    }
}

pub fn load_dataset(dir: &Path) -> Result<Dataset> {
    let meta_path = dir.join("meta.json");
    let meta: Meta = serde_json::from_str(&read(&meta_path)?).map_err(|e| CliError::Parse {
        path: meta_path.clone(),
        line: e.line(),
        msg: e.to_string(),
    })?;
    let inconsistent = |msg: String| CliError::Dataset {
        path: dir.to_path_buf(),
        msg,
    };
    if meta.n == 0 {
        return Err(inconsistent("meta.json declares n = 0".into()));
    }

    let edges_path = dir.join("edges.tsv");
    let text = read(&edges_path)?;
    let mut edges = Vec::new();
    for (line, fields) in records(&text) {
        let ctx = LineCtx {
            path: &edges_path,
            line,
        };
        let f = ctx.fields(&fields, 2)?;
        edges.push((
            ctx.index(f[0], "node", meta.n)?,
            ctx.index(f[1], "node", meta.n)?,
        ));
    }
    let graph = Graph::from_edge_list(&edges, meta.n)?;
    if let Some(m) = meta.num_edges {
        if m != graph.num_edges() {
            return Err(inconsistent(format!(
                "meta.json declares {m} edges, edges.tsv has {} distinct non-loop edges",
                graph.num_edges()
            )));
        }
    }

    let features_path = dir.join("features.tsv");
    let text = read(&features_path)?;
    let mut x = Matrix::zeros(meta.n, meta.num_features);
    let mut seen = vec![false; meta.n * meta.num_features];
    for (line, fields) in records(&text) {
        let ctx = LineCtx {
            path: &features_path,
            line,
        };
        let f = ctx.fields(&fields, 3)?;
        let node = ctx.index(f[0], "node", meta.n)?;
        let feat = ctx.index(f[1], "feature", meta.num_features)?;
        let value: f64 = f[2]
            .parse()
            .map_err(|_| ctx.err(format!("value {:?} is not a number", f[2])))?;
        if !value.is_finite() {
            return Err(ctx.err("feature value is not finite"));
        }
        let slot = node * meta.num_features + feat;
        if seen[slot] {
            return Err(ctx.err(format!("duplicate entry for node {node}, feature {feat}")));
        }
        seen[slot] = true;
        x.as_mut_slice()[slot] = value;
    }
    let features = FeatureMatrix::new(x)?;

    let labels_path = dir.join("labels.tsv");
    let labels = if labels_path.exists() {
        Some(load_labels(&labels_path, meta.n, meta.num_classes)?)
    } else {
        None
    };

    Ok(Dataset {
        meta,
        graph,
        features,
        labels,
    })
}

/// `node<TAB>value` lines covering every node exactly once, values `< bound`.
fn load_node_map(path: &Path, n: usize, what: &str, bound: usize) -> Result<Vec<usize>> {
    let text = read(path)?;
    let mut out: Vec<Option<usize>> = vec![None; n];
    for (line, fields) in records(&text) {
        let ctx = LineCtx { path, line };
        let f = ctx.fields(&fields, 2)?;
        let node = ctx.index(f[0], "node", n)?;
        let value = ctx.index(f[1], what, bound)?;
        if out[node].replace(value).is_some() {
            return Err(ctx.err(format!("node {node} listed twice")));
        }
    }
    out.into_iter()
        .enumerate()
        .map(|(node, v)| {
            v.ok_or_else(|| CliError::Dataset {
                path: path.to_path_buf(),
                msg: format!("no {what} for node {node}"),
            })
        })
        .collect()
}

pub fn load_labels(path: &Path, n: usize, num_classes: usize) -> Result<Partition> {
    load_node_map(path, n, "label", num_classes).map(Partition::new)
}

/// Reads an `assignment.tsv` (`node<TAB>cluster`) for a graph on `n` nodes.
pub fn load_assignment(path: &Path, n: usize) -> Result<Partition> {
    load_node_map(path, n, "cluster", usize::MAX).map(Partition::new)
}

/// Writes a dataset directory, creating it if needed. `num_edges` is always
/// recorded in `meta.json`.
pub fn write_dataset(
    dir: &Path,
    graph: &Graph,
    features: &FeatureMatrix,
    labels: Option<&Partition>,
) -> Result<Meta> {
    fs::create_dir_all(dir).map_err(CliError::io(dir))?;
    let num_classes = labels.map_or(0, |p| p.labels().iter().max().map_or(0, |&m| m + 1));
    let meta = Meta {
        n: graph.num_nodes(),
        num_features: features.num_features(),
        num_classes,
        num_edges: Some(graph.num_edges()),
    };
    let mut edges = String::new();
    for (u, v) in graph.edges() {
        edges.push_str(&format!("{u}\t{v}\n"));
    }
    let mut feats = String::new();
    for (u, row) in features.matrix().row_iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            if v != 0.0 {
                feats.push_str(&format!("{u}\t{j}\t{v}\n"));
            }
        }
    }
    let meta_json = serde_json::to_string_pretty(&meta).expect("meta serializes") + "\n";
    write_atomic(&dir.join("meta.json"), meta_json.as_bytes())?;
    write_atomic(&dir.join("edges.tsv"), edges.as_bytes())?;
    write_atomic(&dir.join("features.tsv"), feats.as_bytes())?;
    if let Some(p) = labels {
        write_atomic(&dir.join("labels.tsv"), node_map_tsv(p.labels()).as_bytes())?;
    }
    Ok(meta)
}

pub(crate) fn node_map_tsv(values: &[usize]) -> String {
    let mut s = String::new();
    for (u, v) in values.iter().enumerate() {
        s.push_str(&format!("{u}\t{v}\n"));
    }
    s
}

/// One-hot encoding of node degree, `max_degree + 1` columns.
pub fn degree_features(graph: &Graph) -> FeatureMatrix {
    let width = graph.degrees().iter().max().map_or(1, |&d| d + 1);
    let mut x = Matrix::zeros(graph.num_nodes(), width);
    for (u, &d) in graph.degrees().iter().enumerate() {
        x.row_mut(u)[d] = 1.0;
    }
    FeatureMatrix::new(x).expect("one-hot entries are finite")
}
