//! Run outputs: `trace.csv`, `assignment.tsv`, `metrics.json`.
//!
//! Floats are written with 17 significant digits (`{:.16e}`) so that every
//! value round-trips exactly. Files are written to a temporary sibling and
//! renamed into place.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use pmn_core::trainer::{RunTrace, SeedRun, SeedSummary};
use pmn_core::{Partition, TrainConfig};
use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::dataset::node_map_tsv;
use crate::error::{CliError, Result};

pub const TRACE_HEADER: &str = "epoch,total,potts,collapse,gamma_reg,gamma";

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let tmp = path.with_file_name(format!(".{name}.tmp"));
    let write = || -> io::Result<()> {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    };
    write().map_err(|e| {
        let _ = fs::remove_file(&tmp);
        CliError::Io {
            path: path.to_path_buf(),
            source: e,
        }
    })
}

pub fn trace_csv(trace: &RunTrace) -> String {
    let mut s = String::with_capacity(96 * (trace.records.len() + 1));
    s.push_str(TRACE_HEADER);
    s.push('\n');
    for r in &trace.records {
        s.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.epoch,
            fmt_f64(r.loss.total),
            fmt_f64(r.loss.potts),
            fmt_f64(r.loss.collapse),
            fmt_f64(r.loss.gamma_reg),
            fmt_f64(r.gamma)
        ));
    }
    s
}

pub fn assignment_tsv(p: &Partition) -> String {
    node_map_tsv(p.labels())
}

/// Pretty JSON whose floats use the same 17-digit format as the CSV.
struct FullPrecision<'a>(PrettyFormatter<'a>);

impl Formatter for FullPrecision<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        w.write_all(fmt_f64(value).as_bytes())
    }
    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser =
        serde_json::Serializer::with_formatter(&mut buf, FullPrecision(PrettyFormatter::new()));
    value.serialize(&mut ser).expect("in-memory serialization");
    buf.push(b'\n');
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}

#[derive(Debug, Serialize)]
pub struct MetricsFile<'a> {
    pub config: &'a TrainConfig,
    pub num_seeds: usize,
    pub runs: &'a [SeedRun],
    pub aggregate: Aggregate<'a>,
}

#[derive(Debug, Serialize)]
pub struct Aggregate<'a> {
    pub mean: &'a pmn_core::MetricsReport,
    pub std: &'a pmn_core::MetricsReport,
    pub gamma_final_mean: f64,
}

pub fn metrics_json(config: &TrainConfig, summary: &SeedSummary) -> String {
    let n = summary.runs.len() as f64;
    let gamma_final_mean = summary.runs.iter().map(|r| r.gamma_final).sum::<f64>() / n;
    to_json(&MetricsFile {
        config,
        num_seeds: summary.runs.len(),
        runs: &summary.runs,
        aggregate: Aggregate {
            mean: &summary.mean,
            std: &summary.std,
            gamma_final_mean,
        },
    })
}
