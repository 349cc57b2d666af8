//! Run files and the summary table rendered from them.
//!
//! A run file is CSV with the header `operation,mode,bytes,latency_ms` and
//! one sample per line. The table is always rendered from parsed samples, so
//! re-reading a run file reproduces the table byte for byte.

use std::fmt::{self, Write as _};
use std::io::{Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    FullPage,
    Fragment,
}

impl Mode {
    pub const ALL: [Mode; 2] = [Mode::FullPage, Mode::Fragment];

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::FullPage => "full_page",
            Mode::Fragment => "fragment",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Mode::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| format!("unknown mode {s:?}"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub operation: String,
    pub mode: Mode,
    pub bytes: u64,
    pub latency_ms: f64,
}

pub fn write_run(out: impl Write, samples: &[Sample]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    for s in samples {
        w.serialize(s).map_err(csv_io)?;
    }
    if samples.is_empty() {
        w.write_record(["operation", "mode", "bytes", "latency_ms"]).map_err(csv_io)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_io(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

pub fn read_run(input: impl Read) -> Result<Vec<Sample>> {
    let mut r = csv::ReaderBuilder::new().from_reader(input);
    let header = r.headers().map_err(|e| Error::RunFile { line: 1, reason: e.to_string() })?;
    if header != vec!["operation", "mode", "bytes", "latency_ms"] {
        return Err(Error::RunFile {
            line: 1,
            reason: "header must be operation,mode,bytes,latency_ms".into(),
        });
    }
    let mut out = Vec::new();
    for (n, rec) in r.deserialize::<Sample>().enumerate() {
        let line = n + 2;
        let s = rec.map_err(|e| Error::RunFile { line, reason: e.to_string() })?;
        if s.operation.is_empty() {
            return Err(Error::RunFile { line, reason: "empty operation".into() });
        }
        if !s.latency_ms.is_finite() || s.latency_ms < 0.0 {
            return Err(Error::RunFile { line, reason: format!("latency {} out of range", s.latency_ms) });
        }
        out.push(s);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub mean: f64,
    pub median: f64,
    pub p95: f64,
}

/// Mean, median (midpoint of the middle pair for even counts) and
/// nearest-rank 95th percentile. `None` for an empty slice.
pub fn summarize(values: &[f64]) -> Option<Summary> {
    if values.is_empty() {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let median = if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    };
    let rank = (0.95 * n as f64).ceil() as usize;
    Some(Summary {
        mean: values.iter().sum::<f64>() / n as f64,
        median,
        p95: sorted[rank.max(1) - 1],
    })
}

/// All samples for one operation in one mode.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementRun {
    pub operation: String,
    pub mode: Mode,
    pub payload_bytes: Vec<u64>,
    pub latency_ms: Vec<f64>,
}

impl MeasurementRun {
    pub fn samples(&self) -> usize {
        self.payload_bytes.len()
    }

    pub fn bytes(&self) -> Summary {
        let b: Vec<f64> = self.payload_bytes.iter().map(|b| *b as f64).collect();
        summarize(&b).expect("runs hold at least one sample")
    }

    pub fn latency(&self) -> Summary {
        summarize(&self.latency_ms).expect("runs hold at least one sample")
    }
}

/// Groups samples by (operation, mode) in order of first appearance.
pub fn runs(samples: &[Sample]) -> Vec<MeasurementRun> {
    let mut out: Vec<MeasurementRun> = Vec::new();
    for s in samples {
        let run = match out.iter_mut().position(|r| r.operation == s.operation && r.mode == s.mode) {
            Some(i) => &mut out[i],
            None => {
                out.push(MeasurementRun {
                    operation: s.operation.clone(),
                    mode: s.mode,
                    payload_bytes: Vec::new(),
                    latency_ms: Vec::new(),
                });
                out.last_mut().expect("just pushed")
            }
        };
        run.payload_bytes.push(s.bytes);
        run.latency_ms.push(s.latency_ms);
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub operation: String,
    pub mode: Mode,
    pub samples: usize,
    pub mean_bytes: f64,
    pub mean_ms: f64,
    pub median_ms: f64,
    pub p95_ms: f64,
    /// Percent, on the fragment row of an operation measured in both modes.
    pub reduction_pct: Option<f64>,
}

/// One row per run, operations in first-seen order, full page before fragment.
pub fn rows(runs: &[MeasurementRun]) -> Vec<Row> {
    let mut ops: Vec<&str> = Vec::new();
    for r in runs {
        if !ops.contains(&r.operation.as_str()) {
            ops.push(&r.operation);
        }
    }
    let mut out = Vec::new();
    for op in ops {
        let find = |m: Mode| runs.iter().find(|r| r.operation == op && r.mode == m);
        let full = find(Mode::FullPage).map(|r| r.bytes().mean);
        for mode in Mode::ALL {
            let Some(run) = find(mode) else { continue };
            let (bytes, lat) = (run.bytes(), run.latency());
            let reduction_pct = match (mode, full) {
                (Mode::Fragment, Some(full)) if full > 0.0 => Some(100.0 * (1.0 - bytes.mean / full)),
                _ => None,
            };
            out.push(Row {
                operation: op.to_string(),
                mode,
                samples: run.samples(),
                mean_bytes: bytes.mean,
                mean_ms: lat.mean,
                median_ms: lat.median,
                p95_ms: lat.p95,
                reduction_pct,
            });
        }
    }
    out
}

pub fn render_table(rows: &[Row]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<22} {:<9} {:>7} {:>12} {:>9} {:>9} {:>9} {:>11}",
        "operation", "mode", "samples", "mean bytes", "mean ms", "median ms", "p95 ms", "reduction %"
    );
    for r in rows {
        let reduction = r.reduction_pct.map(|p| format!("{p:.1}")).unwrap_or_default();
        let _ = writeln!(
            out,
            "{:<22} {:<9} {:>7} {:>12.1} {:>9.3} {:>9.3} {:>9.3} {:>11}",
            r.operation, r.mode, r.samples, r.mean_bytes, r.mean_ms, r.median_ms, r.p95_ms, reduction
        );
    }
    out
}

/// One line per operation, both modes side by side, for plotting.
pub fn plot_csv(rows: &[Row]) -> String {
    let mut out = String::from("operation,full_page_bytes,fragment_bytes,reduction_pct,full_page_ms,fragment_ms\n");
    let mut seen: Vec<&str> = Vec::new();
    for r in rows {
        if seen.contains(&r.operation.as_str()) {
            continue;
        }
        seen.push(&r.operation);
        let get = |m: Mode| rows.iter().find(|x| x.operation == r.operation && x.mode == m);
        let (full, frag) = (get(Mode::FullPage), get(Mode::Fragment));
        let num = |v: Option<f64>| v.map(|v| format!("{v:.3}")).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.operation,
            num(full.map(|x| x.mean_bytes)),
            num(frag.map(|x| x.mean_bytes)),
            num(frag.and_then(|x| x.reduction_pct)),
            num(full.map(|x| x.mean_ms)),
            num(frag.map(|x| x.mean_ms)),
        );
    }
    out
}
