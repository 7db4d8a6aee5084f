//! Decision and metrics CSV writers.
//!
//! Reals are written as `{:.16e}`, 17 significant digits, which is enough
//! for every `f64` to read back to the same bits.

use std::path::Path;

use crate::error::{Error, Result};
use crate::procedures::Trajectory;
use crate::simulation::MetricsReport;

pub const DECISIONS_HEADER: [&str; 7] = ["index", "alpha", "decision", "overshoot", "cost", "rejections", "fdp_hat"];
pub const METRICS_HEADER: [&str; 5] = ["t", "fdr", "fdr_se", "power", "power_se"];

#[inline]
pub fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}

fn writer(path: &Path) -> Result<csv::Writer<std::fs::File>> {
    csv::Writer::from_path(path).map_err(|source| Error::Csv {
        path: path.to_path_buf(),
        source,
    })
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> Error + '_ {
    move |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    }
}

fn flush(mut w: csv::Writer<std::fs::File>, path: &Path) -> Result<()> {
    w.flush().map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// One row per step: `index,alpha,decision,overshoot,cost,rejections,fdp_hat`.
pub fn write_decisions(trajectory: &Trajectory, path: &Path) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(DECISIONS_HEADER).map_err(csv_err(path))?;
    for s in &trajectory.steps {
        let l = &s.ledger;
        w.write_record([
            l.index.to_string(),
            fmt_real(l.alpha_t),
            u8::from(l.decision).to_string(),
            fmt_real(l.overshoot),
            fmt_real(l.cost),
            s.rejections.to_string(),
            fmt_real(s.fdp_hat),
        ])
        .map_err(csv_err(path))?;
    }
    flush(w, path)
}

/// One row per checkpoint: `t,fdr,fdr_se,power,power_se`.
pub fn write_metrics(report: &MetricsReport, path: &Path) -> Result<()> {
    write_metric_rows(
        path,
        &report.checkpoints,
        &report.fdr,
        &report.fdr_se,
        &report.power,
        &report.power_se,
    )
}

/// Metrics rows from parallel columns of equal length.
pub fn write_metric_rows(
    path: &Path,
    t: &[u64],
    fdr: &[f64],
    fdr_se: &[f64],
    power: &[f64],
    power_se: &[f64],
) -> Result<()> {
    for len in [fdr.len(), fdr_se.len(), power.len(), power_se.len()] {
        if len != t.len() {
            return Err(Error::LengthMismatch { left: t.len(), right: len });
        }
    }
    let mut w = writer(path)?;
    w.write_record(METRICS_HEADER).map_err(csv_err(path))?;
    for i in 0..t.len() {
        w.write_record([
            t[i].to_string(),
            fmt_real(fdr[i]),
            fmt_real(fdr_se[i]),
            fmt_real(power[i]),
            fmt_real(power_se[i]),
        ])
        .map_err(csv_err(path))?;
    }
    flush(w, path)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecisionRow {
    pub index: u64,
    pub alpha: f64,
    pub decision: bool,
    pub overshoot: f64,
    pub cost: f64,
    pub rejections: u64,
    pub fdp_hat: f64,
}

/// Reads a file written by [`write_decisions`].
pub fn read_decisions(path: &Path) -> Result<Vec<DecisionRow>> {
    let mut rdr = csv::Reader::from_path(path).map_err(csv_err(path))?;
    let headers = rdr.headers().map_err(csv_err(path))?.clone();
    if headers.iter().ne(DECISIONS_HEADER) {
        return Err(Error::Ingest {
            path: path.to_path_buf(),
            row: 0,
            message: format!("expected header {}", DECISIONS_HEADER.join(",")),
        });
    }
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(csv_err(path))?;
        let bad = |what: &str| Error::Ingest {
            path: path.to_path_buf(),
            row: i + 1,
            message: format!("bad {what}"),
        };
        let real = |k: usize, what: &str| rec[k].parse::<f64>().map_err(|_| bad(what));
        out.push(DecisionRow {
            index: rec[0].parse().map_err(|_| bad("index"))?,
            alpha: real(1, "alpha")?,
            decision: match &rec[2] {
                "0" => false,
                "1" => true,
                _ => return Err(bad("decision")),
            },
            overshoot: real(3, "overshoot")?,
            cost: real(4, "cost")?,
            rejections: rec[5].parse().map_err(|_| bad("rejections"))?,
            fdp_hat: real(6, "fdp_hat")?,
        });
    }
    Ok(out)
}

/// `"<procedure>: <R> discoveries in <T> tests"`.
pub fn summary_line(trajectory: &Trajectory) -> String {
    format!(
        "{}: {} discoveries in {} tests",
        trajectory.procedure,
        trajectory.rejections(),
        trajectory.steps.len()
    )
}

/// One line with the metrics at the last checkpoint.
pub fn metrics_summary_line(report: &MetricsReport) -> String {
    let (fdr, fdr_se, power, power_se) = report.last();
    format!(
        "{}: t={} fdr={fdr:.4} (se {fdr_se:.4}) power={power:.4} (se {power_se:.4}) mean discoveries={:.2} over {} replicates",
        report.procedure.kind,
        report.checkpoints.last().copied().unwrap_or(0),
        report.mean_rejections,
        report.replicates
    )
}
