//! Reading evidence streams and calibration scores from CSV.

use std::path::{Path, PathBuf};

use crate::calibration::{conformal_evalue, vovk_p_to_e, CalibrationSet};
use crate::cli::config::Calibrator;
use crate::error::{Error, Result};
use crate::types::{EvidenceKind, Observation};

/// Which evidence column the file carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Column {
    P,
    E,
    /// Non-conformity scores, turned into e-values against a calibration set.
    Score,
}

impl Column {
    fn name(self) -> &'static str {
        match self {
            Column::P => "p",
            Column::E => "e",
            Column::Score => "score",
        }
    }
}

/// A validated stream before calibration.
#[derive(Debug, Clone, PartialEq)]
pub struct RawStream {
    pub path: PathBuf,
    pub column: Column,
    pub index: Vec<u64>,
    pub values: Vec<f64>,
    pub truth: Option<Vec<bool>>,
}

fn csv_err(path: &Path, source: csv::Error) -> Error {
    Error::Csv {
        path: path.to_path_buf(),
        source,
    }
}

fn row_err(path: &Path, row: usize, message: impl Into<String>) -> Error {
    Error::Ingest {
        path: path.to_path_buf(),
        row,
        message: message.into(),
    }
}

fn open(path: &Path) -> Result<csv::Reader<std::fs::File>> {
    let file = std::fs::File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file))
}

/// Reads a stream file. Rows are numbered from 1, header excluded.
pub fn read_stream(path: &Path) -> Result<RawStream> {
    let mut rdr = open(path)?;
    let headers = rdr.headers().map_err(|e| csv_err(path, e))?.clone();
    let find = |name: &str| headers.iter().position(|h| h == name);

    let present: Vec<(Column, usize)> = [Column::P, Column::E, Column::Score]
        .into_iter()
        .filter_map(|c| find(c.name()).map(|i| (c, i)))
        .collect();
    let (column, col) = match present.as_slice() {
        [one] => *one,
        [] => return Err(row_err(path, 0, "missing evidence column: need one of `p`, `e`, `score`")),
        _ => return Err(row_err(path, 0, "more than one evidence column among `p`, `e`, `score`")),
    };
    let index_col = find("index");
    let truth_col = find("truth");

    let mut out = RawStream {
        path: path.to_path_buf(),
        column,
        index: Vec::new(),
        values: Vec::new(),
        truth: truth_col.map(|_| Vec::new()),
    };
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 1;
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let field = |c: usize| rec.get(c).unwrap_or("");

        let index = match index_col {
            Some(c) => field(c)
                .parse::<u64>()
                .map_err(|_| row_err(path, row, format!("bad index `{}`", field(c))))?,
            None => row as u64,
        };
        if let Some(&prev) = out.index.last() {
            if index <= prev {
                return Err(row_err(path, row, format!("index {index} does not increase past {prev}")));
            }
        }

        let raw = field(col);
        let v: f64 = raw
            .parse()
            .map_err(|_| row_err(path, row, format!("cannot parse {} value `{raw}`", column.name())))?;
        match column {
            Column::P if !(v > 0.0 && v <= 1.0) => {
                return Err(row_err(path, row, format!("p = {v} outside (0, 1]")))
            }
            Column::E if v.is_nan() || v < 0.0 => {
                return Err(row_err(path, row, format!("e = {v} must be non-negative")))
            }
            Column::Score if !(v.is_finite() && v >= 0.0) => {
                return Err(row_err(path, row, format!("score = {v} must be finite and non-negative")))
            }
            _ => {}
        }

        if let (Some(c), Some(truth)) = (truth_col, out.truth.as_mut()) {
            truth.push(match field(c) {
                "0" => false,
                "1" => true,
                other => return Err(row_err(path, row, format!("truth must be 0 or 1, got `{other}`"))),
            });
        }
        out.index.push(index);
        out.values.push(v);
    }
    Ok(out)
}

/// Reads the `score` column of a calibration file.
pub fn read_calibration(path: &Path) -> Result<CalibrationSet> {
    let mut rdr = open(path)?;
    let headers = rdr.headers().map_err(|e| csv_err(path, e))?.clone();
    let col = headers
        .iter()
        .position(|h| h == "score")
        .ok_or_else(|| row_err(path, 0, "missing `score` column"))?;
    let mut scores = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let raw = rec.get(col).unwrap_or("");
        let v: f64 = raw
            .parse()
            .map_err(|_| row_err(path, i + 1, format!("cannot parse score `{raw}`")))?;
        scores.push(v);
    }
    CalibrationSet::new(scores).map_err(|e| row_err(path, 0, e.to_string()))
}

impl RawStream {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Observations of kind `want`, converting with `calibrator` where needed.
    pub fn observations(
        &self,
        want: EvidenceKind,
        calibrator: Calibrator,
        cal: Option<&CalibrationSet>,
    ) -> Result<Vec<Observation>> {
        let path = &self.path;
        let mut out = Vec::with_capacity(self.len());
        for (k, (&idx, &v)) in self.index.iter().zip(&self.values).enumerate() {
            let row = k + 1;
            let obs = match (want, self.column, calibrator) {
                (EvidenceKind::PValue, Column::P, _) => Observation::p_value(idx, v)?,
                (EvidenceKind::EValue, Column::E, Calibrator::None) => Observation::e_value(idx, v)?,
                (EvidenceKind::EValue, Column::P, Calibrator::Vovk) => {
                    Observation::e_value(idx, vovk_p_to_e(v)?)?
                }
                (EvidenceKind::EValue, Column::Score, Calibrator::Conformal) => {
                    let cal = cal.ok_or_else(|| row_err(path, 0, "conformal calibrator without calibration scores"))?;
                    let e = conformal_evalue(v, cal).map_err(|e| row_err(path, row, e.to_string()))?;
                    Observation::e_value(idx, e)?
                }
                (want, col, calib) => {
                    return Err(row_err(
                        path,
                        0,
                        format!("cannot build {want}s from column `{}` with calibrator {calib:?}", col.name()),
                    ))
                }
            };
            out.push(match &self.truth {
                Some(t) => obs.with_truth(t[k]),
                None => obs,
            });
        }
        Ok(out)
    }
}

/// Reads `path` and returns its observations: e-values when a calibrator
/// applies, otherwise the file's own kind.
pub fn ingest_stream(path: &Path, calibrator: Calibrator, cal: Option<&CalibrationSet>) -> Result<Vec<Observation>> {
    let raw = read_stream(path)?;
    let kind = match (raw.column, calibrator) {
        (Column::P, Calibrator::None) => EvidenceKind::PValue,
        _ => EvidenceKind::EValue,
    };
    raw.observations(kind, calibrator, cal)
}
