//! CSV outputs. Every file starts with a header row.

use std::fs;
use std::path::Path;

use sptrace_core::synthetic::SyntheticTruth;
use sptrace_core::theory::Check;
use sptrace_core::{Matrix, ProblemInstance, TracePoint};

use crate::error::{Error, Result};

fn writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    let f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::Writer::from_writer(f))
}

/// Full round-trip precision: 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// `iter,objective,seconds`.
pub fn write_trace(path: &Path, trace: &[TracePoint]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["iter", "objective", "seconds"])?;
    for t in trace {
        w.write_record([t.iter.to_string(), fmt_f64(t.objective), format!("{:.6}", t.seconds)])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// A named check outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckRow {
    pub name: String,
    pub check: Check,
}

/// `check,lhs,rhs,holds`.
pub fn write_checks(path: &Path, rows: &[CheckRow]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["check", "lhs", "rhs", "holds"])?;
    for r in rows {
        w.write_record([
            r.name.clone(),
            fmt_f64(r.check.lhs),
            fmt_f64(r.check.rhs),
            r.check.holds.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// A header row followed by string records.
pub fn write_table(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Dense matrix with header `c0,c1,...`.
pub fn write_matrix(path: &Path, m: &Matrix) -> Result<()> {
    let header: Vec<String> = (0..m.ncols()).map(|j| format!("c{j}")).collect();
    let mut w = writer(path)?;
    w.write_record(&header)?;
    for i in 0..m.nrows() {
        w.write_record(m.row(i).iter().map(|&x| fmt_f64(x)))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Reads a matrix written by [`write_matrix`].
pub fn read_matrix(path: &Path) -> Result<Matrix> {
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::from(e).in_file(path))?;
    let cols = r.headers()?.len();
    let mut values = Vec::new();
    let mut rows = 0;
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        if rec.len() != cols {
            return Err(Error::Parse {
                line: i + 2,
                message: format!("expected {cols} fields, found {}", rec.len()),
            }
            .in_file(path));
        }
        for field in rec.iter() {
            values.push(field.trim().parse::<f64>().map_err(|_| {
                Error::Parse {
                    line: i + 2,
                    message: format!("{field:?} is not a number"),
                }
                .in_file(path)
            })?);
        }
        rows += 1;
    }
    Ok(Matrix::from_row_slice(rows, cols, &values))
}

/// Writes `gx.csv`, `y.csv` and `theta_star.csv` into `dir`.
pub fn export_synthetic(dir: &Path, p: &ProblemInstance, truth: &SyntheticTruth) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_matrix(&dir.join("gx.csv"), p.gx())?;
    write_matrix(&dir.join("y.csv"), p.y())?;
    write_matrix(&dir.join("theta_star.csv"), &truth.theta_star)
}
