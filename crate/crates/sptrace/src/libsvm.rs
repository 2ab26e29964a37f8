//! LIBSVM multi-label text format.
//!
//! Each line is `l1,l2,... idx:val idx:val ...` with integer labels and
//! 1-based feature indices. The label field may be empty. Missing features
//! are zero. Labels become `+1` where listed and `−1` elsewhere, with label
//! columns ordered by the sorted union of all labels seen.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use sptrace_core::dataset::LabeledDataset;
use sptrace_core::Matrix;

use crate::error::{Error, Result};

/// One parsed line.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub labels: Vec<i64>,
    /// `(0-based index, value)` pairs in file order.
    pub features: Vec<(usize, f64)>,
}

/// Lines of a file before they are laid out as dense matrices.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawLibsvm {
    pub rows: Vec<Row>,
}

impl RawLibsvm {
    /// One past the largest feature index seen.
    pub fn feature_count(&self) -> usize {
        self.rows
            .iter()
            .flat_map(|r| r.features.iter().map(|&(i, _)| i + 1))
            .max()
            .unwrap_or(0)
    }

    /// Sorted union of the labels seen.
    pub fn label_set(&self) -> Vec<i64> {
        let set: BTreeSet<i64> = self.rows.iter().flat_map(|r| r.labels.iter().copied()).collect();
        set.into_iter().collect()
    }

    /// Dense dataset with `d` feature columns and the given label columns.
    pub fn to_dataset(&self, d: usize, labels: &[i64]) -> Result<LabeledDataset> {
        let n = self.rows.len();
        let mut features = Matrix::zeros(n, d);
        let mut y = Matrix::from_element(n, labels.len(), -1.0);
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, v) in &row.features {
                if j >= d {
                    return Err(Error::Parse {
                        line: i + 1,
                        message: format!("feature index {} exceeds dimension {d}", j + 1),
                    });
                }
                features[(i, j)] = v;
            }
            for l in &row.labels {
                let col = labels.binary_search(l).map_err(|_| Error::Parse {
                    line: i + 1,
                    message: format!("label {l} is not in the label set"),
                })?;
                y[(i, col)] = 1.0;
            }
        }
        let names = labels.iter().map(|l| l.to_string()).collect();
        Ok(LabeledDataset::new(features, y, names)?)
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn parse_line(lineno: usize, line: &str) -> Result<Option<Row>> {
    let line = line.trim_end_matches(['\r', '\n']);
    if line.trim().is_empty() {
        return Ok(None);
    }
    let mut tokens = line.split_ascii_whitespace().peekable();
    // A leading token without ':' is the label field; a line starting with
    // whitespace or a feature has no labels.
    let mut labels = Vec::new();
    let starts_with_space = line.starts_with([' ', '\t']);
    if !starts_with_space {
        if let Some(tok) = tokens.peek() {
            if !tok.contains(':') {
                for part in tokens.next().unwrap_or_default().split(',').filter(|s| !s.is_empty()) {
                    let l = part
                        .parse::<i64>()
                        .map_err(|_| parse_err(lineno, format!("label {part:?} is not an integer")))?;
                    labels.push(l);
                }
            }
        }
    }
    let mut features = Vec::new();
    for tok in tokens {
        let (idx, val) = tok
            .split_once(':')
            .ok_or_else(|| parse_err(lineno, format!("expected index:value, found {tok:?}")))?;
        let idx: i64 = idx
            .parse()
            .map_err(|_| parse_err(lineno, format!("feature index {idx:?} is not an integer")))?;
        if idx <= 0 {
            return Err(parse_err(lineno, format!("feature index {idx} must be >= 1")));
        }
        let val: f64 = val
            .parse()
            .map_err(|_| parse_err(lineno, format!("feature value {val:?} is not a number")))?;
        if !val.is_finite() {
            return Err(parse_err(lineno, format!("feature value {val} is not finite")));
        }
        features.push((idx as usize - 1, val));
    }
    Ok(Some(Row { labels, features }))
}

/// Reads every line of `source`.
pub fn parse_raw(source: impl Read) -> Result<RawLibsvm> {
    let reader = BufReader::new(source);
    let mut rows = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| parse_err(i + 1, e.to_string()))?;
        if let Some(row) = parse_line(i + 1, &line)? {
            rows.push(row);
        }
    }
    Ok(RawLibsvm { rows })
}

/// Parses a multi-label LIBSVM stream with dimensions taken from its content.
pub fn parse_libsvm_multilabel(source: impl Read) -> Result<LabeledDataset> {
    let raw = parse_raw(source)?;
    raw.to_dataset(raw.feature_count(), &raw.label_set())
}

/// Reads several files and lays them out with a shared feature dimension
/// and label set, then concatenates the rows in argument order.
pub fn read_libsvm_files<P: AsRef<Path>>(paths: &[P]) -> Result<LabeledDataset> {
    if paths.is_empty() {
        return Err(Error::Usage("no data file given".into()));
    }
    let mut raws = Vec::with_capacity(paths.len());
    for p in paths {
        let p = p.as_ref();
        let file = File::open(p).map_err(|e| Error::io(p, e))?;
        raws.push(parse_raw(file).map_err(|e| e.in_file(p))?);
    }
    let d = raws.iter().map(RawLibsvm::feature_count).max().unwrap_or(0);
    let labels: Vec<i64> = raws
        .iter()
        .flat_map(|r| r.label_set())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let mut out: Option<LabeledDataset> = None;
    for (raw, p) in raws.iter().zip(paths) {
        let ds = raw.to_dataset(d, &labels).map_err(|e| e.in_file(p.as_ref()))?;
        out = Some(match out {
            None => ds,
            Some(acc) => acc.concat(&ds)?,
        });
    }
    Ok(out.expect("at least one path"))
}

/// Writes `ds` in the multi-label format. Label names must be integers.
/// Zero features are omitted; values use the shortest representation that
/// parses back to the same `f64`.
pub fn write_libsvm(ds: &LabeledDataset, mut sink: impl Write) -> Result<()> {
    let names: Vec<i64> = ds
        .label_names
        .iter()
        .map(|s| {
            s.parse::<i64>()
                .map_err(|_| Error::Usage(format!("label name {s:?} is not an integer")))
        })
        .collect::<Result<_>>()?;
    let mut line = String::new();
    for i in 0..ds.len() {
        line.clear();
        let positives: Vec<String> = (0..ds.label_count())
            .filter(|&j| ds.labels[(i, j)] > 0.0)
            .map(|j| names[j].to_string())
            .collect();
        line.push_str(&positives.join(","));
        for j in 0..ds.feature_count() {
            let v = ds.features[(i, j)];
            if v != 0.0 {
                let _ = write!(line, " {}:{}", j + 1, v);
            }
        }
        line.push('\n');
        sink.write_all(line.as_bytes()).map_err(|e| Error::io("<output>", e))?;
    }
    Ok(())
}
