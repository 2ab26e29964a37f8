//! In-memory multi-label datasets: splitting, fold assignment and feature
//! standardization.

use alloc::string::String;
use alloc::vec::Vec;

use num_traits::Float;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Error, Result};
use crate::types::{check_finite, Matrix};

/// Features with `±1` label rows.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub features: Matrix,
    pub labels: Matrix,
    pub label_names: Vec<String>,
}

impl LabeledDataset {
    pub fn new(features: Matrix, labels: Matrix, label_names: Vec<String>) -> Result<Self> {
        if labels.nrows() != features.nrows() {
            return Err(Error::DimensionMismatch {
                field: "labels",
                expected: (features.nrows(), labels.ncols()),
                found: labels.shape(),
            });
        }
        if label_names.len() != labels.ncols() {
            return Err(Error::DimensionMismatch {
                field: "label_names",
                expected: (labels.ncols(), 1),
                found: (label_names.len(), 1),
            });
        }
        check_finite("features", &features)?;
        if labels.iter().any(|&l| l != 1.0 && l != -1.0) {
            return Err(invalid("labels", "entries must be +1 or -1"));
        }
        Ok(Self {
            features,
            labels,
            label_names,
        })
    }

    pub fn len(&self) -> usize {
        self.features.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn feature_count(&self) -> usize {
        self.features.ncols()
    }

    pub fn label_count(&self) -> usize {
        self.labels.ncols()
    }

    /// The listed rows, in the given order.
    pub fn subset(&self, rows: &[usize]) -> Self {
        Self {
            features: self.features.select_rows(rows),
            labels: self.labels.select_rows(rows),
            label_names: self.label_names.clone(),
        }
    }

    /// Rows of `self` followed by rows of `other`. Label sets must agree.
    pub fn concat(&self, other: &Self) -> Result<Self> {
        if self.label_names != other.label_names {
            return Err(invalid("label_names", "datasets have different label sets"));
        }
        if self.feature_count() != other.feature_count() {
            return Err(Error::DimensionMismatch {
                field: "features",
                expected: (other.len(), self.feature_count()),
                found: other.features.shape(),
            });
        }
        let stack = |a: &Matrix, b: &Matrix| {
            Matrix::from_fn(a.nrows() + b.nrows(), a.ncols(), |i, j| {
                if i < a.nrows() {
                    a[(i, j)]
                } else {
                    b[(i - a.nrows(), j)]
                }
            })
        };
        Ok(Self {
            features: stack(&self.features, &other.features),
            labels: stack(&self.labels, &other.labels),
            label_names: self.label_names.clone(),
        })
    }
}

/// `0..n` shuffled by a generator seeded with `seed`.
pub fn permutation(n: usize, seed: u64) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    idx
}

/// Uniformly random partition into `⌈n · train_frac⌉` training rows and the
/// remainder. Rows keep their original relative order within each side.
pub fn split_train_test(ds: &LabeledDataset, train_frac: f64, seed: u64) -> Result<(LabeledDataset, LabeledDataset)> {
    if !(train_frac > 0.0 && train_frac < 1.0) {
        return Err(invalid("train_frac", "must lie strictly between 0 and 1"));
    }
    let n = ds.len();
    let n_train = Float::ceil(n as f64 * train_frac) as usize;
    if n_train == 0 || n_train >= n {
        return Err(invalid("train_frac", "split leaves one side empty"));
    }
    let perm = permutation(n, seed);
    let mut train: Vec<usize> = perm[..n_train].to_vec();
    let mut test: Vec<usize> = perm[n_train..].to_vec();
    train.sort_unstable();
    test.sort_unstable();
    Ok((ds.subset(&train), ds.subset(&test)))
}

/// Assigns `n` rows to `folds` folds of near-equal size. Entry `i` of the
/// result is the row list of fold `i`, each sorted.
pub fn kfold(n: usize, folds: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if folds < 2 {
        return Err(invalid("folds", "must be >= 2"));
    }
    if n < folds {
        return Err(invalid("folds", "more folds than rows"));
    }
    let mut out = alloc::vec![Vec::new(); folds];
    for (pos, row) in permutation(n, seed).into_iter().enumerate() {
        out[pos % folds].push(row);
    }
    for f in &mut out {
        f.sort_unstable();
    }
    Ok(out)
}

/// Per-column z-scoring fitted on one feature matrix and applied to others.
/// Columns with zero spread are centred only.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Standardizer {
    pub fn fit(features: &Matrix) -> Self {
        let n = features.nrows().max(1) as f64;
        let mut mean = Vec::with_capacity(features.ncols());
        let mut scale = Vec::with_capacity(features.ncols());
        for col in features.column_iter() {
            let m = col.sum() / n;
            let var = col.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / n;
            let sd = Float::sqrt(var);
            mean.push(m);
            scale.push(if sd > 0.0 { sd } else { 1.0 });
        }
        Self { mean, scale }
    }

    pub fn apply(&self, features: &Matrix) -> Result<Matrix> {
        if features.ncols() != self.mean.len() {
            return Err(Error::DimensionMismatch {
                field: "features",
                expected: (features.nrows(), self.mean.len()),
                found: features.shape(),
            });
        }
        Ok(Matrix::from_fn(features.nrows(), features.ncols(), |i, j| {
            (features[(i, j)] - self.mean[j]) / self.scale[j]
        }))
    }
}
