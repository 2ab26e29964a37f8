//! Multi-label classification measures on the 0–100 scale.
//!
//! Labels are `±1`. Scores are thresholded at zero for the F1 measures,
//! with a score of exactly zero predicted negative.

use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::types::Matrix;

/// Macro-averaged AUC together with the number of label columns that were
/// skipped because they lack a positive or a negative example.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Auc {
    pub value: f64,
    pub skipped: usize,
}

fn same_shape(a: &Matrix, b: &Matrix) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(Error::DimensionMismatch {
            field: "labels",
            expected: a.shape(),
            found: b.shape(),
        });
    }
    Ok(())
}

/// `+1` for a strictly positive score, `−1` otherwise.
pub fn predict_sign(scores: &Matrix) -> Matrix {
    scores.map(|s| if s > 0.0 { 1.0 } else { -1.0 })
}

/// ROC AUC of one column through the rank statistic: the fraction of
/// positive/negative pairs ordered correctly, ties counting one half.
/// `None` when either class is empty.
pub fn auc_column(scores: &[f64], labels: &[f64]) -> Option<f64> {
    let mut pairs: Vec<(f64, bool)> = scores.iter().zip(labels).map(|(&s, &l)| (s, l > 0.0)).collect();
    let n_pos = pairs.iter().filter(|p| p.1).count();
    let n_neg = pairs.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return None;
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    // Sum of midranks (1-based) of the positives.
    let mut rank_sum = 0.0;
    let mut i = 0;
    while i < pairs.len() {
        let mut j = i;
        while j + 1 < pairs.len() && pairs[j + 1].0 == pairs[i].0 {
            j += 1;
        }
        let midrank = (i + j) as f64 / 2.0 + 1.0;
        let pos_in_group = pairs[i..=j].iter().filter(|p| p.1).count();
        rank_sum += midrank * pos_in_group as f64;
        i = j + 1;
    }
    let (np, nn) = (n_pos as f64, n_neg as f64);
    Some((rank_sum - np * (np + 1.0) / 2.0) / (np * nn))
}

/// Per-label AUC averaged over the label columns that have both classes.
pub fn auc(scores: &Matrix, labels: &Matrix) -> Result<Auc> {
    same_shape(scores, labels)?;
    let mut total = 0.0;
    let mut valid = 0usize;
    for j in 0..scores.ncols() {
        let s: Vec<f64> = scores.column(j).iter().copied().collect();
        let l: Vec<f64> = labels.column(j).iter().copied().collect();
        if let Some(a) = auc_column(&s, &l) {
            total += a;
            valid += 1;
        }
    }
    if valid == 0 {
        return Err(invalid(
            "labels",
            "no label column has both a positive and a negative example",
        ));
    }
    Ok(Auc {
        value: 100.0 * total / valid as f64,
        skipped: scores.ncols() - valid,
    })
}

#[derive(Debug, Clone, Copy, Default)]
struct Counts {
    tp: usize,
    fp: usize,
    fn_: usize,
}

impl Counts {
    fn f1(self) -> f64 {
        let denom = 2 * self.tp + self.fp + self.fn_;
        if self.tp == 0 {
            0.0
        } else {
            2.0 * self.tp as f64 / denom as f64
        }
    }
}

fn column_counts(pred: &Matrix, labels: &Matrix) -> Result<Vec<Counts>> {
    same_shape(pred, labels)?;
    Ok((0..pred.ncols())
        .map(|j| {
            let mut c = Counts::default();
            for (&p, &l) in pred.column(j).iter().zip(labels.column(j).iter()) {
                match (p > 0.0, l > 0.0) {
                    (true, true) => c.tp += 1,
                    (true, false) => c.fp += 1,
                    (false, true) => c.fn_ += 1,
                    (false, false) => {}
                }
            }
            c
        })
        .collect())
}

/// Mean of the per-label F1 scores.
pub fn macro_f1(pred: &Matrix, labels: &Matrix) -> Result<f64> {
    let counts = column_counts(pred, labels)?;
    if counts.is_empty() {
        return Ok(0.0);
    }
    Ok(100.0 * counts.iter().map(|c| c.f1()).sum::<f64>() / counts.len() as f64)
}

/// F1 of the true/false positive and false negative counts pooled over all
/// labels.
pub fn micro_f1(pred: &Matrix, labels: &Matrix) -> Result<f64> {
    let pooled = column_counts(pred, labels)?
        .into_iter()
        .fold(Counts::default(), |a, c| Counts {
            tp: a.tp + c.tp,
            fp: a.fp + c.fp,
            fn_: a.fn_ + c.fn_,
        });
    Ok(100.0 * pooled.f1())
}
