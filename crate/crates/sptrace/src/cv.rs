//! Nested cross-validation over a weight grid.
//!
//! Each outer repeat splits the data into train and test rows. The weights
//! are selected on the training rows alone by inner k-fold validation AUC,
//! refitted on all training rows and scored on the test rows.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use sptrace_core::dataset::{kfold, split_train_test, LabeledDataset};
use sptrace_core::metrics::{auc, macro_f1, micro_f1, predict_sign};
use sptrace_core::{NullClock, ProblemInstance, RegPair, SolverConfig};

use crate::error::{Error, Result};
use crate::solve::{instance, prepare, scores, Solver};

/// `{0.01, …, 0.10} ∪ {0.2, …, 1.0} ∪ {2, 4, …, 20}`.
pub fn default_grid() -> Vec<f64> {
    let mut g: Vec<f64> = (1..=10).map(|i| i as f64 / 100.0).collect();
    g.extend((2..=10).map(|i| i as f64 / 10.0));
    g.extend((1..=10).map(|i| 2.0 * i as f64));
    g
}

/// Which weights are searched.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, clap::ValueEnum)]
pub enum Penalty {
    /// Both weights over the grid.
    #[value(name = "sparse-trace")]
    SparseTrace,
    /// Trace norm only (`β = 0`).
    Trace,
    /// ℓ1 only (`α = 0`).
    #[value(name = "l1")]
    OneNorm,
}

impl Penalty {
    pub const ALL: [Penalty; 3] = [Penalty::SparseTrace, Penalty::Trace, Penalty::OneNorm];

    pub fn name(self) -> &'static str {
        match self {
            Penalty::SparseTrace => "sparse-trace",
            Penalty::Trace => "trace",
            Penalty::OneNorm => "l1",
        }
    }

    /// Candidate weights in grid order (α-major for the crossed grid).
    pub fn pairs(self, grid: &[f64]) -> Result<Vec<RegPair>> {
        let mut out = Vec::new();
        match self {
            Penalty::SparseTrace => {
                for &a in grid {
                    for &b in grid {
                        out.push(RegPair::new(a, b)?);
                    }
                }
            }
            Penalty::Trace => {
                for &a in grid {
                    out.push(RegPair::new(a, 0.0)?);
                }
            }
            Penalty::OneNorm => {
                for &b in grid {
                    out.push(RegPair::new(0.0, b)?);
                }
            }
        }
        Ok(out)
    }
}

impl fmt::Display for Penalty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

impl FromStr for Penalty {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Penalty::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| format!("unknown penalty {s:?} (expected sparse-trace, trace or l1)"))
    }
}

#[derive(Debug, Clone)]
pub struct CvOptions {
    pub grid: Vec<f64>,
    pub folds: usize,
    pub repeats: usize,
    pub train_frac: f64,
    pub seed: u64,
    pub standardize: bool,
    pub solver: Solver,
    pub solver_cfg: SolverConfig,
}

impl Default for CvOptions {
    fn default() -> Self {
        Self {
            grid: default_grid(),
            folds: 3,
            repeats: 10,
            train_frac: 0.1,
            seed: 0,
            standardize: false,
            solver: Solver::Ag,
            solver_cfg: SolverConfig::default(),
        }
    }
}

impl CvOptions {
    pub fn validate(&self) -> Result<()> {
        if self.grid.is_empty() {
            return Err(Error::Usage("the weight grid is empty".into()));
        }
        if let Some(w) = self.grid.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
            return Err(Error::Usage(format!("grid value {w} must be finite and >= 0")));
        }
        if self.folds < 2 {
            return Err(Error::Usage(format!("folds must be >= 2, got {}", self.folds)));
        }
        if self.repeats == 0 {
            return Err(Error::Usage("repeats must be >= 1".into()));
        }
        if !(self.train_frac > 0.0 && self.train_frac < 1.0) {
            return Err(Error::Usage(format!(
                "train fraction must lie in (0, 1), got {}",
                self.train_frac
            )));
        }
        Ok(self.solver_cfg.validate()?)
    }
}

/// Outcome of the inner search on one training set.
#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub best: RegPair,
    pub index: usize,
    /// Mean validation AUC per candidate, in candidate order. Empty when a
    /// single candidate was returned without validation.
    pub scores: Vec<f64>,
}

/// Validation AUC of one candidate, fitted from zero.
fn fit_and_score(p: &ProblemInstance, val: &LabeledDataset, pair: RegPair, opts: &CvOptions) -> Result<f64> {
    let res = opts.solver.solve(p, pair, &opts.solver_cfg, None, &NullClock)?;
    Ok(auc(&scores(&val.features, &res.theta)?, &val.labels)?.value)
}

/// Picks the candidate with the highest mean validation AUC over `folds`
/// folds of `train`. Ties go to the earliest candidate.
pub fn select(train: &LabeledDataset, pairs: &[RegPair], opts: &CvOptions, seed: u64) -> Result<Selection> {
    match pairs {
        [] => return Err(Error::Usage("the weight grid is empty".into())),
        [only] => {
            return Ok(Selection {
                best: *only,
                index: 0,
                scores: Vec::new(),
            })
        }
        _ => {}
    }
    if train.len() < opts.folds {
        return Err(Error::Usage(format!(
            "{} training rows cannot be split into {} folds",
            train.len(),
            opts.folds
        )));
    }
    let folds = kfold(train.len(), opts.folds, seed)?;
    let splits: Vec<(ProblemInstance, LabeledDataset)> = folds
        .iter()
        .map(|val| {
            let rest: Vec<usize> = (0..train.len()).filter(|i| val.binary_search(i).is_err()).collect();
            let (fit, val) = prepare(&train.subset(&rest), &train.subset(val), opts.standardize)?;
            Ok((instance(&fit)?, val))
        })
        .collect::<Result<_>>()?;
    let jobs: Vec<(usize, usize)> = (0..splits.len())
        .flat_map(|f| (0..pairs.len()).map(move |c| (f, c)))
        .collect();
    let results: Vec<Result<f64>> = jobs
        .par_iter()
        .map(|&(f, c)| fit_and_score(&splits[f].0, &splits[f].1, pairs[c], opts))
        .collect();
    // Sums run in job order, so the result does not depend on scheduling.
    let mut mean = vec![0.0; pairs.len()];
    for (&(_, c), r) in jobs.iter().zip(results) {
        mean[c] += r? / splits.len() as f64;
    }
    let mut index = 0;
    for (i, &s) in mean.iter().enumerate() {
        if s > mean[index] {
            index = i;
        }
    }
    Ok(Selection {
        best: pairs[index],
        index,
        scores: mean,
    })
}

/// Test-set scores of one outer repeat.
#[derive(Debug, Clone, PartialEq)]
pub struct CvRow {
    pub repeat: usize,
    pub penalty: Penalty,
    pub reg: RegPair,
    pub validation_auc: Option<f64>,
    pub auc: f64,
    pub macro_f1: f64,
    pub micro_f1: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub penalty: Penalty,
    pub mean_auc: f64,
    pub std_auc: f64,
    pub mean_macro_f1: f64,
    pub mean_micro_f1: f64,
}

/// Mean and sample standard deviation.
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

pub fn summarize(rows: &[CvRow], penalty: Penalty) -> Option<Summary> {
    let rows: Vec<&CvRow> = rows.iter().filter(|r| r.penalty == penalty).collect();
    if rows.is_empty() {
        return None;
    }
    let aucs: Vec<f64> = rows.iter().map(|r| r.auc).collect();
    let (mean_auc, std_auc) = mean_std(&aucs);
    let n = rows.len() as f64;
    Some(Summary {
        penalty,
        mean_auc,
        std_auc,
        mean_macro_f1: rows.iter().map(|r| r.macro_f1).sum::<f64>() / n,
        mean_micro_f1: rows.iter().map(|r| r.micro_f1).sum::<f64>() / n,
    })
}

/// Runs every outer repeat for every penalty. Repeat `r` splits with seed
/// `seed + r` and draws its inner folds from the same seed.
pub fn run_cv(ds: &LabeledDataset, penalties: &[Penalty], opts: &CvOptions) -> Result<Vec<CvRow>> {
    opts.validate()?;
    let mut rows = Vec::new();
    for repeat in 0..opts.repeats {
        let seed = opts.seed.wrapping_add(repeat as u64);
        let (train, test) = split_train_test(ds, opts.train_frac, seed)?;
        for &penalty in penalties {
            let pairs = penalty.pairs(&opts.grid)?;
            let sel = select(&train, &pairs, opts, seed)?;
            let (tr, te) = prepare(&train, &test, opts.standardize)?;
            let res = opts
                .solver
                .solve(&instance(&tr)?, sel.best, &opts.solver_cfg, None, &NullClock)?;
            let s = scores(&te.features, &res.theta)?;
            let pred = predict_sign(&s);
            rows.push(CvRow {
                repeat,
                penalty,
                reg: sel.best,
                validation_auc: sel.scores.get(sel.index).copied(),
                auc: auc(&s, &te.labels)?.value,
                macro_f1: macro_f1(&pred, &te.labels)?,
                micro_f1: micro_f1(&pred, &te.labels)?,
            });
        }
    }
    Ok(rows)
}
