//! Batch runs of the structural inequalities on random instances.
//!
//! Every report row reads `lhs ≤ rhs`. Rows that aggregate many random
//! pairs carry the worst case, and `holds` is true only when every pair
//! passed.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use sptrace_core::ag::ag_solve;
use sptrace_core::linalg::{singular_values, spectral_norm};
use sptrace_core::synthetic::generate_synthetic;
use sptrace_core::theory::{
    check_l1_bound, check_lemma1, check_trace_bound, concentration_bound, concentration_lambda, concentration_mc,
    decompose_s0_s1, Check,
};
use sptrace_core::{Matrix, RegPair, SolverConfig};

use crate::csvio::CheckRow;
use crate::error::{Error, Result};

/// Relative tolerance of the decomposition assertions.
pub const DECOMPOSITION_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, clap::ValueEnum)]
pub enum CheckKind {
    S0s1,
    TraceBound,
    L1Bound,
    Concentration,
    Lemma1,
}

impl CheckKind {
    pub const ALL: [CheckKind; 5] = [
        CheckKind::S0s1,
        CheckKind::TraceBound,
        CheckKind::L1Bound,
        CheckKind::Concentration,
        CheckKind::Lemma1,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CheckKind::S0s1 => "s0s1",
            CheckKind::TraceBound => "trace-bound",
            CheckKind::L1Bound => "l1-bound",
            CheckKind::Concentration => "concentration",
            CheckKind::Lemma1 => "lemma1",
        }
    }
}

impl fmt::Display for CheckKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

/// Matrix shape written `HxK`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Size {
    pub h: usize,
    pub k: usize,
}

impl fmt::Display for Size {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.h, self.k)
    }
}

impl FromStr for Size {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let (h, k) = s
            .split_once(['x', 'X'])
            .ok_or_else(|| format!("expected HxK, found {s:?}"))?;
        let parse = |v: &str| {
            v.trim()
                .parse::<usize>()
                .map_err(|_| format!("expected HxK, found {s:?}"))
        };
        let (h, k) = (parse(h)?, parse(k)?);
        if h < 2 || k < 2 {
            return Err(format!("size {s:?}: both dimensions must be >= 2"));
        }
        Ok(Size { h, k })
    }
}

#[derive(Debug, Clone)]
pub struct CheckOptions {
    pub sizes: Vec<Size>,
    /// Random pairs per size for the deterministic inequalities and Monte
    /// Carlo trials for the concentration check (at least 1000).
    pub trials: usize,
    /// Noise seeds per size for the solver-output inequality.
    pub lemma1_seeds: usize,
    pub seed: u64,
}

impl Default for CheckOptions {
    fn default() -> Self {
        Self {
            sizes: vec![Size { h: 6, k: 5 }, Size { h: 20, k: 10 }],
            trials: 1000,
            lemma1_seeds: 20,
            seed: 0,
        }
    }
}

/// Deviation parameter of the concentration and solver-output checks.
pub const CHECK_T: f64 = 0.5;
/// Noise level of the concentration and solver-output checks.
pub const CHECK_SIGMA_W: f64 = 0.1;

fn gaussian(rows: usize, cols: usize, rng: &mut impl Rng) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

fn low_rank(h: usize, k: usize, r: usize, rng: &mut impl Rng) -> Matrix {
    gaussian(h, r, rng) * gaussian(k, r, rng).transpose()
}

fn rng_for(seed: u64, kind: CheckKind, size_index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((kind as u64) << 32) | size_index as u64);
    rng
}

fn row(name: String, lhs: f64, rhs: f64, holds: bool) -> CheckRow {
    CheckRow {
        name,
        check: Check { lhs, rhs, holds },
    }
}

/// Worst value of each decomposition assertion over random pairs, as a
/// residual against its tolerance.
fn s0s1_rows(size: Size, pairs: usize, rng: &mut impl Rng) -> Result<Vec<CheckRow>> {
    let Size { h, k } = size;
    let mut worst = [0.0f64; 5];
    let mut tol = [0.0f64; 5];
    let mut holds = [true; 5];
    let mut rank_excess = i64::MIN;
    for _ in 0..pairs {
        let r = rng.random_range(0..=h.min(k));
        let theta = low_rank(h, k, r, rng);
        let delta = gaussian(h, k, rng);
        let (s0, s1) = decompose_s0_s1(&theta, &delta)?;
        let scale = 1.0 + theta.norm() + delta.norm();
        let tn = |m: &Matrix| -> Result<f64> { Ok(singular_values(m)?.iter().sum()) };
        let s0_rank = singular_values(&s0)?
            .iter()
            .filter(|&&s| s > DECOMPOSITION_TOL * scale)
            .count();
        let residuals = [
            (&s0 + &s1 - &delta).norm() / scale,
            (s0_rank as f64 - 2.0 * r as f64).max(0.0),
            (&theta * s1.transpose()).norm() / (scale * scale),
            (theta.transpose() * &s1).norm() / (scale * scale),
            (tn(&(&theta + &s1))? - tn(&theta)? - tn(&s1)?).abs() / scale,
        ];
        rank_excess = rank_excess.max(s0_rank as i64 - 2 * r as i64);
        for i in 0..5 {
            let t = if i == 1 { 0.0 } else { DECOMPOSITION_TOL };
            tol[i] = t;
            worst[i] = worst[i].max(residuals[i]);
            holds[i] &= residuals[i] <= t;
        }
    }
    let names = ["sum", "rank", "row-orthogonal", "column-orthogonal", "additive"];
    Ok((0..5)
        .map(|i| {
            let lhs = if i == 1 { rank_excess as f64 } else { worst[i] };
            row(format!("s0s1/{} {size}", names[i]), lhs, tol[i], holds[i])
        })
        .collect())
}

/// Worst `lhs − rhs` over pairs, reported as that pair's sides.
fn aggregate(name: String, checks: impl IntoIterator<Item = Result<Check>>) -> Result<CheckRow> {
    let mut worst: Option<Check> = None;
    let mut all = true;
    for c in checks {
        let c = c?;
        all &= c.holds;
        if worst.is_none_or(|w| c.lhs - c.rhs > w.lhs - w.rhs) {
            worst = Some(c);
        }
    }
    let w = worst.ok_or_else(|| Error::Usage("no trials requested".into()))?;
    Ok(row(name, w.lhs, w.rhs, all))
}

fn trace_bound_row(size: Size, pairs: usize, rng: &mut impl Rng) -> Result<CheckRow> {
    let Size { h, k } = size;
    let checks: Vec<Result<Check>> = (0..pairs)
        .map(|_| {
            let r = rng.random_range(0..=h.min(k));
            let theta = low_rank(h, k, r, rng);
            let theta_hat = gaussian(h, k, rng);
            Ok(check_trace_bound(&theta_hat, &theta)?)
        })
        .collect();
    aggregate(format!("trace-bound {size}"), checks)
}

fn l1_bound_row(size: Size, pairs: usize, rng: &mut impl Rng) -> Result<CheckRow> {
    let Size { h, k } = size;
    let checks: Vec<Result<Check>> = (0..pairs)
        .map(|_| {
            let theta = Matrix::from_fn(h, k, |_, _| {
                let v: f64 = rng.sample(StandardNormal);
                if rng.random::<f64>() < 0.3 {
                    v
                } else {
                    0.0
                }
            });
            let theta_hat = gaussian(h, k, rng);
            Ok(check_l1_bound(&theta_hat, &theta)?)
        })
        .collect();
    aggregate(format!("l1-bound {size}"), checks)
}

/// `G_X` has `4h` rows. Reads `bound − 2/√trials ≤ empirical probability`.
fn concentration_row(size: Size, trials: usize, seed: u64, rng: &mut impl Rng) -> Result<CheckRow> {
    let n = 4 * size.h;
    let gx = gaussian(n, size.h, rng);
    let (prob, bound) = concentration_mc(&gx, size.k, 1.0, CHECK_T, trials, seed)?;
    let lhs = bound - 2.0 / (trials as f64).sqrt();
    Ok(row(format!("concentration {n}x{size}"), lhs, prob, lhs <= prob))
}

/// Required count of noise seeds on which the solver-output inequality
/// holds: `⌈(1 − exp(−n t²/2)) · seeds⌉`.
pub fn lemma1_required(n: usize, t: f64, seeds: usize) -> usize {
    (concentration_bound(n, t) * seeds as f64).ceil() as usize
}

/// AG at `α = β = λ/2` on planted instances with `n = 3h`. Reads
/// `required ≤ held`.
fn lemma1_row(size: Size, seeds: usize, seed: u64) -> Result<CheckRow> {
    let Size { h, k } = size;
    let n = 3 * h;
    let rank_star = (h.min(k) / 3).max(1);
    let cfg = SolverConfig::default();
    let held: Vec<Result<bool>> = (0..seeds)
        .into_par_iter()
        .map(|i| {
            let (p, truth) = generate_synthetic(n, h, k, rank_star, 0.2, CHECK_SIGMA_W, seed.wrapping_add(i as u64))?;
            let lambda = concentration_lambda(spectral_norm(p.gx())?, CHECK_SIGMA_W, n, k, CHECK_T);
            let reg = RegPair::new(lambda / 2.0, lambda / 2.0)?;
            let res = ag_solve(&p, reg, &cfg, None)?;
            Ok(check_lemma1(&p, &res.theta, &truth.theta_star, reg, &truth.f_true)?.holds)
        })
        .collect();
    let mut count = 0;
    for h in held {
        count += h? as usize;
    }
    let required = lemma1_required(n, CHECK_T, seeds);
    Ok(row(
        format!("lemma1 {n}x{size}"),
        required as f64,
        count as f64,
        count >= required,
    ))
}

/// Runs `kinds` at every size.
pub fn run_checks(kinds: &[CheckKind], opts: &CheckOptions) -> Result<Vec<CheckRow>> {
    if opts.sizes.is_empty() {
        return Err(Error::Usage("no sizes given".into()));
    }
    if opts.trials == 0 {
        return Err(Error::Usage("trials must be >= 1".into()));
    }
    let mut rows = Vec::new();
    for &kind in kinds {
        for (i, &size) in opts.sizes.iter().enumerate() {
            let mut rng = rng_for(opts.seed, kind, i);
            match kind {
                CheckKind::S0s1 => rows.extend(s0s1_rows(size, opts.trials, &mut rng)?),
                CheckKind::TraceBound => rows.push(trace_bound_row(size, opts.trials, &mut rng)?),
                CheckKind::L1Bound => rows.push(l1_bound_row(size, opts.trials, &mut rng)?),
                CheckKind::Concentration => {
                    let seed = rng.random();
                    rows.push(concentration_row(size, opts.trials, seed, &mut rng)?)
                }
                CheckKind::Lemma1 => rows.push(lemma1_row(size, opts.lemma1_seeds, rng.random())?),
            }
        }
    }
    Ok(rows)
}
