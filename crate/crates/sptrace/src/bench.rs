//! Solver comparison and proximal-step timing.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use sptrace_core::prox::{dual_cd_solve_with, CdOptions, ProxInput};
use sptrace_core::{Matrix, ProblemInstance, RegPair, SolverConfig, SolverResult, WallClock};

use crate::error::Result;
use crate::solve::Solver;

/// Objective-change threshold of the reference ADMM2 run.
pub const REFERENCE_OBJ_TOL: f64 = 1e-4;

#[derive(Debug, Clone)]
pub struct BenchRun {
    pub solver: Solver,
    pub result: SolverResult,
    pub seconds: f64,
    /// The objective this run was asked to reach, if any.
    pub target: Option<f64>,
}

impl BenchRun {
    /// Whether the run reached its target objective.
    pub fn reached_target(&self) -> bool {
        self.target.is_none_or(|t| self.result.objective <= t)
    }
}

/// Runs `solvers` on `p`. When ADMM2 is listed it runs first with
/// `|Δf| < 1e-4` on the objective alone, and its attained objective becomes
/// the stopping target of the other solvers. Without ADMM2 every solver
/// uses `cfg` as given.
pub fn bench_solvers(
    p: &ProblemInstance,
    reg: RegPair,
    solvers: &[Solver],
    cfg: &SolverConfig,
) -> Result<Vec<BenchRun>> {
    let mut order: Vec<Solver> = solvers.to_vec();
    order.dedup();
    order.sort_by_key(|s| *s != Solver::Admm2);
    let mut target = None;
    let mut runs = Vec::with_capacity(order.len());
    for solver in order {
        let mut c = cfg.clone();
        if solver == Solver::Admm2 {
            c.obj_tol = REFERENCE_OBJ_TOL;
            c.admm_objective_only = true;
            c.target_objective = None;
        } else if target.is_some() {
            c.target_objective = target;
        }
        let clock = WallClock::start();
        let start = Instant::now();
        let result = solver.solve(p, reg, &c, None, &clock)?;
        let seconds = start.elapsed().as_secs_f64();
        if solver == Solver::Admm2 {
            target = Some(result.objective);
        }
        runs.push(BenchRun {
            solver,
            result,
            seconds,
            target: c.target_objective,
        });
    }
    Ok(runs)
}

/// Standard normal `rows x cols` matrix.
pub fn gaussian_matrix(rows: usize, cols: usize, seed: u64) -> Matrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Matrix::from_fn(rows, cols, |_, _| StandardNormal.sample(&mut rng))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProxBench {
    pub rows: usize,
    pub cols: usize,
    pub sweeps: usize,
    pub converged: bool,
    pub seconds: f64,
}

/// Dual coordinate descent on a Gaussian `Φ̂` with the relative stopping
/// rule at `tol`.
pub fn bench_prox(
    rows: usize,
    cols: usize,
    alpha_hat: f64,
    beta_hat: f64,
    tol: f64,
    max_sweeps: usize,
    seed: u64,
) -> Result<ProxBench> {
    let input = ProxInput::new(gaussian_matrix(rows, cols, seed), alpha_hat, beta_hat)?;
    let start = Instant::now();
    let out = dual_cd_solve_with(&input, CdOptions::relative(tol, max_sweeps))?;
    Ok(ProxBench {
        rows,
        cols,
        sweeps: out.sweeps,
        converged: out.converged,
        seconds: start.elapsed().as_secs_f64(),
    })
}
