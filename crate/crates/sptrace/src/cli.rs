//! Command-line definitions and command drivers.

use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use sptrace_core::dataset::LabeledDataset;
use sptrace_core::metrics::{auc, macro_f1, micro_f1, predict_sign};
use sptrace_core::synthetic::{generate_synthetic, SyntheticTruth};
use sptrace_core::{Matrix, ProblemInstance, RegPair, SolverConfig, WallClock};

use crate::bench::{bench_prox, bench_solvers};
use crate::check::{run_checks, CheckKind, CheckOptions, Size};
use crate::config::{ConfigFile, SyntheticSpec};
use crate::csvio::{export_synthetic, fmt_f64, write_checks, write_table, write_trace};
use crate::cv::{default_grid, run_cv, summarize, CvOptions, Penalty};
use crate::error::{exit, Error, Result};
use crate::libsvm::read_libsvm_files;
use crate::model::{load_model, save_model, Model};
use crate::solve::{instance, scores, Solver};

/// Environment variable that sets the worker thread count.
pub const THREADS_ENV: &str = "SPTRACE_THREADS";

#[derive(Debug, Parser)]
#[command(name = "sptrace", version, about = "Sparse trace-norm multi-output regression")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a coefficient matrix and write it as a model file.
    Train(TrainArgs),
    /// Score a model on a labeled dataset.
    Eval(EvalArgs),
    /// Select weights by nested cross-validation and report test scores.
    Cv(CvArgs),
    /// Compare solvers on one instance, or time the proximal step.
    Bench(BenchArgs),
    /// Check the structural inequalities on random instances.
    Check(CheckArgs),
}

fn non_negative(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("{s:?} is not a number"))?;
    if v.is_finite() && v >= 0.0 {
        Ok(v)
    } else {
        Err(format!("{v} must be finite and >= 0"))
    }
}

fn positive(s: &str) -> std::result::Result<f64, String> {
    match non_negative(s)? {
        v if v > 0.0 => Ok(v),
        v => Err(format!("{v} must be > 0")),
    }
}

fn fraction(s: &str) -> std::result::Result<f64, String> {
    match non_negative(s)? {
        v if v > 0.0 && v < 1.0 => Ok(v),
        v => Err(format!("{v} must lie in (0, 1)")),
    }
}

/// A dataset given either as LIBSVM files or as a generated instance.
#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct DataSource {
    /// LIBSVM multi-label files, concatenated in order.
    #[arg(long, num_args = 1.., value_name = "FILE")]
    pub data: Vec<PathBuf>,
    /// Generated instance, e.g. `n=60,h=20,k=8,rank=3,support=0.2,sigma=0.1,seed=7`.
    #[arg(long, value_name = "SPEC")]
    pub synthetic: Option<SyntheticSpec>,
}

/// Solver settings. Flags override `--config`, which overrides defaults.
#[derive(Debug, Args, Default)]
pub struct SolverArgs {
    /// `key = value` file with any of the settings below (underscored names).
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[arg(long, value_parser = positive)]
    pub obj_tol: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    #[arg(long, value_parser = positive)]
    pub inner_tol: Option<f64>,
    #[arg(long)]
    pub inner_max_iter: Option<usize>,
    #[arg(long, value_parser = positive)]
    pub gamma_init: Option<f64>,
    #[arg(long, value_parser = positive)]
    pub rho1: Option<f64>,
    #[arg(long, value_parser = positive)]
    pub rho2: Option<f64>,
    /// Measure objective change relative to max(1, |f|).
    #[arg(long)]
    pub relative_stop: bool,
    /// ADMM: stop on objective change alone.
    #[arg(long)]
    pub admm_objective_only: bool,
}

impl SolverArgs {
    pub fn config_file(&self) -> Result<ConfigFile> {
        match &self.config {
            Some(p) => ConfigFile::load(p),
            None => Ok(ConfigFile::default()),
        }
    }

    pub fn solver_config(&self, file: &ConfigFile) -> Result<SolverConfig> {
        let d = SolverConfig::default();
        let flag = |set: bool| set.then_some(true);
        let cfg = SolverConfig {
            obj_tol: file.resolve(self.obj_tol, "obj_tol", d.obj_tol)?,
            relative_stop: file.resolve(flag(self.relative_stop), "relative_stop", d.relative_stop)?,
            target_objective: None,
            max_iter: file.resolve(self.max_iter, "max_iter", d.max_iter)?,
            gamma_init: file.resolve_opt(self.gamma_init, "gamma_init")?,
            gamma_growth: file.resolve(None, "gamma_growth", d.gamma_growth)?,
            inner_tol: file.resolve(self.inner_tol, "inner_tol", d.inner_tol)?,
            inner_max_iter: file.resolve(self.inner_max_iter, "inner_max_iter", d.inner_max_iter)?,
            rho1: file.resolve(self.rho1, "rho1", d.rho1)?,
            rho2: file.resolve(self.rho2, "rho2", d.rho2)?,
            admm_objective_only: file.resolve(
                flag(self.admm_objective_only),
                "admm_objective_only",
                d.admm_objective_only,
            )?,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Penalty weights.
#[derive(Debug, Args)]
pub struct WeightArgs {
    /// Trace-norm weight.
    #[arg(long, value_parser = non_negative, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    /// ℓ1 weight.
    #[arg(long, value_parser = non_negative, allow_negative_numbers = true)]
    pub beta: Option<f64>,
}

pub const DEFAULT_WEIGHT: f64 = 0.1;

impl WeightArgs {
    pub fn reg(&self, file: &ConfigFile) -> Result<RegPair> {
        let alpha = file.resolve(self.alpha, "alpha", DEFAULT_WEIGHT)?;
        let beta = file.resolve(self.beta, "beta", DEFAULT_WEIGHT)?;
        RegPair::new(alpha, beta).map_err(|e| Error::Usage(e.to_string()))
    }
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub source: DataSource,
    #[arg(long, value_enum)]
    pub solver: Option<Solver>,
    #[command(flatten)]
    pub weights: WeightArgs,
    #[command(flatten)]
    pub solver_args: SolverArgs,
    #[arg(long, value_name = "FILE", default_value = "model.stnm")]
    pub model_out: PathBuf,
    /// Per-iteration objective CSV.
    #[arg(long, value_name = "FILE")]
    pub trace_out: Option<PathBuf>,
    /// Directory for gx.csv, y.csv and theta_star.csv of a generated instance.
    #[arg(long, value_name = "DIR")]
    pub export_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long, value_name = "FILE")]
    pub model: PathBuf,
    #[command(flatten)]
    pub source: DataSource,
    /// CSV with columns `metric,value`.
    #[arg(long, value_name = "FILE")]
    pub metrics_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CvArgs {
    #[command(flatten)]
    pub source: DataSource,
    #[arg(long, value_enum)]
    pub solver: Option<Solver>,
    /// Penalties to search; all three by default.
    #[arg(long, value_enum, value_delimiter = ',')]
    pub penalty: Vec<Penalty>,
    /// Comma-separated weight grid; the 29-value default otherwise.
    #[arg(long, value_delimiter = ',', value_parser = non_negative)]
    pub grid: Vec<f64>,
    #[arg(long)]
    pub folds: Option<usize>,
    #[arg(long)]
    pub repeats: Option<usize>,
    #[arg(long, value_parser = fraction)]
    pub train_frac: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// z-score features with training-row statistics.
    #[arg(long)]
    pub standardize: bool,
    #[command(flatten)]
    pub solver_args: SolverArgs,
    /// Per-repeat CSV report.
    #[arg(long, value_name = "FILE")]
    pub report_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Generated instance or LIBSVM files; not used with `--prox`.
    #[arg(long, num_args = 1.., value_name = "FILE", conflicts_with_all = ["synthetic", "prox"])]
    pub data: Vec<PathBuf>,
    #[arg(long, value_name = "SPEC", conflicts_with = "prox")]
    pub synthetic: Option<SyntheticSpec>,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "ag,admm2")]
    pub solvers: Vec<Solver>,
    #[command(flatten)]
    pub weights: WeightArgs,
    #[command(flatten)]
    pub solver_args: SolverArgs,
    /// Directory for `<solver>_trace.csv` files.
    #[arg(long, value_name = "DIR")]
    pub trace_dir: Option<PathBuf>,
    /// Summary CSV.
    #[arg(long, value_name = "FILE")]
    pub report_out: Option<PathBuf>,
    /// Time the proximal step's dual solver instead of the full solvers.
    #[arg(long)]
    pub prox: bool,
    /// Shape of the random input in `--prox` mode.
    #[arg(long, default_value = "1000x500")]
    pub shape: Size,
    #[arg(long, default_value_t = 1.0, value_parser = non_negative)]
    pub alpha_hat: f64,
    #[arg(long, default_value_t = 1.0, value_parser = non_negative)]
    pub beta_hat: f64,
    /// Sweep tolerance in `--prox` mode (relative decrease).
    #[arg(long, default_value_t = 1e-8, value_parser = positive)]
    pub prox_tol: f64,
    #[arg(long, default_value_t = 50)]
    pub prox_max_sweeps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    /// Checks to run.
    #[arg(value_enum)]
    pub checks: Vec<CheckKind>,
    /// Run every check.
    #[arg(long)]
    pub all: bool,
    /// Comma-separated shapes, e.g. `6x5,20x10`.
    #[arg(long, value_delimiter = ',')]
    pub sizes: Vec<Size>,
    /// Random pairs per size and Monte Carlo trials (at least 1000 for the
    /// concentration check).
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    /// Noise seeds per size for the solver-output check.
    #[arg(long, default_value_t = 20)]
    pub lemma1_seeds: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// CSV with columns `check,lhs,rhs,holds`.
    #[arg(long, value_name = "FILE")]
    pub report_out: Option<PathBuf>,
}

/// Labels `sign(Y)` of a generated instance, with `sign(0) = −1`.
pub fn synthetic_dataset(spec: &SyntheticSpec) -> Result<LabeledDataset> {
    let (p, _) = generate(spec)?;
    let labels = predict_sign(p.y());
    let names = (0..labels.ncols()).map(|j| j.to_string()).collect();
    let (gx, _) = p.into_parts();
    Ok(LabeledDataset::new(gx, labels, names)?)
}

fn generate(spec: &SyntheticSpec) -> Result<(ProblemInstance, SyntheticTruth)> {
    generate_synthetic(spec.n, spec.h, spec.k, spec.rank, spec.support, spec.sigma, spec.seed)
        .map_err(|e| Error::Usage(format!("--synthetic: {e}")))
}

fn load_dataset(source: &DataSource) -> Result<LabeledDataset> {
    match &source.synthetic {
        Some(spec) => synthetic_dataset(spec),
        None => read_libsvm_files(&source.data),
    }
}

fn out(line: std::fmt::Arguments<'_>) {
    let mut stdout = io::stdout().lock();
    let _ = writeln!(stdout, "{line}");
}

macro_rules! say {
    ($($t:tt)*) => { out(format_args!($($t)*)) };
}

pub fn cmd_train(args: &TrainArgs) -> Result<i32> {
    let file = args.solver_args.config_file()?;
    let cfg = args.solver_args.solver_config(&file)?;
    let reg = args.weights.reg(&file)?;
    let solver = file.resolve(args.solver, "solver", Solver::Ag)?;
    let p = match &args.source.synthetic {
        Some(spec) => {
            let (p, truth) = generate(spec)?;
            if let Some(dir) = &args.export_dir {
                export_synthetic(dir, &p, &truth)?;
            }
            p
        }
        None => {
            if args.export_dir.is_some() {
                return Err(Error::Usage("--export-dir needs --synthetic".into()));
            }
            instance(&read_libsvm_files(&args.source.data)?)?
        }
    };
    let start = Instant::now();
    let res = solver.solve(&p, reg, &cfg, None, &WallClock::start())?;
    let seconds = start.elapsed().as_secs_f64();
    save_model(
        &args.model_out,
        &Model {
            theta: res.theta.clone(),
            reg,
        },
    )?;
    if let Some(path) = &args.trace_out {
        write_trace(path, &res.trace)?;
    }
    say!("solver      {solver}");
    say!("objective   {}", fmt_f64(res.objective));
    say!("iterations  {}", res.iterations);
    say!("converged   {}", res.converged);
    say!("seconds     {seconds:.3}");
    say!("model       {}", args.model_out.display());
    Ok(exit::OK)
}

/// Zero-pads `features` on the right to `d` columns. LIBSVM files omit
/// trailing zero features, so a test file may report fewer columns.
fn pad_features(features: &Matrix, d: usize) -> Result<Matrix> {
    let have = features.ncols();
    if have > d {
        return Err(sptrace_core::Error::DimensionMismatch {
            field: "features",
            expected: (features.nrows(), d),
            found: features.shape(),
        }
        .into());
    }
    Ok(features.clone().resize_horizontally(d, 0.0))
}

/// AUC, macro F1 and micro F1 of `theta` on `ds`, all in [0, 100].
pub fn evaluate(theta: &Matrix, ds: &LabeledDataset) -> Result<[f64; 3]> {
    if ds.label_count() != theta.ncols() {
        return Err(sptrace_core::Error::DimensionMismatch {
            field: "labels",
            expected: (ds.len(), theta.ncols()),
            found: ds.labels.shape(),
        }
        .into());
    }
    let s = scores(&pad_features(&ds.features, theta.nrows())?, theta)?;
    let pred = predict_sign(&s);
    Ok([
        auc(&s, &ds.labels)?.value,
        macro_f1(&pred, &ds.labels)?,
        micro_f1(&pred, &ds.labels)?,
    ])
}

pub fn cmd_eval(args: &EvalArgs) -> Result<i32> {
    let model = load_model(&args.model)?;
    let ds = load_dataset(&args.source)?;
    let m = evaluate(&model.theta, &ds)?;
    let names = ["AUC", "MacroF1", "MicroF1"];
    for (n, v) in names.iter().zip(m) {
        say!("{n:<8} {v:.4}");
    }
    if let Some(path) = &args.metrics_out {
        let rows: Vec<Vec<String>> = names
            .iter()
            .zip(m)
            .map(|(n, v)| vec![n.to_string(), fmt_f64(v)])
            .collect();
        write_table(path, &["metric", "value"], &rows)?;
    }
    Ok(exit::OK)
}

pub fn cmd_cv(args: &CvArgs) -> Result<i32> {
    let file = args.solver_args.config_file()?;
    let d = CvOptions::default();
    let grid = if args.grid.is_empty() {
        default_grid()
    } else {
        args.grid.clone()
    };
    let opts = CvOptions {
        grid,
        folds: file.resolve(args.folds, "folds", d.folds)?,
        repeats: file.resolve(args.repeats, "repeats", d.repeats)?,
        train_frac: file.resolve(args.train_frac, "train_frac", d.train_frac)?,
        seed: file.resolve(args.seed, "seed", d.seed)?,
        standardize: file.resolve(args.standardize.then_some(true), "standardize", d.standardize)?,
        solver: file.resolve(args.solver, "solver", d.solver)?,
        solver_cfg: args.solver_args.solver_config(&file)?,
    };
    let penalties = if args.penalty.is_empty() {
        Penalty::ALL.to_vec()
    } else {
        args.penalty.clone()
    };
    let ds = load_dataset(&args.source)?;
    let rows = run_cv(&ds, &penalties, &opts)?;
    for r in &rows {
        say!(
            "repeat {:>2} {:<12} alpha {:<5} beta {:<5} AUC {:.4} MacroF1 {:.4} MicroF1 {:.4}",
            r.repeat,
            r.penalty,
            r.reg.alpha,
            r.reg.beta,
            r.auc,
            r.macro_f1,
            r.micro_f1
        );
    }
    for &p in &penalties {
        if let Some(s) = summarize(&rows, p) {
            say!(
                "{:<12} AUC {:.2} ± {:.2}  MacroF1 {:.2}  MicroF1 {:.2}",
                p,
                s.mean_auc,
                s.std_auc,
                s.mean_macro_f1,
                s.mean_micro_f1
            );
        }
    }
    if let Some(path) = &args.report_out {
        let table: Vec<Vec<String>> = rows
            .iter()
            .map(|r| {
                vec![
                    r.repeat.to_string(),
                    r.penalty.to_string(),
                    r.reg.alpha.to_string(),
                    r.reg.beta.to_string(),
                    r.validation_auc.map(fmt_f64).unwrap_or_default(),
                    fmt_f64(r.auc),
                    fmt_f64(r.macro_f1),
                    fmt_f64(r.micro_f1),
                ]
            })
            .collect();
        write_table(
            path,
            &[
                "repeat",
                "penalty",
                "alpha",
                "beta",
                "validation_auc",
                "auc",
                "macro_f1",
                "micro_f1",
            ],
            &table,
        )?;
    }
    Ok(exit::OK)
}

pub fn cmd_bench(args: &BenchArgs) -> Result<i32> {
    if args.prox {
        let Size { h, k } = args.shape;
        let b = bench_prox(
            h,
            k,
            args.alpha_hat,
            args.beta_hat,
            args.prox_tol,
            args.prox_max_sweeps,
            args.seed,
        )?;
        say!(
            "prox {h}x{k}  sweeps {}  converged {}  seconds {:.3}",
            b.sweeps,
            b.converged,
            b.seconds
        );
        if let Some(path) = &args.report_out {
            write_table(
                path,
                &["rows", "cols", "sweeps", "converged", "seconds"],
                &[vec![
                    h.to_string(),
                    k.to_string(),
                    b.sweeps.to_string(),
                    b.converged.to_string(),
                    format!("{:.6}", b.seconds),
                ]],
            )?;
        }
        return Ok(exit::OK);
    }
    let file = args.solver_args.config_file()?;
    let cfg = args.solver_args.solver_config(&file)?;
    let reg = args.weights.reg(&file)?;
    let p = match (&args.synthetic, args.data.is_empty()) {
        (Some(spec), _) => generate(spec)?.0,
        (None, false) => instance(&read_libsvm_files(&args.data)?)?,
        (None, true) => return Err(Error::Usage("bench needs --synthetic, --data or --prox".into())),
    };
    let runs = bench_solvers(&p, reg, &args.solvers, &cfg)?;
    if let Some(dir) = &args.trace_dir {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let mut table = Vec::new();
    for r in &runs {
        say!(
            "{:<6} iterations {:>6}  seconds {:.3}  objective {}  target {}",
            r.solver,
            r.result.iterations,
            r.seconds,
            fmt_f64(r.result.objective),
            r.target.map(fmt_f64).unwrap_or_else(|| "-".into())
        );
        if let Some(dir) = &args.trace_dir {
            write_trace(&trace_path(dir, r.solver), &r.result.trace)?;
        }
        table.push(vec![
            r.solver.to_string(),
            r.result.iterations.to_string(),
            format!("{:.6}", r.seconds),
            fmt_f64(r.result.objective),
            r.target.map(fmt_f64).unwrap_or_default(),
            r.reached_target().to_string(),
        ]);
    }
    if let Some(path) = &args.report_out {
        write_table(
            path,
            &[
                "solver",
                "iterations",
                "seconds",
                "objective",
                "target",
                "reached_target",
            ],
            &table,
        )?;
    }
    Ok(exit::OK)
}

pub fn trace_path(dir: &Path, solver: Solver) -> PathBuf {
    dir.join(format!("{solver}_trace.csv"))
}

pub fn cmd_check(args: &CheckArgs) -> Result<i32> {
    let kinds: Vec<CheckKind> = if args.all {
        CheckKind::ALL.to_vec()
    } else if args.checks.is_empty() {
        return Err(Error::Usage("name at least one check or pass --all".into()));
    } else {
        let mut k = args.checks.clone();
        k.sort();
        k.dedup();
        k
    };
    let d = CheckOptions::default();
    let opts = CheckOptions {
        sizes: if args.sizes.is_empty() {
            d.sizes
        } else {
            args.sizes.clone()
        },
        trials: args.trials,
        lemma1_seeds: args.lemma1_seeds,
        seed: args.seed,
    };
    let rows = run_checks(&kinds, &opts)?;
    for r in &rows {
        say!(
            "{} {:<32} lhs {:>12.5e}  rhs {:>12.5e}",
            if r.check.holds { "PASS" } else { "FAIL" },
            r.name,
            r.check.lhs,
            r.check.rhs
        );
    }
    if let Some(path) = &args.report_out {
        write_checks(path, &rows)?;
    }
    Ok(if rows.iter().all(|r| r.check.holds) {
        exit::OK
    } else {
        exit::CHECK_FAILED
    })
}

pub fn run(cli: &Cli) -> Result<i32> {
    match &cli.command {
        Command::Train(a) => cmd_train(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Cv(a) => cmd_cv(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Check(a) => cmd_check(a),
    }
}

/// Reads the thread-count override, if set.
pub fn threads_from_env() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Some(n)),
            _ => Err(Error::Usage(format!("{THREADS_ENV}={v:?} must be a positive integer"))),
        },
    }
}
