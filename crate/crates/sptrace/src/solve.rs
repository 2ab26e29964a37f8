//! Solver selection and the data-to-instance glue shared by the commands.

use std::fmt;
use std::str::FromStr;

use sptrace_core::admm::{admm1_solve_with_clock, admm2_solve_with_clock};
use sptrace_core::ag::ag_solve_with_clock;
use sptrace_core::dataset::{LabeledDataset, Standardizer};
use sptrace_core::{Clock, Matrix, ProblemInstance, RegPair, SolverConfig, SolverResult};

use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, clap::ValueEnum)]
pub enum Solver {
    Ag,
    Admm1,
    Admm2,
}

impl Solver {
    pub const ALL: [Solver; 3] = [Solver::Ag, Solver::Admm1, Solver::Admm2];

    pub fn name(self) -> &'static str {
        match self {
            Solver::Ag => "ag",
            Solver::Admm1 => "admm1",
            Solver::Admm2 => "admm2",
        }
    }

    pub fn solve(
        self,
        p: &ProblemInstance,
        reg: RegPair,
        cfg: &SolverConfig,
        theta0: Option<&Matrix>,
        clock: &dyn Clock,
    ) -> Result<SolverResult> {
        let res = match self {
            Solver::Ag => ag_solve_with_clock(p, reg, cfg, theta0, clock),
            Solver::Admm1 => admm1_solve_with_clock(p, reg, cfg, theta0, clock),
            Solver::Admm2 => admm2_solve_with_clock(p, reg, cfg, theta0, clock),
        };
        Ok(res?)
    }
}

impl fmt::Display for Solver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

impl FromStr for Solver {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Solver::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| format!("unknown solver {s:?} (expected ag, admm1 or admm2)"))
    }
}

/// The regression instance `features · Θ ≈ labels`.
pub fn instance(ds: &LabeledDataset) -> Result<ProblemInstance> {
    Ok(ProblemInstance::new(ds.features.clone(), ds.labels.clone())?)
}

/// Scores `features · Θ`.
pub fn scores(features: &Matrix, theta: &Matrix) -> Result<Matrix> {
    if features.ncols() != theta.nrows() {
        return Err(sptrace_core::Error::DimensionMismatch {
            field: "theta",
            expected: (features.ncols(), theta.ncols()),
            found: theta.shape(),
        }
        .into());
    }
    Ok(features * theta)
}

/// Train and test copies, z-scored with statistics from `train` when
/// `standardize` is set.
pub fn prepare(
    train: &LabeledDataset,
    test: &LabeledDataset,
    standardize: bool,
) -> Result<(LabeledDataset, LabeledDataset)> {
    if !standardize {
        return Ok((train.clone(), test.clone()));
    }
    let z = Standardizer::fit(&train.features);
    let apply = |ds: &LabeledDataset| -> Result<LabeledDataset> {
        Ok(LabeledDataset::new(
            z.apply(&ds.features)?,
            ds.labels.clone(),
            ds.label_names.clone(),
        )?)
    };
    Ok((apply(train)?, apply(test)?))
}
