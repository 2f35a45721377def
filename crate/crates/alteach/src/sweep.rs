//! Deterministic experiment sweeps.
//!
//! A sweep crosses beta-greedy learners with constraint cells, runs every
//! hypothesis as the target once per cell, and emits one CSV row per run
//! plus a per-cell aggregate with mean and standard error. Row order and
//! per-run seeds are derived from explicit keys, so output bytes do not
//! depend on the parallelism degree. Cost is reported both in rounds and
//! in total labels.

use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::SyntheticConfig;
use crate::diagnostics::{alpha_of_run, Alpha};
use crate::error::{Error, Result};
use crate::learners::LearnerSpec;
use crate::problem::TeachingProblem;
use crate::rng;
use crate::teaching::{run_session, ConstraintSpec};

/// Where the sweep problem comes from.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProblemSource {
    Path(std::path::PathBuf),
    Synthetic(SyntheticConfig),
}

/// Constraint kinds a sweep crosses with its psi grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweptConstraint {
    CloseOpposite,
    FarSame,
    CloseOppositeOrFarSame,
}

impl SweptConstraint {
    pub fn with_psi(self, psi: f64) -> ConstraintSpec {
        match self {
            SweptConstraint::CloseOpposite => ConstraintSpec::CloseOpposite { psi },
            SweptConstraint::FarSame => ConstraintSpec::FarSame { psi },
            SweptConstraint::CloseOppositeOrFarSame => {
                ConstraintSpec::CloseOppositeOrFarSame { psi }
            }
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SweptConstraint::CloseOpposite => "close_opposite",
            SweptConstraint::FarSame => "far_same",
            SweptConstraint::CloseOppositeOrFarSame => "close_opposite_or_far_same",
        }
    }
}

fn default_betas() -> Vec<f64> {
    vec![1.0, 5.0, 10.0, 100.0, 1000.0]
}

fn default_psis() -> Vec<f64> {
    vec![0.1, 0.5, 1.0]
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepConfig {
    pub problem: ProblemSource,
    #[serde(default = "default_betas")]
    pub betas: Vec<f64>,
    #[serde(default = "default_psis")]
    pub psis: Vec<f64>,
    #[serde(default)]
    pub constraints: Vec<SweptConstraint>,
    #[serde(default)]
    pub budget_rounds: Option<usize>,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default)]
    pub threads: Option<usize>,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.betas.is_empty() {
            return Err(Error::InvalidInput("betas must be nonempty".into()));
        }
        if self.betas.iter().any(|b| !(*b >= 1.0)) {
            return Err(Error::InvalidInput("every beta must be >= 1".into()));
        }
        if self.psis.is_empty() {
            return Err(Error::InvalidInput("psis must be nonempty".into()));
        }
        if self.psis.iter().any(|p| !(*p > 0.0 && *p <= 1.0)) {
            return Err(Error::InvalidInput("every psi must lie in (0, 1]".into()));
        }
        Ok(())
    }
}

/// One sweep cell: a learner beta crossed with a teacher setting.
#[derive(Clone, Debug, PartialEq)]
pub struct Cell {
    pub beta: f64,
    /// `None` is the learner-alone baseline.
    pub teacher: Option<ConstraintSpec>,
}

impl Cell {
    pub fn constraint_label(&self) -> String {
        match &self.teacher {
            None => "al".into(),
            Some(c) => c.kind_name().into(),
        }
    }

    pub fn psi(&self) -> Option<f64> {
        self.teacher.as_ref().and_then(|c| c.psi())
    }
}

/// Cells in emission order: per beta, the learner-alone baseline, the
/// unconstrained teacher baseline, then each constraint kind at each psi.
pub fn cells(config: &SweepConfig) -> Vec<Cell> {
    let mut out = Vec::new();
    for &beta in &config.betas {
        out.push(Cell { beta, teacher: None });
        out.push(Cell {
            beta,
            teacher: Some(ConstraintSpec::Unconstrained),
        });
        for kind in &config.constraints {
            for &psi in &config.psis {
                out.push(Cell {
                    beta,
                    teacher: Some(kind.with_psi(psi)),
                });
            }
        }
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct RunRow {
    pub beta: f64,
    pub psi: Option<f64>,
    pub constraint: String,
    pub target: usize,
    pub run_seed: u64,
    pub rounds: usize,
    pub labels_total: usize,
    pub terminated: bool,
    /// Empty for learner-alone rows; "inf" when a round had no useful
    /// admissible candidate.
    pub alpha: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct AggregateRow {
    pub beta: f64,
    pub psi: Option<f64>,
    pub constraint: String,
    pub n: usize,
    pub mean_rounds: f64,
    pub se_rounds: f64,
    pub mean_labels: f64,
    pub se_labels: f64,
    pub mean_alpha: Option<f64>,
}

pub struct SweepOutput {
    pub rows: Vec<RunRow>,
    pub aggregates: Vec<AggregateRow>,
}

fn mean_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt() / n.sqrt())
}

fn run_one(
    problem: &TeachingProblem,
    cell: &Cell,
    target: usize,
    run_seed: u64,
    budget: Option<usize>,
) -> Result<RunRow> {
    let retargeted = problem.retarget(target)?;
    let learner = LearnerSpec::BetaGreedy {
        beta: cell.beta,
        seed: run_seed,
    };
    let (constraint, with_teacher) = match &cell.teacher {
        None => (ConstraintSpec::Unconstrained, false),
        Some(c) => (*c, true),
    };
    let transcript = run_session(&retargeted, &learner, &constraint, budget, with_teacher)?;
    let alpha = with_teacher.then(|| alpha_of_run(&transcript)).map(|a| match a {
        Alpha::Finite(v) => v,
        Alpha::Infinite => f64::INFINITY,
    });
    Ok(RunRow {
        beta: cell.beta,
        psi: cell.psi(),
        constraint: cell.constraint_label(),
        target,
        run_seed,
        rounds: transcript.rounds.len(),
        labels_total: transcript.total_examples,
        terminated: transcript.terminated,
        alpha,
    })
}

/// Runs every `(cell, target)` task, in parallel when configured, and
/// merges results in deterministic key order.
pub fn run_sweep(problem: &TeachingProblem, config: &SweepConfig) -> Result<SweepOutput> {
    config.validate()?;
    problem.check_teachable()?;
    let cell_list = cells(config);
    let tasks: Vec<(usize, usize)> = (0..cell_list.len())
        .flat_map(|c| (0..problem.hypothesis_count()).map(move |t| (c, t)))
        .collect();

    let execute = || -> Result<Vec<RunRow>> {
        tasks
            .par_iter()
            .map(|&(cell_idx, target)| {
                let run_seed = rng::derive_seed(
                    rng::derive_seed(config.master_seed, cell_idx as u64),
                    target as u64,
                );
                run_one(
                    problem,
                    &cell_list[cell_idx],
                    target,
                    run_seed,
                    config.budget_rounds,
                )
            })
            .collect()
    };
    let rows = match config.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))?
            .install(execute),
        None => execute(),
    }?;

    // Tasks were generated in key order and rayon's collect preserves
    // input order, so rows are already deterministic.
    let mut aggregates = Vec::new();
    let per_cell = problem.hypothesis_count();
    for (cell_idx, cell) in cell_list.iter().enumerate() {
        let slice = &rows[cell_idx * per_cell..(cell_idx + 1) * per_cell];
        let rounds: Vec<f64> = slice.iter().map(|r| r.rounds as f64).collect();
        let labels: Vec<f64> = slice.iter().map(|r| r.labels_total as f64).collect();
        let (mean_rounds, se_rounds) = mean_se(&rounds);
        let (mean_labels, se_labels) = mean_se(&labels);
        let mean_alpha = cell.teacher.as_ref().map(|_| {
            slice.iter().map(|r| r.alpha.unwrap_or(f64::INFINITY)).sum::<f64>()
                / slice.len() as f64
        });
        aggregates.push(AggregateRow {
            beta: cell.beta,
            psi: cell.psi(),
            constraint: cell.constraint_label(),
            n: slice.len(),
            mean_rounds,
            se_rounds,
            mean_labels,
            se_labels,
            mean_alpha,
        });
    }
    Ok(SweepOutput { rows, aggregates })
}

fn fmt_opt(v: Option<f64>) -> String {
    match v {
        None => String::new(),
        Some(v) if v.is_infinite() => "inf".into(),
        Some(v) => format!("{v}"),
    }
}

pub fn write_runs_csv<W: Write>(rows: &[RunRow], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "beta",
        "psi",
        "constraint",
        "target",
        "run_seed",
        "rounds",
        "labels_total",
        "terminated",
        "alpha",
    ])
    .map_err(csv_err)?;
    for r in rows {
        w.write_record([
            format!("{}", r.beta),
            fmt_opt(r.psi),
            r.constraint.clone(),
            format!("{}", r.target),
            format!("{}", r.run_seed),
            format!("{}", r.rounds),
            format!("{}", r.labels_total),
            format!("{}", r.terminated),
            fmt_opt(r.alpha),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_aggregates_csv<W: Write>(rows: &[AggregateRow], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "beta",
        "psi",
        "constraint",
        "n",
        "mean_rounds",
        "se_rounds",
        "mean_labels",
        "se_labels",
        "mean_alpha",
    ])
    .map_err(csv_err)?;
    for r in rows {
        w.write_record([
            format!("{}", r.beta),
            fmt_opt(r.psi),
            r.constraint.clone(),
            format!("{}", r.n),
            format!("{}", r.mean_rounds),
            format!("{}", r.se_rounds),
            format!("{}", r.mean_labels),
            format!("{}", r.se_labels),
            fmt_opt(r.mean_alpha),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    Error::InvalidInput(format!("csv: {e}"))
}

/// Writes `runs.csv` and `aggregate.csv` under `dir`.
pub fn sweep_to_dir(problem: &TeachingProblem, config: &SweepConfig, dir: &Path) -> Result<SweepOutput> {
    let output = run_sweep(problem, config)?;
    std::fs::create_dir_all(dir)?;
    write_runs_csv(&output.rows, std::fs::File::create(dir.join("runs.csv"))?)?;
    write_aggregates_csv(
        &output.aggregates,
        std::fs::File::create(dir.join("aggregate.csv"))?,
    )?;
    Ok(output)
}
