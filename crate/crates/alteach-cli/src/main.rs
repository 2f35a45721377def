//! Command-line harness: problem generation, single sessions, sweeps,
//! diagnostics, and verification suites.

mod verify;

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use alteach::data::{self, SyntheticConfig};
use alteach::diagnostics;
use alteach::learners::LearnerSpec;
use alteach::oracles;
use alteach::problem::TeachingProblem;
use alteach::sweep::{self, ProblemSource, SweepConfig};
use alteach::teaching::{run_session, ConstraintSpec};

#[derive(Parser)]
#[command(
    name = "alteach",
    about = "Teach an active version-space learner with contrastive examples",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a problem file.
    Gen(GenArgs),
    /// Run a single learner/teacher session and emit its transcript.
    Run(RunArgs),
    /// Run an experiment sweep from a TOML config, emitting CSV files.
    Sweep(SweepArgs),
    /// Compute the diagnostic report for a problem.
    Diagnose(DiagnoseArgs),
    /// Run a verification suite; exits nonzero on any failure.
    Verify(VerifyArgs),
    /// Regenerate the pinned fixture files.
    Fixtures(FixturesArgs),
}

#[derive(Args)]
struct GenArgs {
    #[command(subcommand)]
    kind: GenKind,
}

#[derive(Subcommand)]
enum GenKind {
    /// Two-Gaussian 2-D synthetic problem with threshold hypotheses.
    Synthetic {
        /// TOML file with a [`SyntheticConfig`]; defaults used when absent.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Overrides the config seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Adversarial chain family instance (contains interchangeable
    /// duplicate non-target rows by design; reload it with --lenient).
    Thm2 {
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum LearnerKind {
    Gbs,
    Beta,
    Random,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum ConstraintKind {
    Unconstrained,
    CloseOpposite,
    FarSame,
    CloseOppositeOrFarSame,
    NeighborChain,
}

#[derive(Args)]
struct LearnerArgs {
    #[arg(long, value_enum, default_value_t = LearnerKind::Gbs)]
    learner: LearnerKind,
    /// Greediness for the beta learner (>= 1).
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl LearnerArgs {
    fn spec(&self) -> LearnerSpec {
        match self.learner {
            LearnerKind::Gbs => LearnerSpec::Gbs,
            LearnerKind::Beta => LearnerSpec::BetaGreedy {
                beta: self.beta,
                seed: self.seed,
            },
            LearnerKind::Random => LearnerSpec::Random { seed: self.seed },
        }
    }
}

#[derive(Args)]
struct ConstraintArgs {
    #[arg(long, value_enum, default_value_t = ConstraintKind::Unconstrained)]
    constraint: ConstraintKind,
    /// Admissible portion for the distance constraints, in (0, 1].
    #[arg(long, default_value_t = 1.0)]
    psi: f64,
    /// Index radius for the neighbor-chain constraint.
    #[arg(long, default_value_t = 1)]
    radius: usize,
}

impl ConstraintArgs {
    fn spec(&self) -> ConstraintSpec {
        match self.constraint {
            ConstraintKind::Unconstrained => ConstraintSpec::Unconstrained,
            ConstraintKind::CloseOpposite => ConstraintSpec::CloseOpposite { psi: self.psi },
            ConstraintKind::FarSame => ConstraintSpec::FarSame { psi: self.psi },
            ConstraintKind::CloseOppositeOrFarSame => {
                ConstraintSpec::CloseOppositeOrFarSame { psi: self.psi }
            }
            ConstraintKind::NeighborChain => ConstraintSpec::NeighborChain {
                radius: self.radius,
            },
        }
    }
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    problem: PathBuf,
    /// Retarget the problem to this hypothesis before running.
    #[arg(long)]
    target: Option<usize>,
    #[command(flatten)]
    learner: LearnerArgs,
    #[command(flatten)]
    constraint: ConstraintArgs,
    /// Round budget; defaults to 4x the hypothesis count.
    #[arg(long)]
    budget: Option<usize>,
    /// Learner-alone baseline (no contrastive examples).
    #[arg(long)]
    no_teacher: bool,
    /// Accept duplicate non-target rows in the problem file.
    #[arg(long)]
    lenient: bool,
    /// Transcript JSON destination (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// TOML sweep config; see the README for the schema.
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value = "sweep-out")]
    out_dir: PathBuf,
    /// Master seed override (beats the config and TEACH_SEED).
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct DiagnoseArgs {
    #[arg(long)]
    problem: PathBuf,
    #[arg(long)]
    target: Option<usize>,
    #[command(flatten)]
    learner: LearnerArgs,
    #[command(flatten)]
    constraint: ConstraintArgs,
    /// Reachable-state enumeration depth for rho/gamma.
    #[arg(long, default_value_t = 16)]
    depth_cap: usize,
    /// Past the exact cap, estimate rho/gamma from this many sampled
    /// teacher paths instead of reporting them as not computed.
    #[arg(long)]
    sampled: Option<usize>,
    #[arg(long)]
    lenient: bool,
    /// Write the JSON report here in addition to the table.
    #[arg(long)]
    json: Option<PathBuf>,
    /// Export the pairwise hypothesis-distance matrix as CSV.
    #[arg(long)]
    distances: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Which suite to run.
    #[arg(long, value_enum)]
    suite: verify::Suite,
    #[arg(long, default_value = "fixtures")]
    fixtures_dir: PathBuf,
    /// Random-instance count for the lemma and bound suites.
    #[arg(long, default_value_t = 200)]
    count: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Args)]
struct FixturesArgs {
    #[arg(long, default_value = "fixtures")]
    out_dir: PathBuf,
}

fn load(path: &Path, lenient: bool) -> Result<TeachingProblem> {
    let p = if lenient {
        data::load_problem_lenient(path)?
    } else {
        data::load_problem(path)?
    };
    Ok(p)
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Gen(args) => gen(args),
        Command::Run(args) => run(args),
        Command::Sweep(args) => run_sweep_cmd(args),
        Command::Diagnose(args) => diagnose(args),
        Command::Verify(args) => verify::run(args.suite, &args.fixtures_dir, args.count, args.seed),
        Command::Fixtures(args) => fixtures(args),
    }
}

fn gen(args: GenArgs) -> Result<()> {
    match args.kind {
        GenKind::Synthetic { config, seed, out } => {
            let mut cfg: SyntheticConfig = match config {
                Some(path) => toml::from_str(
                    &std::fs::read_to_string(&path)
                        .with_context(|| format!("reading {}", path.display()))?,
                )?,
                None => SyntheticConfig::default(),
            };
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            let problem = data::gen_synthetic(&cfg)?;
            data::save_problem(&problem, &out)?;
            println!(
                "wrote {} ({} instances, {} hypotheses, seed {})",
                out.display(),
                problem.instance_count(),
                problem.hypothesis_count(),
                cfg.seed
            );
        }
        GenKind::Thm2 { k, out } => {
            let (problem, constraint) = data::thm2_family(k)?;
            data::save_problem(&problem, &out)?;
            println!(
                "wrote {} ({} instances, {} hypotheses); intended constraint: {:?}",
                out.display(),
                problem.instance_count(),
                problem.hypothesis_count(),
                constraint
            );
            println!("note: contains duplicate non-target rows by design; reload with --lenient");
        }
    }
    Ok(())
}

fn run(args: RunArgs) -> Result<()> {
    let mut problem = load(&args.problem, args.lenient)?;
    if let Some(target) = args.target {
        problem = problem.retarget(target)?;
    }
    let transcript = run_session(
        &problem,
        &args.learner.spec(),
        &args.constraint.spec(),
        args.budget,
        !args.no_teacher,
    )?;
    let alpha = diagnostics::alpha_of_run(&transcript);
    let json = serde_json::to_string_pretty(&transcript)?;
    match &args.out {
        Some(path) => std::fs::write(path, json + "\n")?,
        None => println!("{json}"),
    }
    eprintln!(
        "rounds {} labels {} terminated {} alpha {:?}",
        transcript.rounds.len(),
        transcript.total_examples,
        transcript.terminated,
        alpha
    );
    if !transcript.terminated {
        eprintln!("warning: budget exhausted before the version space settled");
    }
    Ok(())
}

fn run_sweep_cmd(args: SweepArgs) -> Result<()> {
    let mut config: SweepConfig = toml::from_str(
        &std::fs::read_to_string(&args.config)
            .with_context(|| format!("reading {}", args.config.display()))?,
    )?;
    // Seed priority: --seed flag, then TEACH_SEED, then the config value.
    if let Some(seed) = args.seed {
        config.master_seed = seed;
    } else if let Ok(env_seed) = std::env::var("TEACH_SEED") {
        config.master_seed = env_seed
            .parse()
            .context("TEACH_SEED must be an unsigned integer")?;
    }
    let problem = match &config.problem {
        ProblemSource::Path(path) => data::load_problem(path)?,
        ProblemSource::Synthetic(cfg) => data::gen_synthetic(cfg)?,
    };
    let out = sweep::sweep_to_dir(&problem, &config, &args.out_dir)?;
    println!(
        "wrote {} runs and {} aggregate rows under {}",
        out.rows.len(),
        out.aggregates.len(),
        args.out_dir.display()
    );
    Ok(())
}

fn diagnose(args: DiagnoseArgs) -> Result<()> {
    let mut problem = load(&args.problem, args.lenient)?;
    if let Some(target) = args.target {
        problem = problem.retarget(target)?;
    }
    if let Some(path) = &args.distances {
        let matrix = alteach::geometry::distance_matrix(&problem);
        let mut text = String::new();
        for row in &matrix {
            let cells: Vec<String> = row.iter().map(|d| d.to_string()).collect();
            text.push_str(&cells.join(","));
            text.push('\n');
        }
        std::fs::write(path, text)?;
        println!("wrote distance matrix to {}", path.display());
    }
    let report = diagnostics::diagnose(
        &problem,
        &args.learner.spec(),
        &args.constraint.spec(),
        args.depth_cap,
        args.sampled.map(|n| (n, args.learner.seed)),
    )?;
    if let Some(path) = &args.json {
        std::fs::write(path, serde_json::to_string_pretty(&report)? + "\n")?;
    }
    print_report(&report);
    Ok(())
}

fn print_report(report: &diagnostics::DiagnosticsReport) {
    let fmt_f = |v: Option<f64>| match v {
        Some(v) => format!("{v:.6}"),
        None => "not computed".into(),
    };
    let fmt_u = |v: Option<usize>| match v {
        Some(v) => v.to_string(),
        None => "not computed".into(),
    };
    println!("diagnostic            value");
    println!("---------------------------");
    match report.alpha {
        diagnostics::Alpha::Finite(a) => println!("alpha                 {a:.6}"),
        diagnostics::Alpha::Infinite => println!("alpha                 unbounded"),
    }
    let sampled_tag = if report.rho_gamma_sampled { " (sampled)" } else { "" };
    println!("rho_g                 {}{sampled_tag}", fmt_f(report.rho_g));
    println!("gamma_g               {}{sampled_tag}", fmt_f(report.gamma_g));
    println!(
        "c_star                {:.6} (+/- {:.0e})",
        report.c_star, report.c_star_tolerance
    );
    println!("k_min                 {}", report.k_min);
    println!("opt_t                 {}", fmt_u(report.opt_t));
    println!("opt_t_al              {}", fmt_u(report.opt_t_al));
    match &report.bound_thm1 {
        Some(b) => println!(
            "general bound         {:.3} (curvature {:.3} + log {:.3})",
            b.total, b.curvature_term, b.log_term
        ),
        None => println!("general bound         not computed"),
    }
    match &report.bound_thm3 {
        Some(b) => println!(
            "gbs teaching bound    {:.3} (epsilon {:.4}, alpha cap {:.3})",
            b.bound, b.epsilon, b.alpha_cap
        ),
        None => println!("gbs teaching bound    degenerate"),
    }
    match report.bound_gbs_alone {
        Some(b) => println!("gbs-alone bound       {b:.3}"),
        None => println!("gbs-alone bound       degenerate"),
    }
    println!("depth capped          {}", report.depth_capped);
    println!("note: {}", report.note);
}

fn fixtures(args: FixturesArgs) -> Result<()> {
    std::fs::create_dir_all(&args.out_dir)?;
    let report = oracles::pinned_gbs_counterexample()?;
    if report.alone.total_examples >= report.with_teacher.total_examples {
        bail!("pinned counterexample no longer reproduces the 3-vs-4 outcome");
    }
    let path = args.out_dir.join("remark1.json");
    data::save_problem(&report.problem, &path)?;
    println!(
        "wrote {} (GBS alone {} labels, with greedy teacher {})",
        path.display(),
        report.alone.total_examples,
        report.with_teacher.total_examples
    );
    let (thm2, _) = data::thm2_family(1)?;
    let path = args.out_dir.join("thm2_k1.json");
    data::save_problem(&thm2, &path)?;
    println!(
        "wrote {} ({} instances, {} hypotheses; reload with --lenient)",
        path.display(),
        thm2.instance_count(),
        thm2.hypothesis_count()
    );
    Ok(())
}
