//! Problem generation and serialization.
//!
//! `gen_synthetic` builds the two-Gaussian 2-D dataset with linear
//! threshold hypotheses drawn from eight angular components. `thm2_family`
//! builds the adversarial chain instance on which the greedy teacher under
//! a neighbor-chain constraint needs every example while an unconstrained
//! optimal teacher needs one round; the construction verifies its own
//! behavior before returning. Problems round-trip through a small JSON
//! format.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learners::LearnerSpec;
use crate::oracles;
use crate::problem::TeachingProblem;
use crate::rng::SplitMix64;
use crate::teaching::{run_session, ConstraintSpec};

/// Parameters for the synthetic two-class problem.
///
/// Instances are 2-D points, half per class. Hypotheses are signed linear
/// thresholds `sign(x·(cos θ, sin θ) - b)` with `(θ, b)` drawn from eight
/// Gaussian components with means `(π/4·i, 0)` and covariance
/// `diag(2, 5e-3)`; `sign(0) = +1` throughout. The class feature Gaussians
/// are crate defaults, not reference values, and are configurable.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticConfig {
    pub n_points: usize,
    pub n_hypotheses: usize,
    pub class_means: [[f64; 2]; 2],
    /// Isotropic feature covariance scale: covariance = scale · I.
    pub class_covariance_scale: f64,
    /// Diagonal of the hypothesis-parameter covariance (θ, b).
    pub hypothesis_covariance: [f64; 2],
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            n_points: 200,
            n_hypotheses: 64,
            class_means: [[-1.0, 0.5], [1.0, -0.5]],
            class_covariance_scale: 0.25,
            hypothesis_covariance: [2.0, 5e-3],
            seed: 0,
        }
    }
}

const HYPOTHESIS_COMPONENTS: usize = 8;
const DEDUP_RETRIES_PER_ROW: usize = 1000;

/// Generates the synthetic problem. Pure in `(config, seed)`; identical
/// configs produce identical problems. The stored target is hypothesis 0
/// as a placeholder — experiments retarget per run.
pub fn gen_synthetic(config: &SyntheticConfig) -> Result<TeachingProblem> {
    if config.n_points < 2 || config.n_points % 2 != 0 {
        return Err(Error::InvalidInput(
            "n_points must be even and at least 2".into(),
        ));
    }
    if config.n_hypotheses == 0 || config.n_hypotheses % HYPOTHESIS_COMPONENTS != 0 {
        return Err(Error::InvalidInput(format!(
            "n_hypotheses must be a positive multiple of {HYPOTHESIS_COMPONENTS}"
        )));
    }
    if config.class_covariance_scale <= 0.0
        || config.hypothesis_covariance.iter().any(|&v| v <= 0.0)
    {
        return Err(Error::InvalidInput("covariances must be positive".into()));
    }

    let mut rng = SplitMix64::new(config.seed);
    let std = config.class_covariance_scale.sqrt();
    let mut features = Vec::with_capacity(config.n_points);
    for class in 0..2 {
        let mean = config.class_means[class];
        for _ in 0..config.n_points / 2 {
            features.push(vec![
                mean[0] + std * rng.standard_normal(),
                mean[1] + std * rng.standard_normal(),
            ]);
        }
    }

    let theta_std = config.hypothesis_covariance[0].sqrt();
    let bias_std = config.hypothesis_covariance[1].sqrt();
    let per_component = config.n_hypotheses / HYPOTHESIS_COMPONENTS;
    let mut rows: Vec<Vec<i8>> = Vec::with_capacity(config.n_hypotheses);
    for h in 0..config.n_hypotheses {
        let component = h / per_component;
        let mean_theta = std::f64::consts::FRAC_PI_4 * component as f64;
        let mut attempts = 0;
        loop {
            let theta = mean_theta + theta_std * rng.standard_normal();
            let bias = bias_std * rng.standard_normal();
            let (sin, cos) = theta.sin_cos();
            let row: Vec<i8> = features
                .iter()
                .map(|f| if f[0] * cos + f[1] * sin - bias >= 0.0 { 1 } else { -1 })
                .collect();
            if !rows.contains(&row) {
                rows.push(row);
                break;
            }
            attempts += 1;
            if attempts >= DEDUP_RETRIES_PER_ROW {
                return Err(Error::SearchExhausted(format!(
                    "could not draw {} distinct hypotheses (stuck at {})",
                    config.n_hypotheses,
                    rows.len()
                )));
            }
        }
    }

    TeachingProblem::new(rows, 0, Some(features), None)
}

/// The adversarial chain family. For `k_param >= 1` it has
/// `m = (6·k_param + 6)²` hypotheses and `sqrt(m) + 3` instances arranged
/// on an index chain:
///
/// - coverage sizes `m/6`, `m/6 + 1`, `m/6 - 1` for the first three
///   instances (the third sharing part of the first's coverage),
/// - each later instance freshly covers `sqrt(m) + 4 - i` hypotheses,
/// - the last instance covers everything but the target.
///
/// Under the neighbor-chain constraint with radius 1, a GBS learner drags
/// the greedy teacher along the whole chain (every example gets used),
/// while an unconstrained teacher finishes in one round via the last
/// instance. Both behaviors are verified on the constructed instance
/// before it is returned.
pub fn thm2_family(k_param: usize) -> Result<(TeachingProblem, ConstraintSpec)> {
    if k_param == 0 {
        return Err(Error::InvalidInput("k_param must be at least 1".into()));
    }
    let root = 6 * k_param + 6;
    let m = root * root;
    let n = root + 3;
    let overlap = root / 2 + 1;

    // Non-target hypothesis blocks, laid out consecutively from index 1:
    // [shared][s1 own][s2 own][s3 own][fresh_4]...[fresh_n].
    let s1_own = m / 6 - overlap;
    let s2_own = m / 6 + 1;
    let s3_own = m / 6 - 1 - overlap;
    let fresh: Vec<usize> = (4..=n).map(|i| root + 4 - i).collect();
    debug_assert_eq!(
        overlap + s1_own + s2_own + s3_own + fresh.iter().sum::<usize>(),
        m - 1
    );

    let mut next = 1usize;
    let mut block = |size: usize| {
        let range = next..next + size;
        next += size;
        range
    };
    let shared: Vec<usize> = block(overlap).collect();
    let own1: Vec<usize> = block(s1_own).collect();
    let own2: Vec<usize> = block(s2_own).collect();
    let own3: Vec<usize> = block(s3_own).collect();
    let fresh_blocks: Vec<Vec<usize>> = fresh.iter().map(|&s| block(s).collect()).collect();
    debug_assert_eq!(next, m);

    // Row h: -1 exactly on the instances covering h; target row 0 is all +1.
    let mut rows = vec![vec![1i8; n]; m];
    let mut cover = |hyps: &[usize], x: usize| {
        for &h in hyps {
            rows[h][x] = -1;
        }
    };
    cover(&shared, 0);
    cover(&own1, 0);
    cover(&own2, 1);
    cover(&shared, 2);
    cover(&own3, 2);
    for (i, hyps) in fresh_blocks.iter().enumerate() {
        cover(hyps, 3 + i);
    }
    for h in 1..m {
        rows[h][n - 1] = -1; // the last instance covers every non-target
    }

    let problem = TeachingProblem::new(rows, 0, None, None)?;
    let constraint = ConstraintSpec::NeighborChain { radius: 1 };

    // Behavioral verification: reject the construction if it does not
    // reproduce the intended dynamics.
    let greedy = run_session(&problem, &LearnerSpec::Gbs, &constraint, Some(4 * n), true)?;
    if !greedy.terminated || greedy.total_examples != n {
        return Err(Error::Undefined(format!(
            "chain construction failed verification: greedy run used {} labels, expected {n}",
            greedy.total_examples
        )));
    }
    let first = &greedy.rounds[0];
    if first.query.instance != 1 || first.contrastive.map(|e| e.instance) != Some(0) {
        return Err(Error::Undefined(
            "chain construction failed verification: unexpected first round".into(),
        ));
    }
    let opt = oracles::opt_teaching_with_mode(
        &problem,
        &LearnerSpec::Gbs,
        &ConstraintSpec::Unconstrained,
        oracles::OracleMode::session(),
        n,
    )?;
    if opt.value != 2 {
        return Err(Error::Undefined(format!(
            "chain construction failed verification: unconstrained optimum {} != 2",
            opt.value
        )));
    }
    Ok((problem, constraint))
}

/// On-disk problem schema.
#[derive(Serialize, Deserialize)]
struct ProblemFile {
    labels: Vec<Vec<i8>>,
    target: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    features: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    names: Option<Vec<String>>,
}

pub fn problem_to_json(problem: &TeachingProblem) -> String {
    let file = ProblemFile {
        labels: problem.label_rows(),
        target: problem.target(),
        features: problem.features().map(|f| f.to_vec()),
        names: problem.names().map(|n| n.to_vec()),
    };
    serde_json::to_string_pretty(&file).expect("problem serialization cannot fail")
}

pub fn save_problem(problem: &TeachingProblem, path: &Path) -> Result<()> {
    std::fs::write(path, problem_to_json(problem) + "\n")?;
    Ok(())
}

pub fn problem_from_json(text: &str) -> Result<TeachingProblem> {
    let file: ProblemFile = serde_json::from_str(text).map_err(|e| {
        Error::InvalidProblem(format!(
            "line {}, column {}: {e}",
            e.line(),
            e.column()
        ))
    })?;
    let problem = TeachingProblem::new(file.labels, file.target, file.features, file.names)?;
    problem.preflight_teachable()?;
    Ok(problem)
}

pub fn load_problem(path: &Path) -> Result<TeachingProblem> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidProblem(format!("{}: {e}", path.display())))?;
    problem_from_json(&text)
}

/// Loader variant accepting interchangeable duplicate non-target rows
/// (the adversarial chain family has them by construction). Still rejects
/// rows duplicating the target.
pub fn load_problem_lenient(path: &Path) -> Result<TeachingProblem> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidProblem(format!("{}: {e}", path.display())))?;
    let file: ProblemFile = serde_json::from_str(&text).map_err(|e| {
        Error::InvalidProblem(format!("line {}, column {}: {e}", e.line(), e.column()))
    })?;
    let problem = TeachingProblem::new(file.labels, file.target, file.features, file.names)?;
    problem.check_teachable()?;
    Ok(problem)
}

/// A uniformly random teachable problem with pairwise-distinct rows, for
/// verification suites. Instance and hypothesis counts are drawn from the
/// given inclusive ranges; the target is random.
pub fn random_problem(
    rng: &mut SplitMix64,
    instances: (usize, usize),
    hypotheses: (usize, usize),
) -> TeachingProblem {
    loop {
        let n_x = instances.0 + rng.pick(instances.1 - instances.0 + 1);
        let n_h = hypotheses.0 + rng.pick(hypotheses.1 - hypotheses.0 + 1);
        let rows: Vec<Vec<i8>> = (0..n_h)
            .map(|_| (0..n_x).map(|_| if rng.next_bool() { 1 } else { -1 }).collect())
            .collect();
        let target = rng.pick(n_h);
        if let Ok(p) = TeachingProblem::new(rows, target, None, None) {
            if p.preflight_teachable().is_ok() {
                return p;
            }
        }
    }
}
