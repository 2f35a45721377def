//! Problem-dependent diagnostics and indicative bound evaluators.
//!
//! `alpha` measures how much a query constraint throttles the teacher:
//! the worst-round ratio of the best unconstrained round gain to the best
//! gain available inside `xi(query)`. `rho` (pointwise submodularity
//! ratio) and `gamma` (pointwise backward curvature) are sequence-function
//! properties of the coverage objective; their greedy-vs-optimal
//! aggregates `rho_g`/`gamma_g` over all reachable version spaces enter
//! the sample-complexity bounds.
//!
//! Every bound here evaluates the asymptotic expressions with all hidden
//! constants set to 1 and natural logarithms. They are indicative values
//! for comparing regimes, not certified constants.

use std::collections::{HashSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::bitset::IndexSet;
use crate::error::{Error, Result};
use crate::learners::{select_query, LearnerSpec};
use crate::oracles::{self, OracleMode};
use crate::problem::{TeachingProblem, VersionSpace};
use crate::teaching::{run_session, ConstraintSpec, SequencePlay, Transcript};

/// Worst-round constraint ratio of a run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "value")]
pub enum Alpha {
    Finite(f64),
    /// Some round had a positive unconstrained gain while every admissible
    /// candidate gained nothing.
    Infinite,
}

impl Alpha {
    pub fn as_f64(&self) -> f64 {
        match self {
            Alpha::Finite(v) => *v,
            Alpha::Infinite => f64::INFINITY,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Alpha::Finite(_))
    }
}

/// `alpha = max_t best_unconstrained_gain / best_constrained_gain`.
/// Rounds where both gains are zero contribute 1.
pub fn alpha_of_run(transcript: &Transcript) -> Alpha {
    let mut worst = 1.0f64;
    for round in &transcript.rounds {
        let num = round.best_unconstrained_gain;
        let den = round.best_constrained_gain;
        if den == 0 {
            if num > 0 {
                return Alpha::Infinite;
            }
        } else {
            worst = worst.max(num as f64 / den as f64);
        }
    }
    Alpha::Finite(worst)
}

/// Pointwise submodularity ratio
/// `rho(sigma, sigma') = min_x Delta(x | sigma) / Delta(x | sigma ⊕ sigma')`
/// over instances with a positive denominator; 1 when no instance has one.
/// The marginals include each round's induced query.
pub fn submodularity_ratio(
    problem: &TeachingProblem,
    learner: &LearnerSpec,
    sigma: &[usize],
    sigma_prime: &[usize],
) -> Result<f64> {
    let mut before = SequencePlay::new(problem, learner);
    before.play(sigma)?;
    let mut after = before.clone();
    after.play(sigma_prime)?;

    let mut worst: Option<f64> = None;
    for x in 0..problem.instance_count() {
        let den = after.gain_of(x)?;
        if den == 0 {
            continue;
        }
        let num = before.gain_of(x)?;
        let ratio = num as f64 / den as f64;
        worst = Some(worst.map_or(ratio, |w: f64| w.min(ratio)));
    }
    Ok(worst.unwrap_or(1.0))
}

/// Pointwise backward curvature
/// `gamma(sigma, sigma') = 1 - (f(sigma' ⊕ sigma) - f(sigma)) / f(sigma')`.
/// Undefined when `f(sigma') = 0`.
pub fn backward_curvature(
    problem: &TeachingProblem,
    learner: &LearnerSpec,
    sigma: &[usize],
    sigma_prime: &[usize],
) -> Result<f64> {
    let f_prime = crate::teaching::sequence_objective(problem, learner, sigma_prime)? as f64;
    if f_prime == 0.0 {
        return Err(Error::Undefined(
            "backward curvature: f(sigma') = 0".into(),
        ));
    }
    let f_sigma = crate::teaching::sequence_objective(problem, learner, sigma)? as f64;
    let mut combined = sigma_prime.to_vec();
    combined.extend_from_slice(sigma);
    let f_combined = crate::teaching::sequence_objective(problem, learner, &combined)? as f64;
    Ok(1.0 - (f_combined - f_sigma) / f_prime)
}

/// The greedy-vs-optimal aggregates over reachable version spaces.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RhoGammaStar {
    pub rho_g: f64,
    pub gamma_g: f64,
    /// Set when the reachable-state enumeration was truncated.
    pub depth_capped: bool,
    /// Distinct version spaces examined (|H'| >= 2).
    pub classes_examined: usize,
}

/// Enumerates the version spaces reachable through complete rounds with an
/// arbitrary teaching choice per round (the learner's query is forced),
/// up to `depth_cap` rounds. Returns distinct member sets of size >= 2.
fn reachable_version_spaces(
    problem: &TeachingProblem,
    learner: &LearnerSpec,
    depth_cap: usize,
    max_states: usize,
) -> Result<(Vec<IndexSet>, bool)> {
    let full = IndexSet::full(problem.hypothesis_count());
    let start = (full.clone(), IndexSet::empty(problem.instance_count()));
    let mut seen_states: HashSet<(Vec<u64>, Vec<u64>)> = HashSet::new();
    let mut collected: Vec<IndexSet> = Vec::new();
    let mut collected_keys: HashSet<Vec<u64>> = HashSet::new();
    let mut capped = false;

    let mut frontier = VecDeque::new();
    seen_states.insert((start.0.blocks().to_vec(), start.1.blocks().to_vec()));
    frontier.push_back((start, 0usize));
    collected_keys.insert(full.blocks().to_vec());
    collected.push(full);

    while let Some(((vs, queried), depth)) = frontier.pop_front() {
        if vs.len() <= 1 {
            continue;
        }
        if depth >= depth_cap {
            capped = true;
            continue;
        }
        let vs_space = VersionSpace::from_members(vs.clone());
        let q = match select_query(learner, problem, &vs_space, &queried) {
            Ok(q) => q,
            Err(Error::NoUnqueriedInstance) => continue,
            Err(e) => return Err(e),
        };
        let mut vs_q = vs.clone();
        vs_q.subtract(problem.coverage_set(q)?);
        let mut queried_next = queried.clone();
        queried_next.insert(q);

        for c in 0..problem.instance_count() {
            let mut vs_next = vs_q.clone();
            vs_next.subtract(problem.coverage_set(c)?);
            if vs_next.len() >= 2 && collected_keys.insert(vs_next.blocks().to_vec()) {
                collected.push(vs_next.clone());
            }
            if seen_states.len() >= max_states {
                capped = true;
                frontier.clear();
                break;
            }
            let key = (vs_next.blocks().to_vec(), queried_next.blocks().to_vec());
            if seen_states.insert(key) {
                frontier.push_back(((vs_next, queried_next.clone()), depth + 1));
            }
        }
    }
    Ok((collected, capped))
}

/// Per-class greedy and optimal teaching sequences, as used by the
/// aggregates: the greedy sequence comes from an unconstrained greedy
/// session restarted on the class; the optimal sequence from the paired
/// oracle so that it has exactly one teaching example per round and covers
/// the class completely under playback.
fn class_sequences(
    problem: &TeachingProblem,
    learner: &LearnerSpec,
    instance_cap: usize,
) -> Result<(Vec<usize>, Vec<usize>)> {
    let greedy = run_session(problem, learner, &ConstraintSpec::Unconstrained, None, true)?;
    let opt = oracles::opt_teaching_with_mode(
        problem,
        learner,
        &ConstraintSpec::Unconstrained,
        OracleMode::paired(),
        instance_cap,
    )?;
    // Teaching examples sit at the odd positions of the paired witness.
    let optimal: Vec<usize> = opt.witness.iter().skip(1).step_by(2).map(|e| e.instance).collect();
    Ok((greedy.teaching_sequence(), optimal))
}

/// Computes `rho_g = min_{H'} min_{i,j} rho(x_{1:i}, sigma_{1:j})` and
/// `gamma_g = max_{H'} max_{i>=1} gamma(sigma, x_{1:i})` over reachable
/// version spaces, with `x` the greedy and `sigma` an optimal teaching
/// sequence for the class restricted to `H'`.
pub fn rho_gamma_star(
    problem: &TeachingProblem,
    learner: &LearnerSpec,
    depth_cap: usize,
) -> Result<RhoGammaStar> {
    let (classes, capped) =
        reachable_version_spaces(problem, learner, depth_cap, 200_000)?;
    let mut rho_g = 1.0f64;
    let mut gamma_g = 1.0f64;
    for members in &classes {
        let (sub, _) = problem.restrict(members)?;
        let (greedy, optimal) = class_sequences(&sub, learner, oracles::DEFAULT_EXACT_CAP)?;
        if greedy.is_empty() {
            // The class settled on the first query alone; both parameters
            // degenerate to 1 for it.
            continue;
        }
        for i in 1..=greedy.len() {
            let gamma = backward_curvature(&sub, learner, &optimal, &greedy[..i])?;
            gamma_g = gamma_g.max(gamma);
        }
        for i in 0..=greedy.len() {
            for j in 0..=optimal.len() {
                let rho = submodularity_ratio(&sub, learner, &greedy[..i], &optimal[..j])?;
                rho_g = rho_g.min(rho);
            }
        }
    }
    Ok(RhoGammaStar {
        rho_g,
        gamma_g,
        depth_capped: capped,
        classes_examined: classes.len(),
    })
}

/// Sampled variant for instances past the exact cap: follows `samples`
/// random teacher paths instead of the full BFS. Clearly a lower-coverage
/// estimate; reports are expected to label it as sampled.
pub fn rho_gamma_star_sampled(
    problem: &TeachingProblem,
    learner: &LearnerSpec,
    depth_cap: usize,
    samples: usize,
    seed: u64,
) -> Result<RhoGammaStar> {
    let mut rng = crate::rng::SplitMix64::new(seed);
    let mut keys: HashSet<Vec<u64>> = HashSet::new();
    let mut classes: Vec<IndexSet> = vec![IndexSet::full(problem.hypothesis_count())];
    keys.insert(classes[0].blocks().to_vec());
    for _ in 0..samples {
        let mut vs = IndexSet::full(problem.hypothesis_count());
        let mut queried = IndexSet::empty(problem.instance_count());
        for _ in 0..depth_cap {
            if vs.len() <= 1 {
                break;
            }
            let vs_space = VersionSpace::from_members(vs.clone());
            let q = match select_query(learner, problem, &vs_space, &queried) {
                Ok(q) => q,
                Err(Error::NoUnqueriedInstance) => break,
                Err(e) => return Err(e),
            };
            queried.insert(q);
            vs.subtract(problem.coverage_set(q)?);
            let c = rng.pick(problem.instance_count());
            vs.subtract(problem.coverage_set(c)?);
            if vs.len() >= 2 && keys.insert(vs.blocks().to_vec()) {
                classes.push(vs.clone());
            }
        }
    }
    let mut rho_g = 1.0f64;
    let mut gamma_g = 1.0f64;
    let mut examined = 0usize;
    for members in &classes {
        let (sub, _) = problem.restrict(members)?;
        // No instance-count refusal here; the oracle's state budget is the
        // real guard, and classes blowing past it are skipped.
        let (greedy, optimal) = match class_sequences(&sub, learner, usize::MAX) {
            Ok(seqs) => seqs,
            Err(Error::CapExceeded(_)) => continue,
            Err(e) => return Err(e),
        };
        examined += 1;
        if greedy.is_empty() {
            continue;
        }
        for i in 1..=greedy.len() {
            gamma_g = gamma_g.max(backward_curvature(&sub, learner, &optimal, &greedy[..i])?);
        }
        for i in 0..=greedy.len() {
            for j in 0..=optimal.len() {
                rho_g = rho_g.min(submodularity_ratio(&sub, learner, &greedy[..i], &optimal[..j])?);
            }
        }
    }
    Ok(RhoGammaStar {
        rho_g,
        gamma_g,
        depth_capped: true,
        classes_examined: examined,
    })
}

/// The two additive terms of the general sample-complexity bound, plus
/// their total (already multiplied by `opt`).
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Thm1Bound {
    pub curvature_term: f64,
    pub log_term: f64,
    pub total: f64,
}

/// General bound for the alpha-approximate greedy teacher:
/// `(alpha·lnH·ln(H/gamma) / (rho·gamma·ln(gamma/(gamma-1)))
///   + alpha·ln(H/gamma) / (rho·gamma)) · opt`,
/// with the first term vanishing as `gamma -> 1`.
pub fn bound_thm1(
    alpha: f64,
    rho_g: f64,
    gamma_g: f64,
    h_count: usize,
    opt_t_al: usize,
) -> Result<Thm1Bound> {
    if !(gamma_g >= 1.0) {
        return Err(Error::InvalidInput(format!("gamma_g must be >= 1, got {gamma_g}")));
    }
    if !(rho_g > 0.0) {
        return Err(Error::InvalidInput(format!("rho_g must be positive, got {rho_g}")));
    }
    let h = h_count as f64;
    let log_ratio = (h / gamma_g).ln().max(0.0);
    let curvature_term = if gamma_g == 1.0 {
        0.0
    } else {
        alpha * h.ln() * log_ratio / (rho_g * gamma_g * (gamma_g / (gamma_g - 1.0)).ln())
    };
    let log_term = alpha * log_ratio / (rho_g * gamma_g);
    Ok(Thm1Bound {
        curvature_term: curvature_term * opt_t_al as f64,
        log_term: log_term * opt_t_al as f64,
        total: (curvature_term + log_term) * opt_t_al as f64,
    })
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Thm3Bound {
    pub bound: f64,
    pub epsilon: f64,
    pub alpha_cap: f64,
}

/// GBS-specific bound: `epsilon = min{(1-c*)/(1+c*), c*/(k-c*)}`,
/// `alpha_cap = max{k/c*, 2/(1-c*)}`, bound `(alpha_cap/epsilon)·ln²H·opt`.
/// Degenerate at `c* ∈ {0, 1}`.
pub fn bound_thm3(k: usize, c_star: f64, h_count: usize, opt_t_al: usize) -> Result<Thm3Bound> {
    if k < 1 {
        return Err(Error::InvalidInput("k must be at least 1".into()));
    }
    if !(c_star > 0.0 && c_star < 1.0) {
        return Err(Error::Undefined(format!(
            "theorem-3 bound degenerate at c* = {c_star}"
        )));
    }
    let kf = k as f64;
    let epsilon = ((1.0 - c_star) / (1.0 + c_star)).min(c_star / (kf - c_star));
    let alpha_cap = (kf / c_star).max(2.0 / (1.0 - c_star));
    let log_h = (h_count as f64).ln();
    Ok(Thm3Bound {
        bound: alpha_cap / epsilon * log_h * log_h * opt_t_al as f64,
        epsilon,
        alpha_cap,
    })
}

/// GBS-alone bound `ln(H) / ln(1/eta)` with
/// `eta = max{(1+c*)/2, (k+1)/(k+2)}`. Degenerate when `eta >= 1`.
pub fn bound_gbs_alone(k: usize, c_star: f64, h_count: usize) -> Result<f64> {
    let eta = ((1.0 + c_star) / 2.0).max((k as f64 + 1.0) / (k as f64 + 2.0));
    if h_count <= 1 {
        return Ok(0.0);
    }
    if eta >= 1.0 {
        return Err(Error::Undefined(format!("eta = {eta} >= 1")));
    }
    Ok((h_count as f64).ln() / (1.0 / eta).ln())
}

/// One dichotomy violation: a reachable version space where the GBS query
/// neither balances within `c* |H'|` nor has `|H'| <= k/c*`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DichotomyViolation {
    pub members: Vec<usize>,
    pub query: usize,
    pub imbalance: i64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DichotomyReport {
    pub checked: usize,
    pub violations: Vec<DichotomyViolation>,
    pub degenerate_c_star: bool,
}

/// Checks, for every reachable version space `H'`, that the fresh GBS
/// query `x` satisfies `|sum_{h in H'} h(x)| <= c*|H'|` or `|H'| <= k/c*`.
pub fn verify_gbs_dichotomy(
    problem: &TeachingProblem,
    k: usize,
    c_star: f64,
    depth_cap: usize,
) -> Result<DichotomyReport> {
    let (classes, _) =
        reachable_version_spaces(problem, &LearnerSpec::Gbs, depth_cap, 200_000)?;
    let degenerate = c_star <= 1e-12;
    let mut violations = Vec::new();
    for members in &classes {
        let vs = VersionSpace::from_members(members.clone());
        let fresh = IndexSet::empty(problem.instance_count());
        let query = select_query(&LearnerSpec::Gbs, problem, &vs, &fresh)?;
        let imbalance: i64 = members
            .iter()
            .map(|h| problem.label(h, query) as i64)
            .sum();
        let balanced = imbalance.unsigned_abs() as f64 <= c_star * members.len() as f64 + 1e-9;
        let small = degenerate || (members.len() as f64) <= k as f64 / c_star + 1e-9;
        if !balanced && !small {
            violations.push(DichotomyViolation {
                members: members.iter().collect(),
                query,
                imbalance,
            });
        }
    }
    Ok(DichotomyReport {
        checked: classes.len(),
        violations,
        degenerate_c_star: degenerate,
    })
}

/// Everything the `diagnose` command reports for one configuration.
/// Quantities needing an exact solve are `None` past the exact-solve cap.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    pub alpha: Alpha,
    pub rho_g: Option<f64>,
    pub gamma_g: Option<f64>,
    /// Set when rho/gamma came from the opt-in sampled enumeration.
    pub rho_gamma_sampled: bool,
    pub c_star: f64,
    pub c_star_tolerance: f64,
    pub k_min: usize,
    pub opt_t: Option<usize>,
    pub opt_t_al: Option<usize>,
    pub bound_thm1: Option<Thm1Bound>,
    pub bound_thm3: Option<Thm3Bound>,
    pub bound_gbs_alone: Option<f64>,
    pub depth_capped: bool,
    /// Bounds use constant 1 for every hidden constant and natural logs.
    pub note: String,
}

/// Runs the full diagnostic battery for `(problem, learner, constraint)`.
///
/// On instances past the exact-solve cap the optimum-dependent quantities
/// are reported as not computed; `sampled = Some((paths, seed))` opts into
/// the sampled rho/gamma estimate instead, flagged as such.
pub fn diagnose(
    problem: &TeachingProblem,
    learner: &LearnerSpec,
    constraint: &ConstraintSpec,
    depth_cap: usize,
    sampled: Option<(usize, u64)>,
) -> Result<DiagnosticsReport> {
    let transcript = run_session(problem, learner, constraint, None, true)?;
    let alpha = alpha_of_run(&transcript);
    let coh = crate::geometry::coherence(problem, 1e-6)?;
    let k_min = crate::geometry::min_neighborly_k(problem)?;
    let exact = problem.instance_count() <= oracles::DEFAULT_EXACT_CAP;

    let (rg, opt_t, opt_t_al) = if exact {
        let rg = rho_gamma_star(problem, learner, depth_cap)?;
        let opt_t = oracles::teaching_dimension(problem)?.value;
        let opt_t_al =
            oracles::opt_teaching_with_learner(problem, learner, &ConstraintSpec::Unconstrained)?
                .value;
        (Some((rg, false)), Some(opt_t), Some(opt_t_al))
    } else if let Some((paths, seed)) = sampled {
        let rg = rho_gamma_star_sampled(problem, learner, depth_cap, paths, seed)?;
        (Some((rg, true)), None, None)
    } else {
        (None, None, None)
    };

    let bound1 = match (&rg, opt_t_al, &alpha) {
        (Some((rg, false)), Some(opt), Alpha::Finite(a)) if !rg.depth_capped => {
            Some(bound_thm1(*a, rg.rho_g, rg.gamma_g, problem.hypothesis_count(), opt)?)
        }
        _ => None,
    };
    let bound3 = opt_t_al
        .and_then(|opt| bound_thm3(k_min, coh.value, problem.hypothesis_count(), opt).ok());
    let gbs_alone = bound_gbs_alone(k_min, coh.value, problem.hypothesis_count()).ok();

    Ok(DiagnosticsReport {
        alpha,
        rho_g: rg.as_ref().map(|(r, _)| r.rho_g),
        gamma_g: rg.as_ref().map(|(r, _)| r.gamma_g),
        rho_gamma_sampled: rg.as_ref().is_some_and(|(_, sampled)| *sampled),
        c_star: coh.value,
        c_star_tolerance: coh.tolerance,
        k_min,
        opt_t,
        opt_t_al,
        bound_thm1: bound1,
        bound_thm3: bound3,
        bound_gbs_alone: gbs_alone,
        depth_capped: rg.as_ref().is_some_and(|(r, _)| r.depth_capped),
        note: "bounds are indicative: asymptotic constants set to 1, natural logarithms".into(),
    })
}
