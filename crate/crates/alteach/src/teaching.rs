//! Constraint functions, the greedy contrastive teacher, and protocol
//! sessions.
//!
//! A session alternates learner queries with teacher picks. The teacher is
//! greedy: among the admissible contrastive examples for the current query
//! it picks the one whose combined round removal (query coverage united
//! with candidate coverage) is largest, or largest per unit cost when costs
//! are non-uniform. Each round also records the best gain an unconstrained
//! teacher could have achieved, which later feeds the alpha diagnostic.

use serde::{Deserialize, Serialize};

use crate::bitset::IndexSet;
use crate::error::{Error, Result};
use crate::learners::{select_query, LearnerSpec};
use crate::problem::{Example, TeachingProblem, VersionSpace};

/// Rule mapping a query to the teacher's admissible contrastive set.
///
/// The distance kinds need instance features; `psi` in (0, 1] scales how
/// much of the candidate pool stays admissible. The query itself is never
/// admissible.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConstraintSpec {
    Unconstrained,
    /// Nearest `ceil(psi * m)` among instances whose target label differs
    /// from the query's.
    CloseOpposite { psi: f64 },
    /// Farthest `ceil(psi * m)` among instances sharing the query's target
    /// label.
    FarSame { psi: f64 },
    /// Union of the two distance rules.
    CloseOppositeOrFarSame { psi: f64 },
    /// Instances within `radius` positions of the query index.
    NeighborChain { radius: usize },
}

impl ConstraintSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            ConstraintSpec::CloseOpposite { psi }
            | ConstraintSpec::FarSame { psi }
            | ConstraintSpec::CloseOppositeOrFarSame { psi } => {
                if !(*psi > 0.0 && *psi <= 1.0) {
                    return Err(Error::InvalidInput(format!(
                        "psi must lie in (0, 1], got {psi}"
                    )));
                }
            }
            ConstraintSpec::NeighborChain { radius } => {
                if *radius == 0 {
                    return Err(Error::InvalidInput("radius must be positive".into()));
                }
            }
            ConstraintSpec::Unconstrained => {}
        }
        Ok(())
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            ConstraintSpec::Unconstrained => "unconstrained",
            ConstraintSpec::CloseOpposite { .. } => "close_opposite",
            ConstraintSpec::FarSame { .. } => "far_same",
            ConstraintSpec::CloseOppositeOrFarSame { .. } => "close_opposite_or_far_same",
            ConstraintSpec::NeighborChain { .. } => "neighbor_chain",
        }
    }

    pub fn psi(&self) -> Option<f64> {
        match self {
            ConstraintSpec::CloseOpposite { psi }
            | ConstraintSpec::FarSame { psi }
            | ConstraintSpec::CloseOppositeOrFarSame { psi } => Some(*psi),
            _ => None,
        }
    }
}

fn squared_distance(features: &[Vec<f64>], a: usize, b: usize) -> f64 {
    features[a]
        .iter()
        .zip(&features[b])
        .map(|(x, y)| (x - y) * (x - y))
        .sum()
}

fn features_for<'p>(
    spec: &ConstraintSpec,
    problem: &'p TeachingProblem,
) -> Result<&'p [Vec<f64>]> {
    problem.features().ok_or_else(|| Error::MissingFeatures {
        kind: spec.kind_name().into(),
    })
}

/// Instances whose target label differs from (`opposite`) or matches the
/// query's, closest first / farthest first, distance ties by lower index.
fn ranked_by_distance(
    problem: &TeachingProblem,
    features: &[Vec<f64>],
    query: usize,
    opposite: bool,
    farthest_first: bool,
) -> Vec<usize> {
    let query_label = problem.target_label(query);
    let mut pool: Vec<(f64, usize)> = (0..problem.instance_count())
        .filter(|&x| x != query && ((problem.target_label(x) != query_label) == opposite))
        .map(|x| (squared_distance(features, query, x), x))
        .collect();
    pool.sort_by(|a, b| {
        let dist = if farthest_first {
            b.0.total_cmp(&a.0)
        } else {
            a.0.total_cmp(&b.0)
        };
        dist.then(a.1.cmp(&b.1))
    });
    pool.into_iter().map(|(_, x)| x).collect()
}

fn take_portion(ranked: Vec<usize>, psi: f64) -> Vec<usize> {
    let keep = (psi * ranked.len() as f64).ceil() as usize;
    ranked.into_iter().take(keep).collect()
}

/// The admissible contrastive set `xi(query)`, sorted ascending.
pub fn constrained_set(
    spec: &ConstraintSpec,
    problem: &TeachingProblem,
    query: usize,
) -> Result<Vec<usize>> {
    spec.validate()?;
    if query >= problem.instance_count() {
        return Err(Error::InstanceOutOfRange {
            index: query,
            count: problem.instance_count(),
        });
    }
    let mut set = match spec {
        ConstraintSpec::Unconstrained => {
            (0..problem.instance_count()).filter(|&x| x != query).collect()
        }
        ConstraintSpec::CloseOpposite { psi } => {
            let feats = features_for(spec, problem)?;
            take_portion(ranked_by_distance(problem, feats, query, true, false), *psi)
        }
        ConstraintSpec::FarSame { psi } => {
            let feats = features_for(spec, problem)?;
            take_portion(ranked_by_distance(problem, feats, query, false, true), *psi)
        }
        ConstraintSpec::CloseOppositeOrFarSame { psi } => {
            let feats = features_for(spec, problem)?;
            let mut close = take_portion(ranked_by_distance(problem, feats, query, true, false), *psi);
            let far = take_portion(ranked_by_distance(problem, feats, query, false, true), *psi);
            close.extend(far);
            close
        }
        ConstraintSpec::NeighborChain { radius } => (0..problem.instance_count())
            .filter(|&x| x != query && x.abs_diff(query) <= *radius)
            .collect(),
    };
    set.sort_unstable();
    set.dedup();
    Ok(set)
}

/// How many hypotheses this round removes if the teacher picks `candidate`:
/// `|vs ∩ (S(query) ∪ S(candidate))|`. The round's query is already fixed
/// when the teacher chooses, so its coverage counts toward the gain.
pub fn marginal_gain(
    problem: &TeachingProblem,
    vs_before_round: &VersionSpace,
    query: usize,
    candidate: usize,
) -> Result<usize> {
    let sq = problem.coverage_set(query)?;
    let sc = problem.coverage_set(candidate)?;
    Ok(vs_before_round.members().intersect_union_count(sq, sc))
}

/// Outcome of one greedy teacher decision.
#[derive(Clone, Debug)]
pub struct GreedyPick {
    /// Chosen candidate; `None` when the candidate set was empty.
    pub choice: Option<usize>,
    /// Best round gain over the candidate set (unit-cost, for bookkeeping).
    pub best_constrained_gain: usize,
    /// Best round gain over every instance, as an unconstrained teacher
    /// would see it.
    pub best_unconstrained_gain: usize,
}

/// Greedy contrastive pick: argmax of the round gain over `candidates`
/// (gain per unit cost when `cost` is given), lowest index on ties.
pub fn greedy_pick(
    problem: &TeachingProblem,
    vs_before_round: &VersionSpace,
    query: usize,
    candidates: &[usize],
    cost: Option<&[f64]>,
) -> Result<GreedyPick> {
    if let Some(costs) = cost {
        for (x, &c) in costs.iter().enumerate() {
            if !(c > 0.0) {
                return Err(Error::NonPositiveCost { index: x, cost: c });
            }
        }
    }
    let mut best_unconstrained = 0usize;
    for x in 0..problem.instance_count() {
        best_unconstrained = best_unconstrained.max(marginal_gain(problem, vs_before_round, query, x)?);
    }

    let mut choice = None;
    let mut best_gain = 0usize;
    let mut best_ratio = f64::NEG_INFINITY;
    let mut best_constrained = 0usize;
    for &c in candidates {
        let gain = marginal_gain(problem, vs_before_round, query, c)?;
        best_constrained = best_constrained.max(gain);
        match cost {
            None => {
                if choice.is_none() || gain > best_gain {
                    choice = Some(c);
                    best_gain = gain;
                }
            }
            Some(costs) => {
                let ratio = gain as f64 / costs[c];
                if choice.is_none() || ratio > best_ratio {
                    choice = Some(c);
                    best_ratio = ratio;
                }
            }
        }
    }
    Ok(GreedyPick {
        choice,
        best_constrained_gain: best_constrained,
        best_unconstrained_gain: best_unconstrained,
    })
}

/// One protocol round as recorded in a transcript.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Round {
    pub t: usize,
    pub query: Example,
    /// Absent when the version space settled on the query alone (the
    /// teacher has nothing left to teach) or in learner-only sessions.
    pub contrastive: Option<Example>,
    pub vs_size_after: usize,
    pub best_unconstrained_gain: usize,
    pub best_constrained_gain: usize,
}

/// Full record of a session.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Transcript {
    pub rounds: Vec<Round>,
    /// `false` means the round budget ran out before the version space
    /// settled; such runs are reported, never dropped.
    pub terminated: bool,
    /// Labeled examples issued: one per query plus one per contrastive.
    pub total_examples: usize,
}

impl Transcript {
    pub fn teaching_sequence(&self) -> Vec<usize> {
        self.rounds
            .iter()
            .filter_map(|r| r.contrastive.map(|e| e.instance))
            .collect()
    }

    pub fn query_sequence(&self) -> Vec<usize> {
        self.rounds.iter().map(|r| r.query.instance).collect()
    }
}

/// Default round budget: generous enough that only genuinely stuck runs
/// hit it, and those are flagged via `terminated = false`.
pub fn default_budget(problem: &TeachingProblem) -> usize {
    4 * problem.hypothesis_count().max(1)
}

/// Runs the interaction protocol until the version space settles or the
/// round budget is exhausted.
///
/// Each round: the learner queries, the teacher labels the query, and —
/// when `with_teacher` is set and hypotheses besides the target survived
/// the query — the teacher adds its greedy contrastive pick from
/// `xi(query)`. Rounds where the query alone settles the class issue no
/// contrastive example. Deterministic given problem, specs, and seeds.
pub fn run_session(
    problem: &TeachingProblem,
    learner: &LearnerSpec,
    constraint: &ConstraintSpec,
    budget_rounds: Option<usize>,
    with_teacher: bool,
) -> Result<Transcript> {
    problem.check_teachable()?;
    learner.validate()?;
    constraint.validate()?;
    let budget = budget_rounds.unwrap_or_else(|| default_budget(problem));
    if budget == 0 {
        return Err(Error::InvalidInput("budget must be at least one round".into()));
    }

    let mut vs = problem.full_version_space();
    let mut queried = IndexSet::empty(problem.instance_count());
    let mut rounds = Vec::new();

    for t in 1..=budget {
        if vs.len() <= 1 {
            break;
        }
        let q = select_query(learner, problem, &vs, &queried)?;
        queried.insert(q);
        let vs_before = vs.clone();
        vs.eliminate(problem.coverage_set(q)?);

        let mut contrastive = None;
        let mut best_unconstrained = 0;
        let mut best_constrained = 0;
        if with_teacher && vs.len() > 1 {
            let candidates = constrained_set(constraint, problem, q)?;
            let pick = greedy_pick(problem, &vs_before, q, &candidates, None)?;
            best_unconstrained = pick.best_unconstrained_gain;
            best_constrained = pick.best_constrained_gain;
            if let Some(c) = pick.choice {
                vs.eliminate(problem.coverage_set(c)?);
                contrastive = Some(Example {
                    instance: c,
                    label: problem.target_label(c),
                });
            }
        }
        rounds.push(Round {
            t,
            query: Example {
                instance: q,
                label: problem.target_label(q),
            },
            contrastive,
            vs_size_after: vs.len(),
            best_unconstrained_gain: best_unconstrained,
            best_constrained_gain: best_constrained,
        });
        if vs.len() == 1 {
            break;
        }
    }

    let total_examples = rounds
        .iter()
        .map(|r| 1 + r.contrastive.is_some() as usize)
        .sum();
    Ok(Transcript {
        rounds,
        terminated: vs.len() == 1,
        total_examples,
    })
}

/// Total cost of a transcript: `sum c(query) + c(contrastive)` over rounds.
/// Unit cost reduces to `total_examples`.
pub fn cost_of(transcript: &Transcript, cost: Option<&[f64]>) -> f64 {
    match cost {
        None => transcript.total_examples as f64,
        Some(costs) => transcript
            .rounds
            .iter()
            .map(|r| {
                costs[r.query.instance]
                    + r.contrastive.map_or(0.0, |e| costs[e.instance])
            })
            .sum(),
    }
}

/// Replay state for evaluating the sequence objective `f` and its
/// marginals on arbitrary teaching sequences.
///
/// Advancing by one teaching example plays a full round: the induced query
/// (skipped if the learner exhausted the instance pool, which only happens
/// past termination on well-formed problems) followed by the example.
#[derive(Clone)]
pub struct SequencePlay<'p> {
    problem: &'p TeachingProblem,
    learner: LearnerSpec,
    vs: VersionSpace,
    queried: IndexSet,
}

impl<'p> SequencePlay<'p> {
    pub fn new(problem: &'p TeachingProblem, learner: &LearnerSpec) -> Self {
        SequencePlay {
            problem,
            learner: *learner,
            vs: problem.full_version_space(),
            queried: IndexSet::empty(problem.instance_count()),
        }
    }

    /// The query the learner would pose in the current state.
    pub fn induced_query(&self) -> Result<Option<usize>> {
        match select_query(&self.learner, self.problem, &self.vs, &self.queried) {
            Ok(q) => Ok(Some(q)),
            Err(Error::NoUnqueriedInstance) => Ok(None),
            Err(e) => Err(e),
        }
    }

    /// Marginal gain of appending `x`: `f(seq ⊕ x) - f(seq)`, including the
    /// round's induced query.
    pub fn gain_of(&self, x: usize) -> Result<usize> {
        let sx = self.problem.coverage_set(x)?;
        Ok(match self.induced_query()? {
            Some(q) => {
                let sq = self.problem.coverage_set(q)?;
                self.vs.members().intersect_union_count(sq, sx)
            }
            None => self.vs.members().intersect_count(sx),
        })
    }

    /// Plays one round with teaching example `x`.
    pub fn advance(&mut self, x: usize) -> Result<()> {
        if let Some(q) = self.induced_query()? {
            self.queried.insert(q);
            self.vs.eliminate(self.problem.coverage_set(q)?);
        }
        self.vs.eliminate(self.problem.coverage_set(x)?);
        Ok(())
    }

    pub fn play(&mut self, seq: &[usize]) -> Result<()> {
        for &x in seq {
            self.advance(x)?;
        }
        Ok(())
    }

    /// Current objective value `f = |H| - |version space|`.
    pub fn objective(&self) -> usize {
        self.problem.hypothesis_count() - self.vs.len()
    }

    pub fn version_space(&self) -> &VersionSpace {
        &self.vs
    }
}

/// `f(seq)` for a teaching sequence under a given learner.
pub fn sequence_objective(
    problem: &TeachingProblem,
    learner: &LearnerSpec,
    seq: &[usize],
) -> Result<usize> {
    let mut play = SequencePlay::new(problem, learner);
    play.play(seq)?;
    Ok(play.objective())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::fixtures::p0;

    #[test]
    fn unconstrained_is_everything_but_query() {
        let p = p0();
        let set = constrained_set(&ConstraintSpec::Unconstrained, &p, 0).unwrap();
        assert_eq!(set, vec![1, 2]);
    }

    #[test]
    fn close_opposite_ranked_by_distance() {
        // Five collinear points, target labels (+, +, -, -, -).
        let p = TeachingProblem::new(
            vec![vec![1, 1, -1, -1, -1], vec![-1, 1, 1, -1, -1]],
            0,
            Some((0..5).map(|i| vec![i as f64]).collect()),
            None,
        )
        .unwrap();
        // Query index 1 (+): opposite pool {2,3,4}, ceil(0.4 * 3) = 2 nearest.
        let set = constrained_set(&ConstraintSpec::CloseOpposite { psi: 0.4 }, &p, 1).unwrap();
        assert_eq!(set, vec![2, 3]);
        // psi = 1 keeps the whole opposite pool.
        let set = constrained_set(&ConstraintSpec::CloseOpposite { psi: 1.0 }, &p, 1).unwrap();
        assert_eq!(set, vec![2, 3, 4]);
        // Farthest same-label point from index 1 is index 0 only.
        let set = constrained_set(&ConstraintSpec::FarSame { psi: 0.5 }, &p, 1).unwrap();
        assert_eq!(set, vec![0]);
        // The union kind combines both.
        let set =
            constrained_set(&ConstraintSpec::CloseOppositeOrFarSame { psi: 0.4 }, &p, 1).unwrap();
        assert_eq!(set, vec![0, 2, 3]);
    }

    #[test]
    fn tiny_psi_still_yields_a_candidate() {
        // Ceiling sizing: psi > 0 keeps at least one instance whenever the
        // label pool is nonempty.
        let p = TeachingProblem::new(
            vec![vec![1, 1, -1, -1, -1], vec![-1, 1, 1, -1, -1]],
            0,
            Some((0..5).map(|i| vec![i as f64]).collect()),
            None,
        )
        .unwrap();
        let set = constrained_set(&ConstraintSpec::CloseOpposite { psi: 1e-6 }, &p, 1).unwrap();
        assert_eq!(set, vec![2]);
    }

    #[test]
    fn distance_kind_without_features_fails() {
        let p = p0();
        assert!(matches!(
            constrained_set(&ConstraintSpec::CloseOpposite { psi: 0.5 }, &p, 0),
            Err(Error::MissingFeatures { .. })
        ));
    }

    #[test]
    fn neighbor_chain_excludes_query() {
        let p = TeachingProblem::new(
            vec![vec![1; 6], vec![-1, 1, 1, 1, 1, 1], vec![1, 1, 1, -1, 1, 1]],
            0,
            None,
            None,
        )
        .unwrap();
        assert_eq!(
            constrained_set(&ConstraintSpec::NeighborChain { radius: 1 }, &p, 2).unwrap(),
            vec![1, 3]
        );
        assert_eq!(
            constrained_set(&ConstraintSpec::NeighborChain { radius: 2 }, &p, 0).unwrap(),
            vec![1, 2]
        );
    }

    #[test]
    fn marginal_gain_unions_coverage() {
        let p = p0();
        let vs = p.full_version_space();
        assert_eq!(marginal_gain(&p, &vs, 0, 1).unwrap(), 3);
        assert_eq!(marginal_gain(&p, &vs, 0, 2).unwrap(), 2);
        // S(x2) ⊆ S(x0) ∪ S(x1) collapses onto the query side.
        assert_eq!(
            marginal_gain(&p, &vs, 0, 0).unwrap(),
            vs.members().intersect_count(p.coverage_set(0).unwrap())
        );
    }

    #[test]
    fn greedy_pick_prefers_larger_gain() {
        let p = p0();
        let vs = p.full_version_space();
        let pick = greedy_pick(&p, &vs, 0, &[1, 2], None).unwrap();
        assert_eq!(pick.choice, Some(1));
        assert_eq!(pick.best_constrained_gain, 3);
        assert_eq!(pick.best_unconstrained_gain, 3);
    }

    #[test]
    fn greedy_pick_empty_candidates() {
        let p = p0();
        let vs = p.full_version_space();
        let pick = greedy_pick(&p, &vs, 0, &[], None).unwrap();
        assert_eq!(pick.choice, None);
        assert_eq!(pick.best_constrained_gain, 0);
    }

    #[test]
    fn greedy_pick_cost_weighted() {
        let p = p0();
        let vs = p.full_version_space();
        // Gains 3 vs 2, but costs 10 vs 1 flip the ratio.
        let costs = vec![1.0, 10.0, 1.0];
        let pick = greedy_pick(&p, &vs, 0, &[1, 2], Some(&costs)).unwrap();
        assert_eq!(pick.choice, Some(2));
    }

    #[test]
    fn greedy_pick_rejects_bad_cost() {
        let p = p0();
        let vs = p.full_version_space();
        let costs = vec![1.0, 0.0, 1.0];
        assert!(matches!(
            greedy_pick(&p, &vs, 0, &[1], Some(&costs)),
            Err(Error::NonPositiveCost { index: 1, .. })
        ));
    }

    #[test]
    fn session_with_teacher_on_p0() {
        let p = p0();
        let t = run_session(&p, &LearnerSpec::Gbs, &ConstraintSpec::Unconstrained, None, true)
            .unwrap();
        assert!(t.terminated);
        assert_eq!(t.rounds.len(), 1);
        assert_eq!(t.total_examples, 2);
        assert_eq!(t.rounds[0].query.instance, 0);
        assert_eq!(t.rounds[0].contrastive.unwrap().instance, 1);
        assert_eq!(t.rounds[0].vs_size_after, 1);
    }

    #[test]
    fn session_learner_alone_on_p0() {
        let p = p0();
        let t = run_session(&p, &LearnerSpec::Gbs, &ConstraintSpec::Unconstrained, None, false)
            .unwrap();
        assert!(t.terminated);
        assert_eq!(t.query_sequence(), vec![0, 1]);
        assert_eq!(t.total_examples, 2);
    }

    #[test]
    fn truncated_session_is_flagged_not_an_error() {
        let p = p0();
        let t = run_session(&p, &LearnerSpec::Gbs, &ConstraintSpec::Unconstrained, Some(1), false)
            .unwrap();
        assert!(!t.terminated);
        assert_eq!(t.rounds.len(), 1);
    }

    #[test]
    fn vs_size_strictly_decreases_with_positive_gain() {
        let p = p0();
        let t = run_session(&p, &LearnerSpec::Gbs, &ConstraintSpec::Unconstrained, None, true)
            .unwrap();
        let mut prev = p.hypothesis_count();
        for r in &t.rounds {
            assert!(r.vs_size_after <= prev);
            if r.best_constrained_gain > 0 {
                assert!(r.vs_size_after < prev);
            }
            prev = r.vs_size_after;
        }
    }

    #[test]
    fn unconstrained_gains_match_every_round() {
        let p = p0();
        for target in 0..4 {
            let q = p.retarget(target).unwrap();
            let t =
                run_session(&q, &LearnerSpec::Gbs, &ConstraintSpec::Unconstrained, None, true)
                    .unwrap();
            for r in &t.rounds {
                assert_eq!(r.best_constrained_gain, r.best_unconstrained_gain);
            }
        }
    }

    #[test]
    fn cost_of_examples() {
        let p = p0();
        let on = run_session(&p, &LearnerSpec::Gbs, &ConstraintSpec::Unconstrained, None, true)
            .unwrap();
        let off = run_session(&p, &LearnerSpec::Gbs, &ConstraintSpec::Unconstrained, None, false)
            .unwrap();
        assert_eq!(cost_of(&on, None), on.total_examples as f64);
        assert_eq!(cost_of(&off, None), off.rounds.len() as f64);
        // c(x) = x + 1 over the teacher-on run (x0 query + x1 contrastive).
        let costs = vec![1.0, 2.0, 3.0];
        assert_eq!(cost_of(&on, Some(&costs)), 3.0);
    }

    #[test]
    fn sequence_objective_matches_session() {
        let p = p0();
        let t = run_session(&p, &LearnerSpec::Gbs, &ConstraintSpec::Unconstrained, None, true)
            .unwrap();
        let f = sequence_objective(&p, &LearnerSpec::Gbs, &t.teaching_sequence()).unwrap();
        assert_eq!(f, p.hypothesis_count() - 1);
    }
}
