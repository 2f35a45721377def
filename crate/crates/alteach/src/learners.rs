//! Active-learner query strategies: GBS, beta-greedy, and uniform random.
//!
//! A learner's state is just its seed plus the set of instances it has
//! queried so far, so query selection is a pure function of
//! `(spec, version space, queried set)`. The per-round draw for randomized
//! learners is derived statelessly from `(seed, round index)`, which keeps
//! replays and game-tree memoization consistent.

use serde::{Deserialize, Serialize};

use crate::bitset::IndexSet;
use crate::error::{Error, Result};
use crate::problem::{TeachingProblem, VersionSpace};
use crate::rng;

/// Which query strategy the learner runs.
///
/// Beta-greedy with `beta = 1` recovers GBS up to the tie rule: GBS breaks
/// utility ties by lowest instance index, beta-greedy samples uniformly
/// from the satisfying set.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LearnerSpec {
    Gbs,
    BetaGreedy { beta: f64, seed: u64 },
    Random { seed: u64 },
}

impl LearnerSpec {
    pub fn validate(&self) -> Result<()> {
        if let LearnerSpec::BetaGreedy { beta, .. } = self {
            if !(*beta >= 1.0) {
                return Err(Error::InvalidInput(format!(
                    "beta must be >= 1, got {beta}"
                )));
            }
        }
        Ok(())
    }

    /// Reseeds the randomized variants; used to derive independent streams
    /// for parallel runs. GBS is untouched.
    pub fn with_seed(self, seed: u64) -> Self {
        match self {
            LearnerSpec::Gbs => LearnerSpec::Gbs,
            LearnerSpec::BetaGreedy { beta, .. } => LearnerSpec::BetaGreedy { beta, seed },
            LearnerSpec::Random { .. } => LearnerSpec::Random { seed },
        }
    }
}

/// How many current members predict -1 and +1 on `x`.
fn split_counts(problem: &TeachingProblem, vs: &VersionSpace, x: usize) -> Result<(usize, usize)> {
    let covered = vs.members().intersect_count(problem.coverage_set(x)?);
    let agreeing = vs.len() - covered;
    Ok(if problem.target_label(x) == 1 {
        (covered, agreeing)
    } else {
        (agreeing, covered)
    })
}

/// GBS utility `u(x | vs) = (2 / |vs|) * n_-(x) * n_+(x)`.
///
/// Zero iff every member agrees on `x`; maximal for an even split.
pub fn gbs_utility(problem: &TeachingProblem, vs: &VersionSpace, x: usize) -> Result<f64> {
    if vs.is_empty() {
        return Err(Error::EmptyVersionSpace);
    }
    let (neg, pos) = split_counts(problem, vs, x)?;
    Ok(2.0 * neg as f64 * pos as f64 / vs.len() as f64)
}

/// Picks the learner's next query among instances it has not queried yet.
///
/// - GBS: argmax of the utility, lowest index on ties (also when every
///   remaining utility is zero).
/// - Beta-greedy: a uniform seeded draw from
///   `{ x unqueried : u(x) >= max u / beta }`.
/// - Random: a uniform seeded draw from all unqueried instances.
pub fn select_query(
    spec: &LearnerSpec,
    problem: &TeachingProblem,
    vs: &VersionSpace,
    already_queried: &IndexSet,
) -> Result<usize> {
    spec.validate()?;
    if vs.is_empty() {
        return Err(Error::EmptyVersionSpace);
    }
    let unqueried: Vec<usize> =
        (0..problem.instance_count()).filter(|&x| !already_queried.contains(x)).collect();
    if unqueried.is_empty() {
        return Err(Error::NoUnqueriedInstance);
    }
    // Rank by the integer product n_- * n_+ (equivalent to the utility at
    // fixed |vs|) so ties are exact rather than float-sensitive.
    let round = already_queried.len();
    match spec {
        LearnerSpec::Gbs => {
            let mut best = unqueried[0];
            let mut best_score = 0u64;
            for &x in &unqueried {
                let (neg, pos) = split_counts(problem, vs, x)?;
                let score = neg as u64 * pos as u64;
                if score > best_score {
                    best = x;
                    best_score = score;
                }
            }
            Ok(best)
        }
        LearnerSpec::BetaGreedy { beta, seed } => {
            let scores: Vec<u64> = unqueried
                .iter()
                .map(|&x| split_counts(problem, vs, x).map(|(n, p)| n as u64 * p as u64))
                .collect::<Result<_>>()?;
            let max = scores.iter().copied().max().unwrap();
            let threshold = max as f64 / beta;
            let satisfying: Vec<usize> = unqueried
                .iter()
                .zip(&scores)
                .filter(|(_, &s)| s as f64 >= threshold)
                .map(|(&x, _)| x)
                .collect();
            let draw = rng::mix(seed ^ rng::mix(round as u64));
            Ok(satisfying[(draw % satisfying.len() as u64) as usize])
        }
        LearnerSpec::Random { seed } => {
            let draw = rng::mix(seed ^ rng::mix(round as u64));
            Ok(unqueried[(draw % unqueried.len() as u64) as usize])
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::fixtures::p0;
    use crate::problem::update_version_space;

    #[test]
    fn utility_formula_cases() {
        let p = p0();
        let vs = p.full_version_space();
        // x0 and x1 split 2/2, x2 splits 3/1.
        assert_eq!(gbs_utility(&p, &vs, 0).unwrap(), 2.0);
        assert_eq!(gbs_utility(&p, &vs, 1).unwrap(), 2.0);
        assert_eq!(gbs_utility(&p, &vs, 2).unwrap(), 1.5);

        // All members agree once the coverage of x2 is gone.
        let vs = update_version_space(&vs, &p, 2).unwrap();
        assert_eq!(gbs_utility(&p, &vs, 2).unwrap(), 0.0);
    }

    #[test]
    fn utility_rejects_empty_version_space() {
        let p = p0();
        let vs = crate::problem::VersionSpace::from_members(IndexSet::empty(4));
        assert!(matches!(gbs_utility(&p, &vs, 0), Err(Error::EmptyVersionSpace)));
    }

    #[test]
    fn utility_invariant_under_column_relabel() {
        // Flipping +1 <-> -1 on an entire instance column swaps n_- and n_+.
        let p = p0();
        let mut rows = p.label_rows();
        for row in &mut rows {
            row[1] = -row[1];
        }
        let flipped = TeachingProblem::new(rows, 0, None, None).unwrap();
        let vs = p.full_version_space();
        for x in 0..3 {
            assert_eq!(
                gbs_utility(&p, &vs, x).unwrap(),
                gbs_utility(&flipped, &vs, x).unwrap()
            );
        }
    }

    #[test]
    fn gbs_takes_lowest_index_on_tie() {
        let p = p0();
        let vs = p.full_version_space();
        let q = select_query(&LearnerSpec::Gbs, &p, &vs, &IndexSet::empty(3)).unwrap();
        assert_eq!(q, 0); // u: 2.0, 2.0, 1.5
    }

    #[test]
    fn gbs_always_maximizes_utility() {
        let p = p0();
        let mut vs = p.full_version_space();
        let mut queried = IndexSet::empty(3);
        while queried.len() < 3 {
            let q = select_query(&LearnerSpec::Gbs, &p, &vs, &queried).unwrap();
            let u = gbs_utility(&p, &vs, q).unwrap();
            for x in 0..3 {
                if !queried.contains(x) {
                    assert!(u >= gbs_utility(&p, &vs, x).unwrap());
                }
            }
            queried.insert(q);
            vs = update_version_space(&vs, &p, q).unwrap();
        }
    }

    #[test]
    fn beta_one_unique_maximizer_ignores_seed() {
        let p = p0();
        // After x0 is resolved, x1 is the unique maximizer.
        let vs = update_version_space(&p.full_version_space(), &p, 0).unwrap();
        let queried = IndexSet::from_indices(3, [0]);
        for seed in 0..32 {
            let spec = LearnerSpec::BetaGreedy { beta: 1.0, seed };
            assert_eq!(select_query(&spec, &p, &vs, &queried).unwrap(), 1);
        }
    }

    #[test]
    fn huge_beta_admits_every_unqueried_instance() {
        let p = p0();
        let vs = p.full_version_space();
        let mut seen = std::collections::HashSet::new();
        for seed in 0..64 {
            let spec = LearnerSpec::BetaGreedy { beta: 1e12, seed };
            seen.insert(select_query(&spec, &p, &vs, &IndexSet::empty(3)).unwrap());
        }
        assert_eq!(seen.len(), 3, "every instance should be reachable: {seen:?}");
    }

    #[test]
    fn beta_threshold_holds_on_every_round() {
        let p = p0();
        for seed in 0..16 {
            let spec = LearnerSpec::BetaGreedy { beta: 2.0, seed };
            let mut vs = p.full_version_space();
            let mut queried = IndexSet::empty(3);
            while queried.len() < 3 {
                let q = select_query(&spec, &p, &vs, &queried).unwrap();
                let u = gbs_utility(&p, &vs, q).unwrap();
                let max = (0..3)
                    .filter(|&x| !queried.contains(x))
                    .map(|x| gbs_utility(&p, &vs, x).unwrap())
                    .fold(0.0_f64, f64::max);
                assert!(u >= max / 2.0 - 1e-12);
                queried.insert(q);
                vs = update_version_space(&vs, &p, q).unwrap();
            }
        }
    }

    #[test]
    fn identical_seed_and_history_identical_choice() {
        let p = p0();
        let vs = p.full_version_space();
        let queried = IndexSet::from_indices(3, [2]);
        for spec in [
            LearnerSpec::BetaGreedy { beta: 3.0, seed: 99 },
            LearnerSpec::Random { seed: 99 },
        ] {
            let a = select_query(&spec, &p, &vs, &queried).unwrap();
            let b = select_query(&spec, &p, &vs, &queried).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn gbs_all_zero_utilities_returns_lowest_unqueried() {
        // Two members agreeing on every remaining instance: utilities all
        // zero, so GBS falls back to the lowest unqueried index and the
        // round still reaches the teacher.
        let p = TeachingProblem::new(
            vec![vec![1, 1, 1], vec![1, 1, -1], vec![-1, 1, 1]],
            0,
            None,
            None,
        )
        .unwrap();
        let vs = crate::problem::VersionSpace::from_members(IndexSet::from_indices(3, [0, 1]));
        // h0 and h1 agree on x0 and x1; query x2 as already taken.
        let queried = IndexSet::from_indices(3, [2]);
        assert_eq!(gbs_utility(&p, &vs, 0).unwrap(), 0.0);
        assert_eq!(select_query(&LearnerSpec::Gbs, &p, &vs, &queried).unwrap(), 0);
    }

    #[test]
    fn exhausted_pool_errors() {
        let p = p0();
        let vs = p.full_version_space();
        let queried = IndexSet::full(3);
        assert!(matches!(
            select_query(&LearnerSpec::Gbs, &p, &vs, &queried),
            Err(Error::NoUnqueriedInstance)
        ));
    }

    #[test]
    fn invalid_beta_rejected() {
        assert!(LearnerSpec::BetaGreedy { beta: 0.5, seed: 0 }.validate().is_err());
        assert!(LearnerSpec::BetaGreedy { beta: f64::NAN, seed: 0 }.validate().is_err());
    }
}
