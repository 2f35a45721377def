//! Property tests for the protocol invariants on randomized small problems.

use proptest::prelude::*;

use alteach::bitset::IndexSet;
use alteach::diagnostics::{alpha_of_run, Alpha};
use alteach::learners::{gbs_utility, select_query, LearnerSpec};
use alteach::oracles;
use alteach::problem::{objective_f, update_version_space, TeachingProblem, VersionSpace};
use alteach::teaching::{greedy_pick, marginal_gain, run_session, ConstraintSpec};

/// A teachable problem with 2..=10 pairwise-distinct hypothesis rows over
/// 1..=6 instances, with a random target.
fn arb_problem() -> impl Strategy<Value = TeachingProblem> {
    (2usize..=10, 1usize..=6)
        .prop_flat_map(|(h, x)| {
            (
                proptest::collection::vec(proptest::collection::vec(prop_oneof![Just(1i8), Just(-1i8)], x), h),
                0..h,
            )
        })
        .prop_filter_map("rows must be distinct", |(rows, target)| {
            let p = TeachingProblem::new(rows, target, None, None).ok()?;
            p.preflight_teachable().ok()?;
            Some(p)
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn coverage_never_contains_target(p in arb_problem()) {
        for x in 0..p.instance_count() {
            prop_assert!(!p.coverage_set(x).unwrap().contains(p.target()));
        }
    }

    #[test]
    fn version_space_update_is_order_independent(
        p in arb_problem(),
        perm_seed in 0u64..1000,
        seq in proptest::collection::vec(0usize..6, 0..8),
    ) {
        let seq: Vec<usize> = seq.into_iter().filter(|&x| x < p.instance_count()).collect();
        let mut shuffled = seq.clone();
        let mut rng = alteach::rng::SplitMix64::new(perm_seed);
        for i in (1..shuffled.len()).rev() {
            shuffled.swap(i, rng.pick(i + 1));
        }
        let fold = |order: &[usize]| {
            let mut vs = p.full_version_space();
            for &x in order {
                vs = update_version_space(&vs, &p, x).unwrap();
            }
            vs
        };
        prop_assert_eq!(fold(&seq), fold(&shuffled));
    }

    #[test]
    fn objective_monotone_and_conserving(
        p in arb_problem(),
        seq in proptest::collection::vec(0usize..6, 0..8),
    ) {
        let seq: Vec<usize> = seq.into_iter().filter(|&x| x < p.instance_count()).collect();
        let mut prev = 0;
        for i in 0..=seq.len() {
            let f = objective_f(&p, &seq[..i], &[]).unwrap();
            prop_assert!(f >= prev, "objective must not decrease");
            prop_assert!(f <= p.hypothesis_count() - 1);
            prev = f;
        }
        // f(seq) + |version space after seq| = |H|
        let mut vs = p.full_version_space();
        for &x in &seq {
            vs = update_version_space(&vs, &p, x).unwrap();
        }
        prop_assert_eq!(prev + vs.len(), p.hypothesis_count());
    }

    #[test]
    fn gbs_query_maximizes_utility(p in arb_problem()) {
        let mut vs = p.full_version_space();
        let mut queried = IndexSet::empty(p.instance_count());
        while queried.len() < p.instance_count() && vs.len() > 1 {
            let q = select_query(&LearnerSpec::Gbs, &p, &vs, &queried).unwrap();
            let u = gbs_utility(&p, &vs, q).unwrap();
            for x in 0..p.instance_count() {
                if !queried.contains(x) {
                    prop_assert!(u >= gbs_utility(&p, &vs, x).unwrap() - 1e-12);
                }
            }
            queried.insert(q);
            vs = update_version_space(&vs, &p, q).unwrap();
        }
    }

    #[test]
    fn beta_inequality_holds_each_round(p in arb_problem(), beta in 1.0f64..50.0, seed in any::<u64>()) {
        let spec = LearnerSpec::BetaGreedy { beta, seed };
        let mut vs = p.full_version_space();
        let mut queried = IndexSet::empty(p.instance_count());
        while queried.len() < p.instance_count() && vs.len() > 1 {
            let q = select_query(&spec, &p, &vs, &queried).unwrap();
            let max = (0..p.instance_count())
                .filter(|&x| !queried.contains(x))
                .map(|x| gbs_utility(&p, &vs, x).unwrap())
                .fold(0.0f64, f64::max);
            prop_assert!(gbs_utility(&p, &vs, q).unwrap() >= max / beta - 1e-9);
            queried.insert(q);
            vs = update_version_space(&vs, &p, q).unwrap();
        }
    }

    #[test]
    fn utility_invariant_under_column_relabel(p in arb_problem(), col in 0usize..6) {
        let col = col % p.instance_count();
        let mut rows = p.label_rows();
        for row in &mut rows {
            row[col] = -row[col];
        }
        let flipped = TeachingProblem::new(rows, p.target(), None, None).unwrap();
        let vs = p.full_version_space();
        for x in 0..p.instance_count() {
            prop_assert_eq!(
                gbs_utility(&p, &vs, x).unwrap(),
                gbs_utility(&flipped, &vs, x).unwrap()
            );
        }
    }

    #[test]
    fn session_rounds_monotone_and_greedy_dominant(p in arb_problem()) {
        let t = run_session(&p, &LearnerSpec::Gbs, &ConstraintSpec::Unconstrained, None, true)
            .unwrap();
        prop_assert!(t.terminated);
        let mut prev = p.hypothesis_count();
        let mut vs = p.full_version_space();
        for r in &t.rounds {
            prop_assert!(r.vs_size_after >= 1);
            prop_assert!(r.vs_size_after <= prev);
            if r.best_constrained_gain > 0 {
                prop_assert!(r.vs_size_after < prev);
            }
            // Greedy dominance: the chosen candidate's gain matches the
            // recorded best over the admissible set.
            if let Some(c) = r.contrastive {
                let candidates: Vec<usize> =
                    (0..p.instance_count()).filter(|&x| x != r.query.instance).collect();
                let pick = greedy_pick(&p, &vs, r.query.instance, &candidates, None).unwrap();
                let chosen = marginal_gain(&p, &vs, r.query.instance, c.instance).unwrap();
                prop_assert_eq!(chosen, pick.best_constrained_gain);
                prop_assert_eq!(r.best_constrained_gain, r.best_unconstrained_gain);
            }
            vs = update_version_space(&vs, &p, r.query.instance).unwrap();
            if let Some(c) = r.contrastive {
                vs = update_version_space(&vs, &p, c.instance).unwrap();
            }
            prop_assert_eq!(vs.len(), r.vs_size_after);
            prev = r.vs_size_after;
        }
        prop_assert_eq!(alpha_of_run(&t), Alpha::Finite(1.0));
    }

    #[test]
    fn alpha_at_least_one_under_constraints(p in arb_problem(), radius in 1usize..3) {
        let t = run_session(
            &p,
            &LearnerSpec::Gbs,
            &ConstraintSpec::NeighborChain { radius },
            None,
            true,
        )
        .unwrap();
        match alpha_of_run(&t) {
            Alpha::Finite(a) => prop_assert!(a >= 1.0),
            Alpha::Infinite => {}
        }
    }

    #[test]
    fn witness_replay_reproduces_value(p in arb_problem()) {
        let opt =
            oracles::opt_teaching_with_learner(&p, &LearnerSpec::Gbs, &ConstraintSpec::Unconstrained)
                .unwrap();
        let labels = oracles::replay_witness(&p, &LearnerSpec::Gbs, &opt.rounds).unwrap();
        prop_assert_eq!(labels, opt.value);
        prop_assert_eq!(opt.witness.len(), opt.value);
    }

    #[test]
    fn optimum_dominates_greedy_teacher(p in arb_problem()) {
        let opt =
            oracles::opt_teaching_with_learner(&p, &LearnerSpec::Gbs, &ConstraintSpec::Unconstrained)
                .unwrap();
        let greedy = run_session(&p, &LearnerSpec::Gbs, &ConstraintSpec::Unconstrained, None, true)
            .unwrap();
        prop_assert!(greedy.terminated);
        prop_assert!(opt.value <= greedy.total_examples);
    }

    #[test]
    fn learner_alone_settles_and_matches_labels(p in arb_problem(), beta in 1.0f64..20.0, seed in any::<u64>()) {
        let spec = LearnerSpec::BetaGreedy { beta, seed };
        let t = run_session(&p, &spec, &ConstraintSpec::Unconstrained, Some(4 * p.hypothesis_count().max(p.instance_count())), false).unwrap();
        // A learner alone always settles once every instance is queried.
        prop_assert!(t.terminated || t.rounds.len() == p.instance_count());
        prop_assert_eq!(t.total_examples, t.rounds.len());
    }

    #[test]
    fn version_space_is_queries_plus_picks(p in arb_problem(), seed in any::<u64>()) {
        // Cross-check a randomized session against objective_f.
        let spec = LearnerSpec::BetaGreedy { beta: 5.0, seed };
        let t = run_session(&p, &spec, &ConstraintSpec::Unconstrained, None, true).unwrap();
        let teaching = t.teaching_sequence();
        let queries = t.query_sequence();
        let f = objective_f(&p, &teaching, &queries).unwrap();
        let last = t.rounds.last().map_or(p.hypothesis_count(), |r| r.vs_size_after);
        prop_assert_eq!(f, p.hypothesis_count() - last);
    }
}

/// The coherence LP against its own certificates on random instances.
proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn coherence_within_unit_interval(p in arb_problem()) {
        let solve = alteach::geometry::coherence(&p, 1e-6).unwrap();
        prop_assert!((0.0..=1.0).contains(&solve.value));
        prop_assert!(solve.lower_certificate <= solve.value + 1e-6);
        prop_assert!(solve.value <= solve.upper_certificate + 1e-6);
    }
}
