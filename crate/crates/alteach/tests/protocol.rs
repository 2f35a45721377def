//! Cross-module golden tests: full protocol runs with pinned outcomes.

use alteach::data::thm2_family;
use alteach::diagnostics::{alpha_of_run, Alpha};
use alteach::learners::LearnerSpec;
use alteach::oracles;
use alteach::problem::TeachingProblem;
use alteach::teaching::{run_session, ConstraintSpec};

fn p0() -> TeachingProblem {
    TeachingProblem::new(
        vec![
            vec![1, 1, 1],
            vec![-1, 1, 1],
            vec![1, -1, 1],
            vec![-1, -1, -1],
        ],
        0,
        None,
        None,
    )
    .unwrap()
}

#[test]
fn p0_transcript_serializes_with_all_bookkeeping() {
    let t = run_session(&p0(), &LearnerSpec::Gbs, &ConstraintSpec::Unconstrained, None, true)
        .unwrap();
    let json: serde_json::Value = serde_json::to_value(&t).unwrap();
    assert_eq!(
        json,
        serde_json::json!({
            "rounds": [{
                "t": 1,
                "query": {"instance": 0, "label": 1},
                "contrastive": {"instance": 1, "label": 1},
                "vs_size_after": 1,
                "best_unconstrained_gain": 3,
                "best_constrained_gain": 3,
            }],
            "terminated": true,
            "total_examples": 2,
        })
    );
    let back: alteach::Transcript = serde_json::from_value(json).unwrap();
    assert_eq!(back.total_examples, t.total_examples);
}

/// The adversarial chain family drags a GBS learner and greedy teacher
/// through every instance: queries walk the odd chain positions while the
/// teacher picks the even ones, finishing on a lone query of the last
/// instance.
#[test]
fn chain_family_walk_is_pinned() {
    let (problem, constraint) = thm2_family(1).unwrap();
    let t = run_session(&problem, &LearnerSpec::Gbs, &constraint, None, true).unwrap();
    let walk: Vec<(usize, Option<usize>)> = t
        .rounds
        .iter()
        .map(|r| (r.query.instance, r.contrastive.map(|e| e.instance)))
        .collect();
    assert_eq!(
        walk,
        vec![
            (1, Some(0)),
            (2, Some(3)),
            (4, Some(5)),
            (6, Some(7)),
            (8, Some(9)),
            (10, Some(11)),
            (12, Some(13)),
            (14, None),
        ]
    );
    assert_eq!(t.total_examples, 15);
    let sizes: Vec<usize> = t.rounds.iter().map(|r| r.vs_size_after).collect();
    assert_eq!(sizes, vec![95, 67, 46, 29, 16, 7, 2, 1]);

    // The worst-round constraint ratio of this walk, frozen exactly: the
    // second round sees 94 removable hypotheses against a best admissible
    // gain of 28.
    assert_eq!(alpha_of_run(&t), Alpha::Finite(94.0 / 28.0));
}

#[test]
fn chain_family_scales_with_k() {
    let (problem, constraint) = thm2_family(2).unwrap();
    assert_eq!(problem.hypothesis_count(), 324);
    assert_eq!(problem.instance_count(), 21);
    let t = run_session(&problem, &LearnerSpec::Gbs, &constraint, None, true).unwrap();
    assert_eq!(t.total_examples, 21);
    let opt = oracles::opt_teaching_with_mode(
        &problem,
        &LearnerSpec::Gbs,
        &ConstraintSpec::Unconstrained,
        oracles::OracleMode::session(),
        problem.instance_count(),
    )
    .unwrap();
    assert_eq!(opt.value, 2);
}

#[test]
fn remark_fixture_regeneration_is_stable() {
    let report = oracles::pinned_gbs_counterexample().unwrap();
    assert_eq!(report.alone.total_examples, 3);
    assert_eq!(report.with_teacher.total_examples, 4);
    // The learner-alone run must truly be a 3-query run.
    assert_eq!(report.alone.query_sequence().len(), 3);
    // And the teacher run two full rounds.
    assert_eq!(report.with_teacher.rounds.len(), 2);
    assert!(report.with_teacher.rounds.iter().all(|r| r.contrastive.is_some()));
}
