//! Shared setup helpers for the benchmark targets.

use alteach::data::{gen_synthetic, random_problem, SyntheticConfig};
use alteach::problem::TeachingProblem;
use alteach::rng::SplitMix64;

/// The experiment-scale synthetic problem (200 instances, 64 hypotheses).
pub fn experiment_problem() -> TeachingProblem {
    gen_synthetic(&SyntheticConfig {
        seed: 17,
        ..Default::default()
    })
    .expect("synthetic generation")
}

/// A batch of enumerable problems for the oracle benchmarks.
pub fn small_problems(count: usize) -> Vec<TeachingProblem> {
    let mut rng = SplitMix64::new(99);
    (0..count).map(|_| random_problem(&mut rng, (4, 8), (6, 12))).collect()
}
