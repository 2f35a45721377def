//! Teaching an active version-space learner with contrastive examples.
//!
//! The interaction is round-based: the learner queries an instance, the
//! teacher labels it and may add one labeled *contrastive* example drawn from
//! a query-dependent constrained set. Every labeled instance removes the
//! hypotheses that disagree with the target on it; teaching ends once the
//! version space collapses to the target hypothesis.
//!
//! The crate provides:
//!
//! - [`problem`]: finite teaching problems, coverage sets, version spaces,
//!   and the coverage objective.
//! - [`learners`]: GBS, beta-greedy, and random query strategies.
//! - [`teaching`]: constraint functions, the greedy teacher, and the
//!   protocol session engine producing [`teaching::Transcript`]s.
//! - [`oracles`]: exact exponential-time reference solvers (teaching
//!   dimension, optimal interactive teaching, counterexample search).
//! - [`diagnostics`]: the problem-dependent parameters (alpha, rho, gamma)
//!   and indicative sample-complexity bound evaluators.
//! - [`geometry`]: neighborly structure and the coherence value.
//! - [`data`]: synthetic problem generation, the adversarial chain family,
//!   and problem (de)serialization.
//! - [`sweep`]: deterministic experiment sweeps with CSV output.

pub mod bitset;
pub mod data;
pub mod diagnostics;
pub mod error;
pub mod geometry;
pub mod learners;
pub mod oracles;
pub mod problem;
pub mod rng;
mod simplex;
pub mod sweep;
pub mod teaching;

pub use bitset::IndexSet;
pub use error::{Error, Result};
pub use learners::LearnerSpec;
pub use problem::{Example, TeachingProblem, VersionSpace};
pub use teaching::{ConstraintSpec, Transcript};
