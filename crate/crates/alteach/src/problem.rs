//! Teaching problems, coverage sets, and version-space dynamics.
//!
//! A problem is a finite instance set, a finite class of binary hypotheses
//! given as a dense ±1 label matrix, and a designated target hypothesis.
//! The coverage set `S(x)` of an instance is the set of hypotheses that
//! disagree with the target on `x`; labeling `x` eliminates exactly `S(x)`
//! from the version space. Coverage sets are precomputed as bitsets at
//! construction since every downstream operation is set algebra on them.

use serde::{Deserialize, Serialize};

use crate::bitset::IndexSet;
use crate::error::{Error, Result};

/// A labeled instance as exchanged in the protocol.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Example {
    pub instance: usize,
    /// +1 or -1; always the target's label when emitted by a truthful teacher.
    pub label: i8,
}

/// An immutable teaching problem. Shareable across parallel workers.
#[derive(Clone, Debug)]
pub struct TeachingProblem {
    /// Row-major ±1 labels, one row per hypothesis.
    labels: Vec<i8>,
    instance_count: usize,
    hypothesis_count: usize,
    target: usize,
    features: Option<Vec<Vec<f64>>>,
    names: Option<Vec<String>>,
    /// Precomputed `S(x)` per instance.
    coverage: Vec<IndexSet>,
}

impl TeachingProblem {
    /// Builds a problem from a label matrix.
    ///
    /// Validates shape, ±1 entries, index ranges, and feature dimensions.
    /// Duplicate hypothesis rows are *not* rejected here; callers that load
    /// untrusted input run [`TeachingProblem::preflight_teachable`].
    pub fn new(
        labels: Vec<Vec<i8>>,
        target: usize,
        features: Option<Vec<Vec<f64>>>,
        names: Option<Vec<String>>,
    ) -> Result<Self> {
        let hypothesis_count = labels.len();
        if hypothesis_count == 0 {
            return Err(Error::InvalidProblem("label matrix has no rows".into()));
        }
        let instance_count = labels[0].len();
        if instance_count == 0 {
            return Err(Error::InvalidProblem("label matrix has no columns".into()));
        }
        for (h, row) in labels.iter().enumerate() {
            if row.len() != instance_count {
                return Err(Error::InvalidProblem(format!(
                    "labels row {h} has {} entries, expected {instance_count}",
                    row.len()
                )));
            }
            for (x, &v) in row.iter().enumerate() {
                if v != 1 && v != -1 {
                    return Err(Error::InvalidProblem(format!(
                        "labels[{h}][{x}] = {v}; entries must be +1 or -1"
                    )));
                }
            }
        }
        if target >= hypothesis_count {
            return Err(Error::HypothesisOutOfRange {
                index: target,
                count: hypothesis_count,
            });
        }
        if let Some(feats) = &features {
            if feats.len() != instance_count {
                return Err(Error::InvalidProblem(format!(
                    "{} feature vectors for {instance_count} instances",
                    feats.len()
                )));
            }
            let dim = feats[0].len();
            for (x, f) in feats.iter().enumerate() {
                if f.len() != dim {
                    return Err(Error::InvalidProblem(format!(
                        "features[{x}] has dimension {}, expected {dim}",
                        f.len()
                    )));
                }
            }
        }
        if let Some(ns) = &names {
            if ns.len() != instance_count {
                return Err(Error::InvalidProblem(format!(
                    "{} names for {instance_count} instances",
                    ns.len()
                )));
            }
        }

        let flat: Vec<i8> = labels.into_iter().flatten().collect();
        let coverage = compute_coverage(&flat, hypothesis_count, instance_count, target);
        Ok(TeachingProblem {
            labels: flat,
            instance_count,
            hypothesis_count,
            target,
            features,
            names,
            coverage,
        })
    }

    pub fn instance_count(&self) -> usize {
        self.instance_count
    }

    pub fn hypothesis_count(&self) -> usize {
        self.hypothesis_count
    }

    pub fn target(&self) -> usize {
        self.target
    }

    pub fn label(&self, hypothesis: usize, instance: usize) -> i8 {
        self.labels[hypothesis * self.instance_count + instance]
    }

    /// The target's label on `instance` (the truthful teacher's label).
    pub fn target_label(&self, instance: usize) -> i8 {
        self.label(self.target, instance)
    }

    pub fn features(&self) -> Option<&[Vec<f64>]> {
        self.features.as_deref()
    }

    pub fn names(&self) -> Option<&[String]> {
        self.names.as_deref()
    }

    pub fn label_rows(&self) -> Vec<Vec<i8>> {
        (0..self.hypothesis_count)
            .map(|h| self.labels[h * self.instance_count..(h + 1) * self.instance_count].to_vec())
            .collect()
    }

    fn check_instance(&self, index: usize) -> Result<()> {
        if index >= self.instance_count {
            return Err(Error::InstanceOutOfRange {
                index,
                count: self.instance_count,
            });
        }
        Ok(())
    }

    /// `S(x)`: the hypotheses disagreeing with the target on `x`.
    /// Never contains the target.
    pub fn coverage_set(&self, instance: usize) -> Result<&IndexSet> {
        self.check_instance(instance)?;
        Ok(&self.coverage[instance])
    }

    /// Rebuilds the problem with a different target hypothesis.
    pub fn retarget(&self, target: usize) -> Result<TeachingProblem> {
        if target >= self.hypothesis_count {
            return Err(Error::HypothesisOutOfRange {
                index: target,
                count: self.hypothesis_count,
            });
        }
        let coverage = compute_coverage(&self.labels, self.hypothesis_count, self.instance_count, target);
        Ok(TeachingProblem {
            labels: self.labels.clone(),
            instance_count: self.instance_count,
            hypothesis_count: self.hypothesis_count,
            target,
            features: self.features.clone(),
            names: self.names.clone(),
            coverage,
        })
    }

    /// Restricts the class to `members` (which must contain the target),
    /// keeping the instance set. Returns the restricted problem together
    /// with the original index of each kept hypothesis.
    pub fn restrict(&self, members: &IndexSet) -> Result<(TeachingProblem, Vec<usize>)> {
        if !members.contains(self.target) {
            return Err(Error::InvalidInput(
                "restriction must contain the target hypothesis".into(),
            ));
        }
        let kept: Vec<usize> = members.iter().collect();
        let rows: Vec<Vec<i8>> = kept
            .iter()
            .map(|&h| self.labels[h * self.instance_count..(h + 1) * self.instance_count].to_vec())
            .collect();
        let new_target = kept.iter().position(|&h| h == self.target).unwrap();
        let problem = TeachingProblem::new(rows, new_target, self.features.clone(), None)?;
        Ok((problem, kept))
    }

    /// Strict well-formedness check: all label rows pairwise distinct.
    /// A single-hypothesis class passes trivially (nothing to eliminate).
    /// File loading enforces this; the session engine itself only needs
    /// [`TeachingProblem::check_teachable`].
    pub fn preflight_teachable(&self) -> Result<()> {
        let mut seen: std::collections::HashMap<&[i8], usize> = std::collections::HashMap::new();
        for h in 0..self.hypothesis_count {
            let row = &self.labels[h * self.instance_count..(h + 1) * self.instance_count];
            if let Some(&first) = seen.get(row) {
                return Err(Error::DuplicateHypotheses { first, second: h });
            }
            seen.insert(row, h);
        }
        Ok(())
    }

    /// The condition termination actually needs: every non-target row
    /// differs from the target row somewhere, so every wrong hypothesis is
    /// eliminable. Weaker than [`TeachingProblem::preflight_teachable`]:
    /// interchangeable non-target duplicates (as in the adversarial chain
    /// family) are fine.
    pub fn check_teachable(&self) -> Result<()> {
        let target_row =
            &self.labels[self.target * self.instance_count..(self.target + 1) * self.instance_count];
        for h in 0..self.hypothesis_count {
            if h == self.target {
                continue;
            }
            let row = &self.labels[h * self.instance_count..(h + 1) * self.instance_count];
            if row == target_row {
                return Err(Error::DuplicateHypotheses {
                    first: self.target.min(h),
                    second: self.target.max(h),
                });
            }
        }
        Ok(())
    }

    pub fn full_version_space(&self) -> VersionSpace {
        VersionSpace {
            members: IndexSet::full(self.hypothesis_count),
        }
    }
}

fn compute_coverage(
    labels: &[i8],
    hypothesis_count: usize,
    instance_count: usize,
    target: usize,
) -> Vec<IndexSet> {
    (0..instance_count)
        .map(|x| {
            let target_label = labels[target * instance_count + x];
            IndexSet::from_indices(
                hypothesis_count,
                (0..hypothesis_count).filter(|&h| labels[h * instance_count + x] != target_label),
            )
        })
        .collect()
}

/// The subset of hypotheses still consistent with everything observed.
///
/// Cheap to copy; confined to a single run. On a well-formed problem the
/// target stays a member until termination and the set only shrinks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VersionSpace {
    members: IndexSet,
}

impl VersionSpace {
    pub fn full(problem: &TeachingProblem) -> Self {
        problem.full_version_space()
    }

    pub fn from_members(members: IndexSet) -> Self {
        VersionSpace { members }
    }

    pub fn members(&self) -> &IndexSet {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, hypothesis: usize) -> bool {
        self.members.contains(hypothesis)
    }

    /// Removes every member of `covered` in place.
    pub fn eliminate(&mut self, covered: &IndexSet) {
        self.members.subtract(covered);
    }

    /// `true` once only the target remains.
    pub fn is_settled(&self, problem: &TeachingProblem) -> bool {
        self.members.len() == 1 && self.members.contains(problem.target())
    }
}

/// Returns `vs \ S(x)`. Idempotent, and order-independent across a sequence
/// of instances.
pub fn update_version_space(
    vs: &VersionSpace,
    problem: &TeachingProblem,
    instance: usize,
) -> Result<VersionSpace> {
    let coverage = problem.coverage_set(instance)?;
    let mut next = vs.clone();
    next.eliminate(coverage);
    Ok(next)
}

/// The coverage objective `f`: how many hypotheses the given teaching
/// sequence plus its induced queries removed from the full class.
///
/// `f(∅) = 0`; the maximum `|H| - 1` means only the target is left.
pub fn objective_f(
    problem: &TeachingProblem,
    teaching_seq: &[usize],
    induced_queries: &[usize],
) -> Result<usize> {
    let mut vs = problem.full_version_space();
    for &x in teaching_seq.iter().chain(induced_queries) {
        vs.eliminate(problem.coverage_set(x)?);
    }
    Ok(problem.hypothesis_count() - vs.len())
}
