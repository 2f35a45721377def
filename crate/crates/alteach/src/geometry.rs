//! Label-column geometry: pairwise hypothesis distances, the smallest
//! neighborly threshold, and the coherence value.
//!
//! The distance between two instances is the number of hypotheses in the
//! full initial class labeling them differently (a Hamming distance on
//! label columns). The class is k-neighborly once the graph with edges
//! `d <= k` is connected; the smallest such k is the bottleneck weight of
//! a minimum spanning tree. The coherence value is the minimax
//! `c* = min_P max_h |sum_x h(x) P(x)|` over query distributions, solved
//! as a zero-sum matrix game by linear programming.

use crate::error::{Error, Result};
use crate::problem::TeachingProblem;
use crate::simplex;

/// Number of hypotheses labeling `x` and `x2` differently.
pub fn hypothesis_distance(problem: &TeachingProblem, x: usize, x2: usize) -> Result<usize> {
    problem.coverage_set(x)?;
    problem.coverage_set(x2)?;
    Ok((0..problem.hypothesis_count())
        .filter(|&h| problem.label(h, x) != problem.label(h, x2))
        .count())
}

/// Full symmetric distance matrix.
pub fn distance_matrix(problem: &TeachingProblem) -> Vec<Vec<usize>> {
    let n = problem.instance_count();
    let mut d = vec![vec![0usize; n]; n];
    for a in 0..n {
        for b in (a + 1)..n {
            let dist = hypothesis_distance(problem, a, b).unwrap();
            d[a][b] = dist;
            d[b][a] = dist;
        }
    }
    d
}

struct UnionFind {
    parent: Vec<usize>,
    components: usize,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            components: n,
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra] = rb;
        self.components -= 1;
        true
    }
}

/// Smallest `k` whose threshold graph (edges `d <= k`) is connected:
/// Kruskal over edges sorted by distance, stopping when one component
/// remains. Returns 0 for a lone instance; a fully duplicate instance set
/// reports 1, matching the convention that k is at least 1.
pub fn min_neighborly_k(problem: &TeachingProblem) -> Result<usize> {
    let n = problem.instance_count();
    if n < 2 {
        return Ok(0);
    }
    let mut edges: Vec<(usize, usize, usize)> = Vec::with_capacity(n * (n - 1) / 2);
    for a in 0..n {
        for b in (a + 1)..n {
            edges.push((hypothesis_distance(problem, a, b)?, a, b));
        }
    }
    edges.sort_unstable();
    let mut uf = UnionFind::new(n);
    let mut bottleneck = 0;
    for (d, a, b) in edges {
        if uf.union(a, b) {
            bottleneck = bottleneck.max(d);
            if uf.components == 1 {
                break;
            }
        }
    }
    Ok(bottleneck.max(1))
}

/// A coherence solve with its certificates.
#[derive(Clone, Debug)]
pub struct CoherenceSolve {
    /// The minimax value `c*`, within `tolerance` additively.
    pub value: f64,
    /// The optimal query distribution found.
    pub distribution: Vec<f64>,
    /// `max_h |<h, P>|` at the returned distribution (upper certificate).
    pub upper_certificate: f64,
    /// Value of the adversary's mixed strategy (lower certificate).
    pub lower_certificate: f64,
    pub tolerance: f64,
}

/// Solves `c* = min_P max_h |sum_x h(x) P(x)|` to additive `tolerance`.
///
/// The absolute value is expanded into a ±row pair per hypothesis, giving
/// a zero-sum game with payoffs in {-1, +1}; shifting payoffs by +2 makes
/// the game value positive, which admits the standard normalization
/// `max 1·w s.t. (M + 2) w <= 1, w >= 0` with value `1 / (game value)`.
/// Weak duality is checked on every solve: the returned distribution gives
/// an upper certificate, the LP dual an adversary mixture giving a lower
/// certificate, and the two must bracket the value within tolerance.
pub fn coherence(problem: &TeachingProblem, tolerance: f64) -> Result<CoherenceSolve> {
    if !(tolerance > 0.0) {
        return Err(Error::InvalidInput("tolerance must be positive".into()));
    }
    let n = problem.instance_count();
    let h_count = problem.hypothesis_count();

    // Row r = (h, sign); payoff M[r][x] = sign * h(x); these are what the
    // adversary can force against a distribution over instances.
    let mut shifted: Vec<Vec<f64>> = Vec::with_capacity(2 * h_count);
    for h in 0..h_count {
        for sign in [1.0f64, -1.0] {
            shifted.push(
                (0..n)
                    .map(|x| sign * problem.label(h, x) as f64 + 2.0)
                    .collect(),
            );
        }
    }
    let ones_n = vec![1.0; n];
    let ones_m = vec![1.0; 2 * h_count];
    let sol = simplex::maximize(&shifted, &ones_m, &ones_n, 50_000)?;
    if sol.objective <= 0.0 {
        return Err(Error::Undefined("coherence game value not positive".into()));
    }
    let total: f64 = sol.primal.iter().sum();
    let distribution: Vec<f64> = sol.primal.iter().map(|w| w / total).collect();
    let value = (1.0 / sol.objective - 2.0).clamp(0.0, 1.0);

    // Upper certificate: play the returned distribution.
    let upper = (0..h_count)
        .map(|h| {
            (0..n)
                .map(|x| problem.label(h, x) as f64 * distribution[x])
                .sum::<f64>()
                .abs()
        })
        .fold(0.0f64, f64::max);

    // Lower certificate: the dual weights form the adversary's mixture.
    let dual_total: f64 = sol.dual.iter().sum();
    let lower = if dual_total > 0.0 {
        (0..n)
            .map(|x| {
                sol.dual
                    .iter()
                    .enumerate()
                    .map(|(r, y)| {
                        let sign = if r % 2 == 0 { 1.0 } else { -1.0 };
                        y / dual_total * sign * problem.label(r / 2, x) as f64
                    })
                    .sum::<f64>()
            })
            .fold(f64::INFINITY, f64::min)
    } else {
        0.0
    };

    if lower > value + tolerance || value > upper + tolerance {
        return Err(Error::Undefined(format!(
            "coherence duality gap: lower {lower}, value {value}, upper {upper}"
        )));
    }
    Ok(CoherenceSolve {
        value,
        distribution,
        upper_certificate: upper,
        lower_certificate: lower,
        tolerance,
    })
}
