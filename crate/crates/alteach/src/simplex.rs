//! Dense primal simplex for `max c·w  s.t.  A w <= b, w >= 0` with Bland's
//! rule. Only used at desk scale (a few hundred rows/columns), so a plain
//! tableau is fine.

use crate::error::{Error, Result};

pub struct SimplexSolution {
    pub objective: f64,
    pub primal: Vec<f64>,
    /// Shadow prices of the constraints (reduced costs of the slacks).
    pub dual: Vec<f64>,
}

const EPS: f64 = 1e-12;

/// Requires `b >= 0` so the all-slack basis is feasible.
pub fn maximize(a: &[Vec<f64>], b: &[f64], c: &[f64], max_iters: usize) -> Result<SimplexSolution> {
    let m = a.len();
    let n = c.len();
    assert_eq!(b.len(), m);
    if b.iter().any(|&v| v < 0.0) {
        return Err(Error::InvalidInput("simplex requires b >= 0".into()));
    }

    // Tableau: m constraint rows + objective row; columns = n vars,
    // m slacks, rhs.
    let cols = n + m + 1;
    let mut t = vec![vec![0.0f64; cols]; m + 1];
    for (i, row) in a.iter().enumerate() {
        assert_eq!(row.len(), n);
        t[i][..n].copy_from_slice(row);
        t[i][n + i] = 1.0;
        t[i][cols - 1] = b[i];
    }
    for j in 0..n {
        t[m][j] = -c[j];
    }
    let mut basis: Vec<usize> = (n..n + m).collect();

    for _ in 0..max_iters {
        // Bland: entering variable = lowest-index column with a negative
        // objective-row coefficient.
        let Some(pivot_col) = (0..n + m).find(|&j| t[m][j] < -EPS) else {
            let mut primal = vec![0.0; n];
            for (i, &bv) in basis.iter().enumerate() {
                if bv < n {
                    primal[bv] = t[i][cols - 1];
                }
            }
            let dual = (0..m).map(|i| t[m][n + i]).collect();
            return Ok(SimplexSolution {
                objective: t[m][cols - 1],
                primal,
                dual,
            });
        };
        // Ratio test; ties broken by the lowest basis variable index
        // (Bland's anti-cycling pairing).
        let mut pivot_row = None;
        let mut best_ratio = f64::INFINITY;
        for i in 0..m {
            if t[i][pivot_col] > EPS {
                let ratio = t[i][cols - 1] / t[i][pivot_col];
                let better = ratio < best_ratio - EPS
                    || (ratio < best_ratio + EPS
                        && pivot_row.is_some_and(|r: usize| basis[i] < basis[r]));
                if better {
                    best_ratio = ratio;
                    pivot_row = Some(i);
                }
            }
        }
        let Some(pr) = pivot_row else {
            return Err(Error::Undefined("simplex: objective unbounded".into()));
        };
        let scale = t[pr][pivot_col];
        for v in t[pr].iter_mut() {
            *v /= scale;
        }
        for i in 0..=m {
            if i != pr {
                let factor = t[i][pivot_col];
                if factor.abs() > EPS {
                    for j in 0..cols {
                        t[i][j] -= factor * t[pr][j];
                    }
                }
            }
        }
        basis[pr] = pivot_col;
    }
    Err(Error::Undefined("simplex: iteration cap reached".into()))
}
