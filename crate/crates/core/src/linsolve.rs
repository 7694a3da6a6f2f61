//! Sparse direct solves with a post-solve residual check.

use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, Triplet};
use faer::Mat;

use crate::error::SolveError;

/// Relative residual bound `|Ax - b|∞ / (|A|∞ |x|∞ + |b|∞)` accepted after a solve.
pub const RESIDUAL_TOLERANCE: f64 = 1e-10;

/// Square sparse matrix in coordinate form; duplicate entries are summed.
#[derive(Debug, Clone, Default)]
pub struct SparseSystem {
    pub n: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl SparseSystem {
    pub fn new(n: usize) -> Self {
        Self { n, entries: Vec::new() }
    }

    pub fn add(&mut self, row: usize, col: usize, value: f64) {
        debug_assert!(row < self.n && col < self.n);
        if value != 0.0 {
            self.entries.push((row, col, value));
        }
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.entries.iter().copied()
    }

    /// `A x`, summing entries in insertion order.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for &(r, c, v) in &self.entries {
            y[r] += v * x[c];
        }
        y
    }

    fn row_norm(&self) -> f64 {
        let mut rows = vec![0.0f64; self.n];
        for &(r, _, v) in &self.entries {
            rows[r] += v.abs();
        }
        rows.into_iter().fold(0.0, f64::max)
    }

    /// Solves `A x = b` by sparse LU with one step of iterative refinement.
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>, SolveError> {
        assert_eq!(rhs.len(), self.n);
        if self.n == 0 {
            return Ok(Vec::new());
        }
        faer::set_global_parallelism(faer::Par::Seq);
        let triplets: Vec<Triplet<usize, usize, f64>> =
            self.entries.iter().map(|&(r, c, v)| Triplet::new(r, c, v)).collect();
        let a = SparseColMat::<usize, f64>::try_new_from_triplets(self.n, self.n, &triplets)
            .map_err(|e| SolveError::Factorization(format!("{e:?}")))?;
        let lu = a.sp_lu().map_err(|e| SolveError::Factorization(format!("{e:?}")))?;

        let mut x = Mat::<f64>::from_fn(self.n, 1, |i, _| rhs[i]);
        lu.solve_in_place(x.as_mut());
        let mut sol: Vec<f64> = (0..self.n).map(|i| x[(i, 0)]).collect();

        let residual = |sol: &[f64]| -> Vec<f64> {
            let ax = self.apply(sol);
            ax.iter().zip(rhs).map(|(a, b)| b - a).collect()
        };
        let r = residual(&sol);
        let mut d = Mat::<f64>::from_fn(self.n, 1, |i, _| r[i]);
        lu.solve_in_place(d.as_mut());
        for (i, s) in sol.iter_mut().enumerate() {
            *s += d[(i, 0)];
        }

        let r = residual(&sol);
        let inf = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let scale = self.row_norm() * inf(&sol) + inf(rhs);
        let rel = if scale > 0.0 { inf(&r) / scale } else { inf(&r) };
        if !rel.is_finite() || sol.iter().any(|v| !v.is_finite()) {
            return Err(SolveError::Singular("factorization produced non-finite values (singular system)".into()));
        }
        if rel > RESIDUAL_TOLERANCE {
            return Err(SolveError::Residual { residual: rel, tolerance: RESIDUAL_TOLERANCE });
        }
        Ok(sol)
    }
}
