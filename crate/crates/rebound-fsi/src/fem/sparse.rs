//! Sparse matrix storage with a fixed sparsity pattern and direct LU solves.
//!
//! The pattern and the symbolic factorization are built once per mesh and
//! reused across Newton iterations and time steps; only the numeric values
//! change between factorizations.

use faer::prelude::Solve;
use faer::sparse::linalg::solvers::{Lu, SymbolicLu};
use faer::sparse::{SparseColMat, SymbolicSparseColMat};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LinearError {
    #[error("linear system is singular or produced a non-finite solution")]
    Singular,
}

/// Square sparse matrix with a precomputed pattern plus its LU machinery.
pub struct LinearSolver {
    n: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    mat: SparseColMat<usize, f64>,
    symbolic_lu: SymbolicLu<usize>,
}

impl LinearSolver {
    /// Builds the pattern from `(row, col)` coupling pairs.  Duplicates are
    /// merged and every diagonal entry is included unconditionally so that
    /// constrained rows can always be written.
    pub fn new(n: usize, entries: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut pairs: Vec<(usize, usize)> =
            entries.into_iter().map(|(r, c)| (c, r)).collect();
        pairs.extend((0..n).map(|d| (d, d)));
        pairs.sort_unstable();
        pairs.dedup();

        let mut col_ptr = vec![0usize; n + 1];
        for &(c, _) in &pairs {
            col_ptr[c + 1] += 1;
        }
        for c in 0..n {
            col_ptr[c + 1] += col_ptr[c];
        }
        let row_idx: Vec<usize> = pairs.iter().map(|&(_, r)| r).collect();
        let nnz = row_idx.len();

        let sym = SymbolicSparseColMat::new_checked(
            n,
            n,
            col_ptr.clone(),
            None,
            row_idx.clone(),
        );
        let mat = SparseColMat::new(sym, vec![0.0; nnz]);
        let symbolic_lu =
            SymbolicLu::try_new(mat.symbolic()).expect("symbolic factorization");
        Self { n, col_ptr, row_idx, mat, symbolic_lu }
    }

    pub fn ndofs(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.row_idx.len()
    }

    /// Resets all stored values to zero before a fresh assembly.
    pub fn clear(&mut self) {
        self.mat.val_mut().fill(0.0);
    }

    /// Accumulates `v` at `(row, col)`.  The pair must be in the pattern.
    pub fn add(&mut self, row: usize, col: usize, v: f64) {
        let lo = self.col_ptr[col];
        let hi = self.col_ptr[col + 1];
        let k = match self.row_idx[lo..hi].binary_search(&row) {
            Ok(k) => lo + k,
            Err(_) => panic!("entry ({row}, {col}) outside sparsity pattern"),
        };
        self.mat.val_mut()[k] += v;
    }

    /// Replaces row `row` by the identity row.  Existing off-diagonal values
    /// in that row are zeroed; call after assembly for constrained unknowns.
    pub fn set_identity_row(&mut self, row: usize) {
        for c in 0..self.n {
            let lo = self.col_ptr[c];
            let hi = self.col_ptr[c + 1];
            if let Ok(k) = self.row_idx[lo..hi].binary_search(&row) {
                self.mat.val_mut()[lo + k] = if c == row { 1.0 } else { 0.0 };
            }
        }
    }

    /// Factors the current values and overwrites `rhs` with the solution.
    pub fn solve_in_place(&self, rhs: &mut [f64]) -> Result<(), LinearError> {
        assert_eq!(rhs.len(), self.n);
        let lu = Lu::try_new_with_symbolic(self.symbolic_lu.clone(), self.mat.as_ref())
            .map_err(|_| LinearError::Singular)?;
        let mut m = faer::Mat::<f64>::zeros(self.n, 1);
        for (i, &v) in rhs.iter().enumerate() {
            m[(i, 0)] = v;
        }
        lu.solve_in_place(m.as_mut());
        for (i, v) in rhs.iter_mut().enumerate() {
            *v = m[(i, 0)];
            if !v.is_finite() {
                return Err(LinearError::Singular);
            }
        }
        Ok(())
    }

    /// Dense copy of the matrix, for small-system inspection in tests.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut out = vec![vec![0.0; self.n]; self.n];
        let vals = self.mat.val();
        for c in 0..self.n {
            for k in self.col_ptr[c]..self.col_ptr[c + 1] {
                out[self.row_idx[k]][c] = vals[k];
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian_1d(n: usize) -> LinearSolver {
        let mut solver = LinearSolver::new(
            n,
            (1..n).flat_map(|i| [(i - 1, i), (i, i - 1)]),
        );
        for i in 0..n {
            solver.add(i, i, 2.0);
            if i > 0 {
                solver.add(i, i - 1, -1.0);
                solver.add(i - 1, i, -1.0);
            }
        }
        solver
    }

    #[test]
    fn solves_tridiagonal_system() {
        let solver = laplacian_1d(50);
        // Exact solution u_i = i + 1 for rhs = A u.
        let u: Vec<f64> = (0..50).map(|i| (i + 1) as f64).collect();
        let dense = solver.to_dense();
        let mut rhs = vec![0.0; 50];
        for i in 0..50 {
            rhs[i] = dense[i].iter().zip(&u).map(|(a, b)| a * b).sum();
        }
        solver.solve_in_place(&mut rhs).unwrap();
        for i in 0..50 {
            assert!((rhs[i] - u[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn refactorizes_after_value_update() {
        let mut solver = laplacian_1d(10);
        let mut rhs = vec![1.0; 10];
        solver.solve_in_place(&mut rhs).unwrap();
        let first = rhs[4];
        // Double the matrix: solution halves.
        solver.clear();
        for i in 0..10 {
            solver.add(i, i, 4.0);
            if i > 0 {
                solver.add(i, i - 1, -2.0);
                solver.add(i - 1, i, -2.0);
            }
        }
        let mut rhs2 = vec![1.0; 10];
        solver.solve_in_place(&mut rhs2).unwrap();
        assert!((rhs2[4] - 0.5 * first).abs() < 1e-12);
    }

    #[test]
    fn identity_row_pins_unknown() {
        let mut solver = laplacian_1d(5);
        solver.set_identity_row(2);
        let mut rhs = vec![1.0, 1.0, 0.0, 1.0, 1.0];
        solver.solve_in_place(&mut rhs).unwrap();
        assert_eq!(rhs[2], 0.0);
        // Rows 0..2 decouple from 3..5: each block solves a 2x2 system
        // [2 -1; -1 2] x = [1, 1], so x = [1, 1].
        for k in [0, 1, 3, 4] {
            assert!((rhs[k] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    #[should_panic(expected = "outside sparsity pattern")]
    fn rejects_entry_outside_pattern() {
        let mut solver = laplacian_1d(5);
        solver.add(0, 4, 1.0);
    }

    #[test]
    fn detects_non_finite_solutions() {
        // Zero row 2 makes the system inconsistent for rhs with r[2] != 0.
        let mut solver = laplacian_1d(5);
        solver.clear();
        for i in [0usize, 1, 3, 4] {
            solver.add(i, i, 1.0);
        }
        let mut rhs = vec![1.0; 5];
        assert!(matches!(
            solver.solve_in_place(&mut rhs),
            Err(LinearError::Singular)
        ));
    }
}
