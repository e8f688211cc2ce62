//! Damped Newton iteration on assembled cell forms.

use thiserror::Error;

use super::assemble::{assemble_jacobian, assemble_residual, CellForm};
use super::sparse::{LinearError, LinearSolver};

#[derive(Clone, Copy, Debug)]
pub struct NewtonSettings {
    /// Absolute residual norm target.
    pub atol: f64,
    /// Reduction target relative to the initial residual norm.
    pub rtol: f64,
    pub max_iter: usize,
    /// Step halvings tried before declaring divergence.
    pub max_backtrack: usize,
}

impl Default for NewtonSettings {
    fn default() -> Self {
        Self { atol: 1e-10, rtol: 1e-8, max_iter: 25, max_backtrack: 4 }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct NewtonReport {
    pub iterations: usize,
    pub residual0: f64,
    pub residual: f64,
}

#[derive(Debug, Error)]
pub enum NewtonError {
    #[error(transparent)]
    Linear(#[from] LinearError),
    #[error("Newton diverged: residual {residual:e} after {iterations} iterations")]
    Diverged { iterations: usize, residual: f64 },
}

fn norm(r: &[f64]) -> f64 {
    r.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Solves `form(x) = 0` in place.  `x` must satisfy the constrained values
/// on entry; constrained entries are never modified.
pub fn newton_solve<const NL: usize>(
    form: &impl CellForm<NL>,
    lin: &mut LinearSolver,
    constrained: &[bool],
    x: &mut [f64],
    settings: &NewtonSettings,
) -> Result<NewtonReport, NewtonError> {
    let n = x.len();
    let mut r = vec![0.0; n];
    assemble_residual(form, x, constrained, &mut r);
    let residual0 = norm(&r);
    let mut res = residual0;
    let target = settings.atol + settings.rtol * residual0;

    for iter in 1..=settings.max_iter {
        if res <= target {
            return Ok(NewtonReport { iterations: iter - 1, residual0, residual: res });
        }
        assemble_jacobian(form, x, constrained, lin);
        let mut delta = r.clone();
        for v in &mut delta {
            *v = -*v;
        }
        lin.solve_in_place(&mut delta)?;

        // Monotone backtracking line search.
        let mut alpha = 1.0;
        let mut accepted = false;
        let mut trial = vec![0.0; n];
        for _ in 0..=settings.max_backtrack {
            for k in 0..n {
                trial[k] = x[k] + alpha * delta[k];
            }
            assemble_residual(form, &trial, constrained, &mut r);
            let trial_res = norm(&r);
            if trial_res.is_finite() && trial_res < res {
                x.copy_from_slice(&trial);
                res = trial_res;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if !accepted {
            // Restore the residual at the current iterate before reporting.
            assemble_residual(form, x, constrained, &mut r);
            return Err(NewtonError::Diverged { iterations: iter, residual: res });
        }
    }
    if res <= target {
        return Ok(NewtonReport { iterations: settings.max_iter, residual0, residual: res });
    }
    Err(NewtonError::Diverged { iterations: settings.max_iter, residual: res })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::scalar::Scalar;

    // Coupled quadratic system on a chain: r_i = x_i^2 - a_i + c (x_i - x_{i+1})
    // assembled from two-dof "cells", with x_0 constrained.
    struct Chain {
        targets: Vec<f64>,
    }

    impl CellForm<2> for Chain {
        fn ncells(&self) -> usize {
            self.targets.len() - 1
        }

        fn cell_dofs(&self, cell: usize, dofs: &mut [usize; 2]) -> Option<usize> {
            dofs[0] = cell;
            dofs[1] = cell + 1;
            Some(2)
        }

        fn cell_residual<T: Scalar>(&self, cell: usize, x: &[T; 2], out: &mut [T; 2]) {
            // Interior dofs are shared by two cells, so each cell carries
            // half of their quadratic term; the coupling term is per cell.
            let weight = |d: usize| {
                if d == 0 || d == self.targets.len() - 1 {
                    1.0
                } else {
                    0.5
                }
            };
            let quad = |k: usize| {
                (x[k] * x[k] - T::from_f64(self.targets[cell + k])).mul_f64(weight(cell + k))
            };
            out[0] = quad(0) + (x[0] - x[1]).mul_f64(0.3);
            out[1] = quad(1) + (x[1] - x[0]).mul_f64(0.3);
        }
    }

    #[test]
    fn converges_quadratically_on_smooth_system() {
        let form = Chain { targets: vec![4.0, 9.0, 16.0, 25.0] };
        let mut lin = crate::fem::assemble::solver_for(&form, 4);
        let constrained = vec![true, false, false, false];
        let mut x = vec![2.0, 1.0, 1.0, 1.0];
        let report =
            newton_solve(&form, &mut lin, &constrained, &mut x, &NewtonSettings::default())
                .unwrap();
        assert_eq!(x[0], 2.0);
        assert!(report.residual <= 1e-10 + 1e-8 * report.residual0);
        // Quadratic convergence reaches 1e-10 from O(1) in a handful of steps.
        assert!(report.iterations <= 8, "took {} iterations", report.iterations);
        // Residual truly vanishes at the solution.
        let mut r = vec![0.0; 4];
        assemble_residual(&form, &x, &constrained, &mut r);
        assert!(norm(&r) < 1e-9);
    }

    #[test]
    fn already_converged_returns_zero_iterations() {
        let form = Chain { targets: vec![1.0, 1.0] };
        let mut lin = crate::fem::assemble::solver_for(&form, 2);
        let constrained = vec![false, false];
        let mut x = vec![1.0, 1.0];
        let report =
            newton_solve(&form, &mut lin, &constrained, &mut x, &NewtonSettings::default())
                .unwrap();
        assert_eq!(report.iterations, 0);
    }

    #[test]
    fn reports_divergence_on_insoluble_system() {
        // x^2 + 1 = 0 has no real root.
        struct NoRoot;
        impl CellForm<1> for NoRoot {
            fn ncells(&self) -> usize {
                1
            }
            fn cell_dofs(&self, _cell: usize, dofs: &mut [usize; 1]) -> Option<usize> {
                dofs[0] = 0;
                Some(1)
            }
            fn cell_residual<T: Scalar>(&self, _cell: usize, x: &[T; 1], out: &mut [T; 1]) {
                out[0] = x[0] * x[0] + T::from_f64(1.0);
            }
        }
        let mut lin = crate::fem::assemble::solver_for(&NoRoot, 1);
        let mut x = vec![0.7];
        let err = newton_solve(&NoRoot, &mut lin, &[false], &mut x, &NewtonSettings::default());
        assert!(matches!(err, Err(NewtonError::Diverged { .. })));
    }
}
