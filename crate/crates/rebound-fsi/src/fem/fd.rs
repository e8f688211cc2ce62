//! Finite-difference validation of assembled Jacobians.
//!
//! Used by tests to certify that every dual-number Jacobian agrees with a
//! central difference of its own residual; disagreement means a form
//! evaluates different expressions in its value and derivative paths.

use super::assemble::{assemble_jacobian, assemble_residual, solver_for, CellForm};

/// Largest entry mismatch between the assembled Jacobian and a central
/// finite-difference Jacobian, relative to the largest Jacobian entry.
///
/// Dense comparison: intended for systems of at most a few thousand
/// unknowns.
pub fn max_jacobian_mismatch<const NL: usize>(
    form: &impl CellForm<NL>,
    x: &[f64],
    constrained: &[bool],
    eps: f64,
) -> f64 {
    let n = x.len();
    let mut lin = solver_for(form, n);
    assemble_jacobian(form, x, constrained, &mut lin);
    let dense = lin.to_dense();

    let scale = dense
        .iter()
        .flatten()
        .fold(0.0f64, |m, v| m.max(v.abs()))
        .max(1e-300);

    let mut xp = x.to_vec();
    let mut rp = vec![0.0; n];
    let mut rm = vec![0.0; n];
    let mut worst = 0.0f64;
    for j in 0..n {
        xp[j] = x[j] + eps;
        assemble_residual(form, &xp, constrained, &mut rp);
        xp[j] = x[j] - eps;
        assemble_residual(form, &xp, constrained, &mut rm);
        xp[j] = x[j];
        for i in 0..n {
            let fd = (rp[i] - rm[i]) / (2.0 * eps);
            // Constrained rows carry no residual, so their Jacobian row must
            // be exactly the identity row.
            let want = if constrained[i] {
                if i == j {
                    1.0
                } else {
                    0.0
                }
            } else {
                fd
            };
            worst = worst.max((dense[i][j] - want).abs() / scale);
        }
    }
    worst
}
