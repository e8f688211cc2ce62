//! Cell-loop assembly of residuals and Jacobians.
//!
//! A form writes its weak residual once, generic over [`Scalar`]; assembly
//! evaluates it with `f64` for residual vectors and with seeded
//! [`Dual`] numbers for exact element Jacobians.  Constrained rows are
//! skipped during scatter and replaced by identity rows, so a Newton update
//! never moves a constrained unknown.

use super::dual::Dual;
use super::scalar::Scalar;
use super::sparse::LinearSolver;

/// One variational form, evaluated cell by cell.  `NL` bounds the number of
/// local unknowns of one cell.
pub trait CellForm<const NL: usize> {
    /// Number of cells the form loops over.
    fn ncells(&self) -> usize;

    /// Writes the global dof of each local slot and returns the slot count,
    /// or `None` when the cell contributes nothing.
    fn cell_dofs(&self, cell: usize, dofs: &mut [usize; NL]) -> Option<usize>;

    /// Local residual of one cell from its local unknowns.
    fn cell_residual<T: Scalar>(&self, cell: usize, x: &[T; NL], out: &mut [T; NL]);
}

/// All `(row, col)` coupling pairs of a form, for pattern construction.
pub fn coupling_pairs<const NL: usize>(form: &impl CellForm<NL>) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut dofs = [0usize; NL];
    for cell in 0..form.ncells() {
        let Some(n) = form.cell_dofs(cell, &mut dofs) else {
            continue;
        };
        for i in 0..n {
            for j in 0..n {
                out.push((dofs[i], dofs[j]));
            }
        }
    }
    out
}

/// Assembles the residual of `form` at `x` into `r`, zeroing constrained
/// entries.
pub fn assemble_residual<const NL: usize>(
    form: &impl CellForm<NL>,
    x: &[f64],
    constrained: &[bool],
    r: &mut [f64],
) {
    r.fill(0.0);
    let mut dofs = [0usize; NL];
    for cell in 0..form.ncells() {
        let Some(n) = form.cell_dofs(cell, &mut dofs) else {
            continue;
        };
        let mut xl = [0.0f64; NL];
        for k in 0..n {
            xl[k] = x[dofs[k]];
        }
        let mut rl = [0.0f64; NL];
        form.cell_residual(cell, &xl, &mut rl);
        for k in 0..n {
            let d = dofs[k];
            if !constrained[d] {
                r[d] += rl[k];
            }
        }
    }
}

/// Assembles the Jacobian of `form` at `x` into `lin`, with identity rows
/// for constrained unknowns.
pub fn assemble_jacobian<const NL: usize>(
    form: &impl CellForm<NL>,
    x: &[f64],
    constrained: &[bool],
    lin: &mut LinearSolver,
) {
    lin.clear();
    let mut dofs = [0usize; NL];
    for cell in 0..form.ncells() {
        let Some(n) = form.cell_dofs(cell, &mut dofs) else {
            continue;
        };
        let mut xl = [Dual::<NL>::constant(0.0); NL];
        for k in 0..n {
            xl[k] = Dual::seed(x[dofs[k]], k);
        }
        let mut rl = [Dual::<NL>::constant(0.0); NL];
        form.cell_residual(cell, &xl, &mut rl);
        for i in 0..n {
            if constrained[dofs[i]] {
                continue;
            }
            for j in 0..n {
                let v = rl[i].d(j);
                if v != 0.0 {
                    lin.add(dofs[i], dofs[j], v);
                }
            }
        }
    }
    for (d, &c) in constrained.iter().enumerate() {
        if c {
            lin.add(d, d, 1.0);
        }
    }
}

/// Builds a solver whose pattern covers `form` plus all diagonal entries.
pub fn solver_for<const NL: usize>(form: &impl CellForm<NL>, ndofs: usize) -> LinearSolver {
    LinearSolver::new(ndofs, coupling_pairs(form))
}
