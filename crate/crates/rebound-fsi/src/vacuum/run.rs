//! Time stepping of the vacuum rebound.
//!
//! The same two-implicit-substep scheme as the coupled solver, on a mesh
//! that never changes; with no outer boundary conditions the mass terms
//! alone keep the system nonsingular, so there are no constrained rows.
//! Displacement and velocity take part in the explicit combination between
//! the substeps; the two multiplier fields are constraint forces and are
//! carried across as plain initial guesses.

use crate::ale::remesh::mean_edge_length;
use crate::ale::{GlowinskiSettings, StepReport};
use crate::fem::{newton_solve, solver_for, LinearSolver, NewtonError, NewtonSettings};
use crate::mesh::Mesh;

use super::form::{vacuum_jacobian_dets, VacuumForm};
use super::{VacuumSpaces, VacuumState};

/// Physical and regularization parameters of a vacuum run.
#[derive(Clone, Copy, Debug)]
pub struct VacuumParams {
    /// Elastic shear modulus (Pa).
    pub g_shear: f64,
    /// Solid density per reference volume (kg/m^3).
    pub rho_ref: f64,
    /// Augmentation stiffness of the contact multiplier (Pa/m).
    pub rho_aug: f64,
}

impl VacuumParams {
    /// Baseline disk parameters, with the augmentation scaled so one mean
    /// edge length of penetration builds a shear-modulus-sized contact
    /// pressure.
    pub fn for_mesh(mesh: &Mesh) -> Self {
        let g_shear = 5.0e4;
        Self { g_shear, rho_ref: 1000.0, rho_aug: g_shear / mean_edge_length(mesh) }
    }

    pub fn validate(&self) -> Result<(), String> {
        for (name, v) in
            [("G", self.g_shear), ("rho", self.rho_ref), ("rho_aug", self.rho_aug)]
        {
            if !(v > 0.0 && v.is_finite()) {
                return Err(format!("{name} must be positive, got {v}"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum VacuumStepError {
    #[error(transparent)]
    Newton(#[from] NewtonError),
    #[error("deformation lost positivity (det {det:.3e}); step aborted")]
    NonpositiveJacobian { det: f64 },
}

/// Advances the state by one time step of length `glow.dt`.
///
/// `spaces`, `lin` and `constrained` must match the state's mesh (see
/// [`run_vacuum`] for the plain driver).  On error the state is untouched.
pub fn vacuum_step(
    state: &mut VacuumState,
    spaces: &VacuumSpaces,
    lin: &mut LinearSolver,
    constrained: &[bool],
    params: &VacuumParams,
    glow: &GlowinskiSettings,
    newton: &NewtonSettings,
) -> Result<StepReport, VacuumStepError> {
    let h = glow.substep_fraction() * glow.dt;
    let (a, _) = glow.combination();
    let nv = spaces.p2v.ndofs();
    let nq = spaces.p1s.ndofs();

    let mut x = vec![0.0; spaces.layout.ndofs()];
    x[..nv].copy_from_slice(&state.u);
    x[nv..2 * nv].copy_from_slice(&state.v);
    x[2 * nv..2 * nv + nq].copy_from_slice(&state.q);
    x[2 * nv + nq..].copy_from_slice(&state.lambda);

    let form = VacuumForm::new(
        &state.mesh,
        spaces,
        params.g_shear,
        params.rho_ref,
        params.rho_aug,
        state.u.clone(),
        state.v.clone(),
        h,
    );
    let first = newton_solve(&form, lin, constrained, &mut x, newton)?;

    let mut u_mid = vec![0.0; nv];
    let mut v_mid = vec![0.0; nv];
    for i in 0..nv {
        u_mid[i] = x[i] + (a - 1.0) * (x[i] - state.u[i]);
        v_mid[i] = x[nv + i] + (a - 1.0) * (x[nv + i] - state.v[i]);
    }

    let form = VacuumForm::new(
        &state.mesh,
        spaces,
        params.g_shear,
        params.rho_ref,
        params.rho_aug,
        u_mid,
        v_mid,
        h,
    );
    let second = newton_solve(&form, lin, constrained, &mut x, newton)?;

    let det = vacuum_jacobian_dets(&state.mesh, spaces, &x[..nv]);
    if !(det > 0.0) {
        return Err(VacuumStepError::NonpositiveJacobian { det });
    }

    state.u.copy_from_slice(&x[..nv]);
    state.v.copy_from_slice(&x[nv..2 * nv]);
    state.q.copy_from_slice(&x[2 * nv..2 * nv + nq]);
    state.lambda.copy_from_slice(&x[2 * nv + nq..]);
    state.t += glow.dt;
    Ok(StepReport { first, second })
}

/// Runs `n_steps` steps on the state's fixed mesh.  The observer sees the
/// committed state after every step together with that step's Newton
/// reports.
pub fn run_vacuum(
    state: &mut VacuumState,
    params: &VacuumParams,
    glow: &GlowinskiSettings,
    newton: &NewtonSettings,
    n_steps: usize,
    mut observer: impl FnMut(&VacuumState, &StepReport),
) -> Result<(), VacuumStepError> {
    params.validate().expect("invalid vacuum parameters");
    glow.validate().expect("invalid time step settings");
    let spaces = state.spaces();
    let form = VacuumForm::new(
        &state.mesh,
        &spaces,
        params.g_shear,
        params.rho_ref,
        params.rho_aug,
        state.u.clone(),
        state.v.clone(),
        glow.dt,
    );
    let mut lin = solver_for(&form, spaces.layout.ndofs());
    let constrained = vec![false; spaces.layout.ndofs()];
    for _ in 0..n_steps {
        let report = vacuum_step(state, &spaces, &mut lin, &constrained, params, glow, newton)?;
        observer(state, &report);
    }
    Ok(())
}
