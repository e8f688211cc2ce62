//! Operator-split time stepping for the coupled system.
//!
//! One step runs two implicit fractional solves bridged by a linear
//! extrapolation; the scheme is second order for a non-trivial splitting
//! fraction and keeps every solve backward-Euler shaped, so the two
//! substeps share one assembled sparsity pattern.

use crate::fem::basis::{p2_ref_grads, p2_values};
use crate::fem::{
    newton_solve, solver_for, CellGeom, LinearSolver, NewtonError, NewtonReport, NewtonSettings,
    TRI_QUAD,
};
use crate::material::{MaterialParams, PseudoSolidParams};
use crate::mesh::{AdaptSettings, Subdomain};

use super::forms::{fsi_dirichlet, FsiForm};
use super::remesh::{remesh_if_needed, RemeshError, RemeshOutcome, SizeParams, StrategyKind};
use super::theta::GlowinskiSettings;
use super::{AleSpaces, AleState};

#[derive(Debug, thiserror::Error)]
pub enum StepError {
    #[error(transparent)]
    Newton(#[from] NewtonError),
    #[error(transparent)]
    Remesh(#[from] RemeshError),
    #[error("{which} lost positivity in cell {cell} (det {det:.3e}); step aborted")]
    NonpositiveJacobian { cell: usize, which: &'static str, det: f64 },
}

/// Newton convergence of the two implicit substeps of one time step.
#[derive(Debug, Clone, Copy)]
pub struct StepReport {
    pub first: NewtonReport,
    pub second: NewtonReport,
}

/// Advances the state by one time step of length `glow.dt`.
///
/// `spaces`, `lin`, and `constrained` must match the current mesh (see
/// [`Stepper`] for the cached wrapper).  On error the state is untouched.
pub fn glowinski_step(
    state: &mut AleState,
    spaces: &AleSpaces,
    lin: &mut LinearSolver,
    constrained: &[bool],
    dirichlet: &[(usize, f64)],
    params: &MaterialParams,
    pseudo: &PseudoSolidParams,
    glow: &GlowinskiSettings,
    newton: &NewtonSettings,
) -> Result<StepReport, StepError> {
    let frac = glow.substep_fraction();
    let h = frac * glow.dt;
    let (a, _) = glow.combination();
    let nv = spaces.p2v.ndofs();

    let mut x = vec![0.0; spaces.layout.ndofs()];
    x[..nv].copy_from_slice(&state.v);
    x[nv..2 * nv].copy_from_slice(&state.u_c);
    x[2 * nv..].copy_from_slice(&state.p);
    for &(dof, val) in dirichlet {
        x[dof] = val;
    }

    let form = FsiForm::new(
        &state.mesh,
        spaces,
        params.clone(),
        pseudo.clone(),
        state.f_r.clone(),
        state.v.clone(),
        state.u_c.clone(),
        h,
    );
    let first = newton_solve(&form, lin, constrained, &mut x, newton)?;

    // Extrapolation bridging the middle explicit substep, in incremental
    // form so rest states are exact; pressure is a constraint force and is
    // never combined.
    let mut v_mid = vec![0.0; nv];
    let mut u_mid = vec![0.0; nv];
    for i in 0..nv {
        v_mid[i] = x[i] + (a - 1.0) * (x[i] - state.v[i]);
        u_mid[i] = x[nv + i] + (a - 1.0) * (x[nv + i] - state.u_c[i]);
    }

    let form = FsiForm::new(
        &state.mesh,
        spaces,
        params.clone(),
        pseudo.clone(),
        state.f_r.clone(),
        v_mid,
        u_mid,
        h,
    );
    let second = newton_solve(&form, lin, constrained, &mut x, newton)?;

    check_jacobians(state, spaces, &x[nv..2 * nv])?;

    state.v.copy_from_slice(&x[..nv]);
    state.u_c.copy_from_slice(&x[nv..2 * nv]);
    state.p.copy_from_slice(&x[2 * nv..]);
    state.t += glow.dt;
    Ok(StepReport { first, second })
}

/// Verifies `det(I + grad u_c) > 0` on every cell and `det F_r > 0` on
/// solid cells at all quadrature points of the candidate step.
fn check_jacobians(
    state: &AleState,
    spaces: &AleSpaces,
    u: &[f64],
) -> Result<(), StepError> {
    for (t, tri) in state.mesh.triangles.iter().enumerate() {
        let geom = CellGeom::new(&state.mesh.tri_points(tri));
        let nodes = spaces.p2v.cell_nodes(t).expect("global space");
        for q in TRI_QUAD {
            let grads = p2_ref_grads(&q.bary);
            let mut g = [0.0; 4];
            for (ln, &n) in nodes.iter().enumerate() {
                let gg = geom.grad(grads[ln]);
                for c in 0..2 {
                    g[2 * c] += u[spaces.p2v.dof(n, c)] * gg[0];
                    g[2 * c + 1] += u[spaces.p2v.dof(n, c)] * gg[1];
                }
            }
            let det_c = (1.0 + g[0]) * (1.0 + g[3]) - g[1] * g[2];
            if !(det_c > 0.0) {
                return Err(StepError::NonpositiveJacobian {
                    cell: t,
                    which: "mesh deformation",
                    det: det_c,
                });
            }
            if tri.label == Subdomain::Solid {
                let vals = p2_values(&q.bary);
                let mut f = [0.0; 4];
                for (ln, &n) in nodes.iter().enumerate() {
                    for k in 0..4 {
                        f[k] += state.f_r[spaces.p2t.dof(n, k)] * vals[ln];
                    }
                }
                let det_r = f[0] * f[3] - f[1] * f[2];
                if !(det_r > 0.0) {
                    return Err(StepError::NonpositiveJacobian {
                        cell: t,
                        which: "stored deformation",
                        det: det_r,
                    });
                }
            }
        }
    }
    Ok(())
}

/// Time stepper with per-mesh-generation caches (spaces, sparsity pattern,
/// boundary conditions).
pub struct Stepper {
    pub params: MaterialParams,
    pub pseudo: PseudoSolidParams,
    pub glow: GlowinskiSettings,
    pub newton: NewtonSettings,
    cache: Option<Cache>,
}

struct Cache {
    generation: u32,
    spaces: AleSpaces,
    lin: LinearSolver,
    constrained: Vec<bool>,
    dirichlet: Vec<(usize, f64)>,
}

impl Stepper {
    pub fn new(
        params: MaterialParams,
        pseudo: PseudoSolidParams,
        glow: GlowinskiSettings,
        newton: NewtonSettings,
    ) -> Self {
        params.validate().expect("invalid material parameters");
        glow.validate().expect("invalid time step settings");
        Self { params, pseudo, glow, newton, cache: None }
    }

    fn refresh_cache(&mut self, state: &AleState) {
        let up_to_date =
            self.cache.as_ref().is_some_and(|c| c.generation == state.mesh.generation);
        if up_to_date {
            return;
        }
        let spaces = state.spaces();
        let form = FsiForm::new(
            &state.mesh,
            &spaces,
            self.params.clone(),
            self.pseudo.clone(),
            state.f_r.clone(),
            state.v.clone(),
            state.u_c.clone(),
            self.glow.dt,
        );
        let lin = solver_for(&form, spaces.layout.ndofs());
        let dirichlet = fsi_dirichlet(&state.mesh, &spaces);
        let mut constrained = vec![false; spaces.layout.ndofs()];
        for &(dof, _) in &dirichlet {
            constrained[dof] = true;
        }
        self.cache = Some(Cache {
            generation: state.mesh.generation,
            spaces,
            lin,
            constrained,
            dirichlet,
        });
    }

    /// One full time step on the current mesh.
    pub fn step(&mut self, state: &mut AleState) -> Result<StepReport, StepError> {
        self.refresh_cache(state);
        let cache = self.cache.as_mut().expect("refreshed above");
        glowinski_step(
            state,
            &cache.spaces,
            &mut cache.lin,
            &cache.constrained,
            &cache.dirichlet,
            &self.params,
            &self.pseudo,
            &self.glow,
            &self.newton,
        )
    }
}

/// Re-meshing policy of a run.
#[derive(Clone, Copy, Debug)]
pub struct RemeshPolicy {
    /// Displaced-mesh quality below which the solver rebases.
    pub q0: f64,
    pub strategy: StrategyKind,
    pub size: SizeParams,
    pub adapt: AdaptSettings,
}

/// Runs `n_steps` steps, checking the mesh before each one.  The observer
/// sees the committed state after every step together with the re-mesh
/// outcome and Newton reports of that step.
pub fn advance(
    state: &mut AleState,
    stepper: &mut Stepper,
    policy: &RemeshPolicy,
    n_steps: usize,
    mut observer: impl FnMut(&AleState, &RemeshOutcome, &StepReport),
) -> Result<(), StepError> {
    for _ in 0..n_steps {
        let outcome =
            remesh_if_needed(state, policy.q0, policy.strategy, &policy.size, &policy.adapt)?;
        let report = stepper.step(state)?;
        observer(state, &outcome, &report);
    }
    Ok(())
}

impl RemeshPolicy {
    /// Policy for a mesh: gap-driven sizing with the far field held at the
    /// initial resolution, rebase when displaced quality drops below 0.05.
    pub fn for_mesh(mesh: &crate::mesh::Mesh) -> Self {
        RemeshPolicy {
            q0: 0.05,
            strategy: StrategyKind::Eikonal,
            size: SizeParams::for_mesh(mesh),
            adapt: AdaptSettings::default(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ale::forms::tiny_fsi_mesh;

    fn simple_stepper(dt: f64) -> Stepper {
        Stepper::new(
            MaterialParams::default(),
            PseudoSolidParams::default(),
            GlowinskiSettings { dt, t_end: 0.0, ..GlowinskiSettings::default() },
            NewtonSettings::default(),
        )
    }

    #[test]
    fn equilibrium_persists_over_many_steps() {
        let mut state = AleState::at_rest(tiny_fsi_mesh(5));
        let mut stepper = simple_stepper(1e-3);
        let mut policy = RemeshPolicy::for_mesh(&state.mesh);
        policy.strategy = StrategyKind::Quality;

        let mut steps = 0;
        advance(&mut state, &mut stepper, &policy, 100, |s, rm, _| {
            steps += 1;
            assert!(!rm.remeshed, "equilibrium must never trigger a re-mesh");
            assert_eq!(s.mesh.generation, 0);
        })
        .unwrap();
        assert_eq!(steps, 100);
        assert!((state.t - 0.1).abs() < 1e-12);

        let vmax = state.v.iter().fold(0.0f64, |m, &x| m.max(x.abs()));
        let umax = state.u_c.iter().fold(0.0f64, |m, &x| m.max(x.abs()));
        let pmax = state.p.iter().fold(0.0f64, |m, &x| m.max(x.abs()));
        assert!(vmax <= 1e-10, "velocity grew to {vmax:e}");
        assert!(umax <= 1e-10, "displacement grew to {umax:e}");
        assert!(pmax <= 1e-10, "pressure grew to {pmax:e}");
    }

    #[test]
    fn impulsive_solid_velocity_relaxes_without_blowup() {
        // Kick the solid downward and let one step couple it to the fluid.
        let mut state = AleState::at_rest(tiny_fsi_mesh(5));
        let spaces = state.spaces();
        let mut solid_nodes = vec![false; spaces.p2v.nnodes()];
        for (t, tri) in state.mesh.triangles.iter().enumerate() {
            if tri.label == Subdomain::Solid {
                for &n in spaces.p2v.cell_nodes(t).unwrap() {
                    solid_nodes[n] = true;
                }
            }
        }
        for (n, &is_solid) in solid_nodes.iter().enumerate() {
            if is_solid {
                state.v[spaces.p2v.dof(n, 1)] = -0.1;
            }
        }

        let mut stepper = simple_stepper(5e-4);
        let report = stepper.step(&mut state).unwrap();
        assert!(report.first.iterations > 0);
        assert!(state.v.iter().all(|v| v.is_finite()));
        assert!(state.u_c.iter().all(|u| u.is_finite()));
        assert!(state.p.iter().all(|p| p.is_finite()));
        assert!((state.t - 5e-4).abs() < 1e-15);
        // The kick must not amplify.
        let vmax = state.v.iter().fold(0.0f64, |m, &x| m.max(x.abs()));
        assert!(vmax < 0.2, "velocity blew up to {vmax}");
        // Mesh displacement follows the motion: solid nodes moved down.
        let moved = solid_nodes
            .iter()
            .enumerate()
            .filter(|&(_, &s)| s)
            .map(|(n, _)| state.u_c[spaces.p2v.dof(n, 1)])
            .fold(0.0f64, f64::min);
        assert!(moved < 0.0, "solid region should have displaced downward");
    }

    #[test]
    fn stepper_cache_survives_generation_change() {
        let mut state = AleState::at_rest(tiny_fsi_mesh(5));
        let mut stepper = simple_stepper(5e-4);
        stepper.step(&mut state).unwrap();
        // Simulate a rebase: bump the generation; the next step must rebuild
        // its cache against the same-size mesh without panicking.
        state.mesh.generation += 1;
        stepper.step(&mut state).unwrap();
        assert!((state.t - 1e-3).abs() < 1e-15);
    }
}
