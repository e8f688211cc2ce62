//! Steady Stokes solver on Taylor-Hood elements.
//!
//! Serves two roles: the startup solve that seeds the fluid velocity and
//! pressure around the moving disk, and a patch-test target since the
//! quadratic/linear pair reproduces parabolic channel flow exactly.

use crate::fem::basis::{p1_values, p2_ref_grads};
use crate::fem::{
    newton_solve, solver_for, CellForm, CellGeom, ElementKind, FunctionSpace, NewtonError,
    NewtonSettings, Scalar, SpaceDomain, SystemLayout, M2, TRI_QUAD,
};
use crate::material::MaterialParams;
use crate::mesh::{BoundaryTag, Mesh, Subdomain};

use super::{AleSpaces, AleState};

/// Slots of one cell: 12 velocity plus 3 pressure unknowns.
pub const STOKES_NL: usize = 15;

/// Viscous incompressible flow, `-div(2 mu sym grad v) + grad p = 0`,
/// `div v = 0`, over the cells of one subdomain selection.
pub struct StokesProblem<'a> {
    mesh: &'a Mesh,
    /// Quadratic two-component velocity space over the selected cells.
    pub v_space: FunctionSpace,
    /// Linear pressure space over the selected cells.
    pub p_space: FunctionSpace,
    /// Unknown layout `[v, p]`.
    pub layout: SystemLayout,
    geoms: Vec<Option<CellGeom>>,
    mu: f64,
}

impl<'a> StokesProblem<'a> {
    pub fn new(mesh: &'a Mesh, domain: SpaceDomain, mu: f64) -> Self {
        let v_space = FunctionSpace::new(mesh, ElementKind::P2, 2, domain);
        let p_space = FunctionSpace::new(mesh, ElementKind::P1, 1, domain);
        let layout = SystemLayout::new(&[v_space.ndofs(), p_space.ndofs()]);
        let geoms = mesh
            .triangles
            .iter()
            .enumerate()
            .map(|(c, t)| {
                v_space.cell_nodes(c).map(|_| CellGeom::new(&mesh.tri_points(t)))
            })
            .collect();
        Self { mesh, v_space, p_space, layout, geoms, mu }
    }

    pub fn v_dof(&self, node: usize, comp: usize) -> usize {
        self.layout.offset(0) + self.v_space.dof(node, comp)
    }

    pub fn p_dof(&self, node: usize) -> usize {
        self.layout.offset(1) + self.p_space.dof(node, 0)
    }

    /// Solves with the given Dirichlet dofs pinned to their values.
    pub fn solve(&self, dirichlet: &[(usize, f64)]) -> Result<Vec<f64>, NewtonError> {
        let n = self.layout.ndofs();
        let mut x = vec![0.0; n];
        let mut constrained = vec![false; n];
        for &(dof, val) in dirichlet {
            constrained[dof] = true;
            x[dof] = val;
        }
        let mut lin = solver_for(self, n);
        newton_solve(self, &mut lin, &constrained, &mut x, &NewtonSettings::default())?;
        Ok(x)
    }

    /// Integral of `div v` over one cell of the solution vector.
    pub fn cell_divergence(&self, x: &[f64], cell: usize) -> f64 {
        let Some(geom) = self.geoms[cell] else { return 0.0 };
        let nodes = self.v_space.cell_nodes(cell).unwrap();
        let mut total = 0.0;
        for q in &TRI_QUAD {
            let grads = p2_ref_grads(&q.bary);
            let mut div = 0.0;
            for (ln, &node) in nodes.iter().enumerate() {
                let g = geom.grad(grads[ln]);
                div += x[self.v_dof(node, 0)] * g[0] + x[self.v_dof(node, 1)] * g[1];
            }
            total += geom.area * q.weight * div;
        }
        total
    }
}

impl CellForm<STOKES_NL> for StokesProblem<'_> {
    fn ncells(&self) -> usize {
        self.mesh.triangles.len()
    }

    fn cell_dofs(&self, cell: usize, dofs: &mut [usize; STOKES_NL]) -> Option<usize> {
        let vn = self.v_space.cell_nodes(cell)?;
        let pn = self.p_space.cell_nodes(cell)?;
        for (ln, &node) in vn.iter().enumerate() {
            dofs[2 * ln] = self.v_dof(node, 0);
            dofs[2 * ln + 1] = self.v_dof(node, 1);
        }
        for (k, &node) in pn.iter().enumerate() {
            dofs[12 + k] = self.p_dof(node);
        }
        Some(STOKES_NL)
    }

    fn cell_residual<T: Scalar>(&self, cell: usize, x: &[T; STOKES_NL], out: &mut [T; STOKES_NL]) {
        let geom = self.geoms[cell].expect("residual only on covered cells");
        for q in &TRI_QUAD {
            let w = geom.area * q.weight;
            let ref_grads = p2_ref_grads(&q.bary);
            let grads: [[f64; 2]; 6] = std::array::from_fn(|ln| geom.grad(ref_grads[ln]));

            let mut grad_v = M2::<T>::zero();
            for ln in 0..6 {
                for c in 0..2 {
                    let xv = x[2 * ln + c];
                    grad_v.0[c][0] += xv.mul_f64(grads[ln][0]);
                    grad_v.0[c][1] += xv.mul_f64(grads[ln][1]);
                }
            }
            let pb = p1_values(&q.bary);
            let mut p = T::zero();
            for k in 0..3 {
                p += x[12 + k].mul_f64(pb[k]);
            }

            let stress = grad_v.sym().mul_f64(2.0 * self.mu);
            let div_v = grad_v.trace();
            for ln in 0..6 {
                for c in 0..2 {
                    let visc = stress.0[c][0].mul_f64(grads[ln][0])
                        + stress.0[c][1].mul_f64(grads[ln][1]);
                    let pres = p.mul_f64(grads[ln][c]);
                    out[2 * ln + c] += (visc - pres).mul_f64(w);
                }
            }
            for k in 0..3 {
                out[12 + k] += div_v.mul_f64(w * pb[k]);
            }
        }
    }
}

/// Builds the state at time zero: the solid moves rigidly at `v_solid`
/// while the fluid velocity and pressure solve a Stokes problem driven by
/// the interface, with a no-slip floor and open remaining walls.
pub fn initial_conditions(
    mesh: Mesh,
    params: &MaterialParams,
    v_solid: [f64; 2],
) -> Result<AleState, NewtonError> {
    let stokes = StokesProblem::new(&mesh, SpaceDomain::Only(Subdomain::Fluid), params.mu);
    let mut dirichlet = Vec::new();
    for node in stokes.v_space.interface_nodes(&mesh) {
        dirichlet.push((stokes.v_dof(node, 0), v_solid[0]));
        dirichlet.push((stokes.v_dof(node, 1), v_solid[1]));
    }
    for node in stokes.v_space.boundary_nodes(&mesh, Some(BoundaryTag::Bottom)) {
        dirichlet.push((stokes.v_dof(node, 0), 0.0));
        dirichlet.push((stokes.v_dof(node, 1), 0.0));
    }
    let sol = stokes.solve(&dirichlet)?;

    let spaces = AleSpaces::new(&mesh);
    let mut v = vec![0.0; spaces.p2v.ndofs()];
    spaces.p2v.fill_nodal(&mut v, |_, out| out.copy_from_slice(&v_solid));
    for cell in 0..mesh.triangles.len() {
        let Some(fluid_nodes) = stokes.v_space.cell_nodes(cell) else { continue };
        let global_nodes = spaces.p2v.cell_nodes(cell).unwrap();
        for (&nf, &ng) in fluid_nodes.iter().zip(global_nodes) {
            for c in 0..2 {
                v[spaces.p2v.dof(ng, c)] = sol[stokes.v_dof(nf, c)];
            }
        }
    }
    // Identical restricted construction, so the pressure numbering matches.
    assert_eq!(stokes.p_space.ndofs(), spaces.p1p.ndofs());
    let p = sol[stokes.layout.offset(1)..].to_vec();

    let mut state = AleState::at_rest(mesh);
    state.v = v;
    state.p = p;
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::box_mesh;

    /// Plane channel flow: v = (y (H - y), 0), p = -2 mu x + c is an exact
    /// Taylor-Hood solution, so the discrete one matches to solver accuracy.
    #[test]
    fn poiseuille_patch_test() {
        let (w, h, mu) = (1.0, 0.8, 0.7);
        let mesh = box_mesh(6, 5, w, h);
        let stokes = StokesProblem::new(&mesh, SpaceDomain::All, mu);
        let v_exact = |p: [f64; 2]| [p[1] * (h - p[1]), 0.0];
        let p_exact = |p: [f64; 2]| -2.0 * mu * p[0] + 1.0;

        let mut dirichlet = Vec::new();
        for node in stokes.v_space.boundary_nodes(&mesh, None) {
            let ve = v_exact(stokes.v_space.node_pos(node));
            dirichlet.push((stokes.v_dof(node, 0), ve[0]));
            dirichlet.push((stokes.v_dof(node, 1), ve[1]));
        }
        // Enclosed flow leaves the pressure mean free: pin one node.
        dirichlet.push((stokes.p_dof(0), p_exact(stokes.p_space.node_pos(0))));

        let x = stokes.solve(&dirichlet).unwrap();
        for node in 0..stokes.v_space.nnodes() {
            let ve = v_exact(stokes.v_space.node_pos(node));
            assert!((x[stokes.v_dof(node, 0)] - ve[0]).abs() < 1e-10);
            assert!((x[stokes.v_dof(node, 1)] - ve[1]).abs() < 1e-10);
        }
        for node in 0..stokes.p_space.nnodes() {
            let pe = p_exact(stokes.p_space.node_pos(node));
            assert!((x[stokes.p_dof(node)] - pe).abs() < 1e-9);
        }
    }

    #[test]
    fn stokes_jacobian_matches_finite_differences() {
        use crate::fem::max_jacobian_mismatch;
        let mesh = box_mesh(2, 2, 1.0, 1.0);
        let stokes = StokesProblem::new(&mesh, SpaceDomain::All, 0.3);
        let n = stokes.layout.ndofs();
        let mut constrained = vec![false; n];
        constrained[0] = true;
        let x: Vec<f64> =
            (0..n).map(|i| 0.1 + 0.03 * ((i * 7919 % 101) as f64) / 101.0).collect();
        let err = max_jacobian_mismatch(&stokes, &x, &constrained, 1e-7);
        assert!(err < 1e-6, "stokes jacobian mismatch {err}");
    }

    mod initial_state {
        use super::*;
        use crate::mesh::generate_initial_mesh;

        #[test]
        fn startup_solve_satisfies_boundary_data_and_incompressibility() {
            let mesh = generate_initial_mesh(0, 48).unwrap();
            let params = MaterialParams::default();
            let state = initial_conditions(mesh, &params, [0.0, -0.5]).unwrap();
            let spaces = state.spaces();

            for node in spaces.p2v.interface_nodes(&state.mesh) {
                assert_eq!(state.v[spaces.p2v.dof(node, 0)], 0.0);
                assert_eq!(state.v[spaces.p2v.dof(node, 1)], -0.5);
            }
            for node in spaces.p2v.boundary_nodes(&state.mesh, Some(BoundaryTag::Bottom)) {
                assert_eq!(state.v[spaces.p2v.dof(node, 0)], 0.0);
                assert_eq!(state.v[spaces.p2v.dof(node, 1)], 0.0);
            }
            // Solid cells move rigidly.
            for cell in 0..state.mesh.triangles.len() {
                if state.mesh.triangles[cell].label != Subdomain::Solid {
                    continue;
                }
                for &node in spaces.p2v.cell_nodes(cell).unwrap() {
                    assert_eq!(state.v[spaces.p2v.dof(node, 1)], -0.5);
                }
            }

            // Incompressibility holds weakly (against linear test functions),
            // so per-cell mean divergence sits at the discretization level:
            // small against the velocity-gradient scale, not at solver
            // tolerance.
            let stokes =
                StokesProblem::new(&state.mesh, SpaceDomain::Only(Subdomain::Fluid), params.mu);
            let mut x = vec![0.0; stokes.layout.ndofs()];
            for cell in 0..state.mesh.triangles.len() {
                let Some(fn_) = stokes.v_space.cell_nodes(cell) else { continue };
                let gn = spaces.p2v.cell_nodes(cell).unwrap();
                for (&nf, &ng) in fn_.iter().zip(gn) {
                    for c in 0..2 {
                        x[stokes.v_dof(nf, c)] = state.v[spaces.p2v.dof(ng, c)];
                    }
                }
            }
            let mut max_mean_div = 0.0f64;
            let mut max_grad = 0.0f64;
            for cell in 0..state.mesh.triangles.len() {
                let Some(nodes) = stokes.v_space.cell_nodes(cell) else { continue };
                let tri = &state.mesh.triangles[cell];
                let area = state.mesh.tri_area(tri);
                max_mean_div = max_mean_div.max(stokes.cell_divergence(&x, cell).abs() / area);
                let geom = CellGeom::new(&state.mesh.tri_points(tri));
                for q in &TRI_QUAD {
                    let ref_grads = p2_ref_grads(&q.bary);
                    let mut g = [0.0f64; 4];
                    for (ln, &n) in nodes.iter().enumerate() {
                        let gg = geom.grad(ref_grads[ln]);
                        for c in 0..2 {
                            g[2 * c] += x[stokes.v_dof(n, c)] * gg[0];
                            g[2 * c + 1] += x[stokes.v_dof(n, c)] * gg[1];
                        }
                    }
                    max_grad = max_grad.max(g.iter().fold(0.0f64, |m, v| m.max(v.abs())));
                }
            }
            assert!(
                max_mean_div < 0.05 * max_grad,
                "divergence {max_mean_div:e} too large against gradient scale {max_grad:e}"
            );

            assert_eq!(state.t, 0.0);
            assert!(state.f_r.chunks(4).all(|f| f == [1.0, 0.0, 0.0, 1.0]));
        }
    }
}
