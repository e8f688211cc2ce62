//! The monolithic weak form of one implicit vacuum substep.
//!
//! Unknowns per cell: quadratic displacement (12) and velocity (12), linear
//! incompressibility multiplier (3) and quadratic contact multiplier (6).
//! Momentum balances inertia against the incompressible neo-Hookean stress
//! plus the vertical contact force; the displacement rows carry the
//! kinematic relation between displacement rate and velocity; the
//! multiplier rows enforce `det F = 1` and floor complementarity.  The
//! contact gap is evaluated at quadrature points over the whole disk, so no
//! boundary bookkeeping is needed: interior points can never reach the
//! floor before the rim does.

use crate::fem::basis::{p1_values, p2_ref_grads, p2_values};
use crate::fem::{CellForm, CellGeom, Scalar, M2, TRI_QUAD};
use crate::material::piola_incompressible;
use crate::mesh::Mesh;

use super::{contact, VacuumSpaces};

/// Local slots: 12 displacement + 12 velocity + 3 incompressibility + 6
/// contact.
pub const VACUUM_NL: usize = 33;
const U0: usize = 0;
const V0: usize = 12;
const Q0: usize = 24;
const L0: usize = 27;

/// Row `c` of a matrix dotted with a constant gradient.
fn rowdot<T: Scalar>(m: &M2<T>, c: usize, g: [f64; 2]) -> T {
    m.0[c][0].mul_f64(g[0]) + m.0[c][1].mul_f64(g[1])
}

/// The vacuum residual of one implicit substep of size `h`, with
/// previous-substep fields frozen inside.
pub struct VacuumForm<'a> {
    mesh: &'a Mesh,
    spaces: &'a VacuumSpaces,
    g_shear: f64,
    rho_ref: f64,
    rho_aug: f64,
    geoms: Vec<CellGeom>,
    u_old: Vec<f64>,
    v_old: Vec<f64>,
    h: f64,
}

impl<'a> VacuumForm<'a> {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        mesh: &'a Mesh,
        spaces: &'a VacuumSpaces,
        g_shear: f64,
        rho_ref: f64,
        rho_aug: f64,
        u_old: Vec<f64>,
        v_old: Vec<f64>,
        h: f64,
    ) -> Self {
        assert!(h > 0.0 && g_shear > 0.0 && rho_ref > 0.0 && rho_aug > 0.0);
        assert_eq!(u_old.len(), spaces.p2v.ndofs());
        assert_eq!(v_old.len(), spaces.p2v.ndofs());
        let geoms =
            mesh.triangles.iter().map(|t| CellGeom::new(&mesh.tri_points(t))).collect();
        Self { mesh, spaces, g_shear, rho_ref, rho_aug, geoms, u_old, v_old, h }
    }

    pub fn u_dof(&self, node: usize, comp: usize) -> usize {
        self.spaces.layout.offset(0) + self.spaces.p2v.dof(node, comp)
    }

    pub fn v_dof(&self, node: usize, comp: usize) -> usize {
        self.spaces.layout.offset(1) + self.spaces.p2v.dof(node, comp)
    }

    pub fn q_dof(&self, node: usize) -> usize {
        self.spaces.layout.offset(2) + self.spaces.p1s.dof(node, 0)
    }

    pub fn lambda_dof(&self, node: usize) -> usize {
        self.spaces.layout.offset(3) + self.spaces.p2s.dof(node, 0)
    }
}

impl CellForm<VACUUM_NL> for VacuumForm<'_> {
    fn ncells(&self) -> usize {
        self.mesh.triangles.len()
    }

    fn cell_dofs(&self, cell: usize, dofs: &mut [usize; VACUUM_NL]) -> Option<usize> {
        let nodes = self.spaces.p2v.cell_nodes(cell).expect("global displacement space");
        for (ln, &node) in nodes.iter().enumerate() {
            for c in 0..2 {
                dofs[U0 + 2 * ln + c] = self.u_dof(node, c);
                dofs[V0 + 2 * ln + c] = self.v_dof(node, c);
            }
        }
        let qn = self.spaces.p1s.cell_nodes(cell).expect("global multiplier space");
        for (k, &node) in qn.iter().enumerate() {
            dofs[Q0 + k] = self.q_dof(node);
        }
        let ln_nodes = self.spaces.p2s.cell_nodes(cell).expect("global contact space");
        for (k, &node) in ln_nodes.iter().enumerate() {
            dofs[L0 + k] = self.lambda_dof(node);
        }
        Some(VACUUM_NL)
    }

    fn cell_residual<T: Scalar>(&self, cell: usize, x: &[T; VACUUM_NL], out: &mut [T; VACUUM_NL]) {
        let geom = self.geoms[cell];
        let pts = self.mesh.tri_points(&self.mesh.triangles[cell]);
        let nodes = self.spaces.p2v.cell_nodes(cell).unwrap();

        let mut uo = [0.0; 12];
        let mut vo = [0.0; 12];
        for (ln, &node) in nodes.iter().enumerate() {
            for c in 0..2 {
                uo[2 * ln + c] = self.u_old[self.spaces.p2v.dof(node, c)];
                vo[2 * ln + c] = self.v_old[self.spaces.p2v.dof(node, c)];
            }
        }

        let inv_h = 1.0 / self.h;
        for q in &TRI_QUAD {
            let vals = p2_values(&q.bary);
            let ref_grads = p2_ref_grads(&q.bary);
            let grads: [[f64; 2]; 6] = std::array::from_fn(|ln| geom.grad(ref_grads[ln]));
            let w = geom.area * q.weight;

            let mut grad_u = M2::<T>::zero();
            let mut u_y = T::zero();
            let mut kin = [T::zero(), T::zero()];
            let mut dv = [T::zero(), T::zero()];
            for ln in 0..6 {
                for c in 0..2 {
                    let uv = x[U0 + 2 * ln + c];
                    let vv = x[V0 + 2 * ln + c];
                    grad_u.0[c][0] += uv.mul_f64(grads[ln][0]);
                    grad_u.0[c][1] += uv.mul_f64(grads[ln][1]);
                    kin[c] += (uv.mul_f64(inv_h) - vv
                        + T::from_f64(-uo[2 * ln + c] * inv_h))
                    .mul_f64(vals[ln]);
                    dv[c] += (vv + T::from_f64(-vo[2 * ln + c])).mul_f64(inv_h * vals[ln]);
                }
                u_y += x[U0 + 2 * ln + 1].mul_f64(vals[ln]);
            }
            let f = M2::identity() + grad_u;

            let pb = p1_values(&q.bary);
            let mut q_shift = T::zero();
            for k in 0..3 {
                q_shift += x[Q0 + k].mul_f64(pb[k]);
            }
            let piola = piola_incompressible(f, q_shift, self.g_shear);

            let mut lambda = T::zero();
            for k in 0..6 {
                lambda += x[L0 + k].mul_f64(vals[k]);
            }
            let y_ref = CellGeom::point(&pts, &q.bary)[1];
            let gap = u_y + T::from_f64(y_ref);
            let push = contact::force(gap, lambda, self.rho_aug);
            let slack = contact::residual(gap, lambda, self.rho_aug);

            for ln in 0..6 {
                for c in 0..2 {
                    let mut mom = dv[c].mul_f64(self.rho_ref * vals[ln]);
                    mom += rowdot(&piola, c, grads[ln]);
                    if c == 1 {
                        mom += push.mul_f64(vals[ln]);
                    }
                    out[V0 + 2 * ln + c] += mom.mul_f64(w);
                    out[U0 + 2 * ln + c] += kin[c].mul_f64(w * vals[ln]);
                }
                out[L0 + ln] += slack.mul_f64(w * vals[ln]);
            }
            let volume = f.det() + T::from_f64(-1.0);
            for k in 0..3 {
                out[Q0 + k] += volume.mul_f64(w * pb[k]);
            }
        }
    }
}

/// Smallest deformation jacobian `det(I + grad u)` over all cells and
/// quadrature points.
pub fn vacuum_jacobian_dets(mesh: &Mesh, spaces: &VacuumSpaces, u: &[f64]) -> f64 {
    let mut min_det = f64::INFINITY;
    for (ci, tri) in mesh.triangles.iter().enumerate() {
        let geom = CellGeom::new(&mesh.tri_points(tri));
        let nodes = spaces.p2v.cell_nodes(ci).expect("global space");
        for q in &TRI_QUAD {
            let ref_grads = p2_ref_grads(&q.bary);
            let mut f = [[1.0, 0.0], [0.0, 1.0]];
            for (ln, &node) in nodes.iter().enumerate() {
                let g = geom.grad(ref_grads[ln]);
                for c in 0..2 {
                    let uv = u[spaces.p2v.dof(node, c)];
                    f[c][0] += uv * g[0];
                    f[c][1] += uv * g[1];
                }
            }
            min_det = min_det.min(f[0][0] * f[1][1] - f[0][1] * f[1][0]);
        }
    }
    min_det
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::{assemble_residual, max_jacobian_mismatch};
    use crate::mesh::generate::disk_mesh;
    use crate::mesh::generate::GeometrySpec;
    use crate::vacuum::VacuumState;

    fn small_disk() -> crate::mesh::Mesh {
        disk_mesh(&GeometrySpec::default(), 12, 0.12).unwrap()
    }

    #[test]
    fn rest_state_has_exactly_zero_residual() {
        let mesh = small_disk();
        let state = VacuumState::launched(mesh, [0.0, 0.0]);
        let spaces = state.spaces();
        let form = VacuumForm::new(
            &state.mesh,
            &spaces,
            5.0e4,
            1000.0,
            1.0e6,
            state.u.clone(),
            state.v.clone(),
            1e-4,
        );
        let ndofs = spaces.layout.ndofs();
        let x = vec![0.0; ndofs];
        let constrained = vec![false; ndofs];
        let mut r = vec![0.0; ndofs];
        assemble_residual(&form, &x, &constrained, &mut r);
        let max = r.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        assert_eq!(max, 0.0);
    }

    #[test]
    fn rigid_fall_balances_only_kinematics() {
        // Uniform u and matching v: stress and contact stay zero, the
        // velocity rows carry only the (v - v_old)/h inertia which is zero
        // for constant v, and the kinematic rows vanish when u - u_old = h v.
        let mesh = small_disk();
        let mut state = VacuumState::launched(mesh, [0.0, -0.5]);
        let spaces = state.spaces();
        let h = 1e-3;
        let u_old = state.u.clone();
        spaces.p2v.fill_nodal(&mut state.u, |_, out| {
            out[0] = 0.0;
            out[1] = -0.5 * h;
        });
        let form = VacuumForm::new(
            &state.mesh,
            &spaces,
            5.0e4,
            1000.0,
            1.0e6,
            u_old,
            state.v.clone(),
            h,
        );
        let ndofs = spaces.layout.ndofs();
        let mut x = vec![0.0; ndofs];
        for n in 0..spaces.p2v.nnodes() {
            for c in 0..2 {
                x[form.u_dof(n, c)] = state.u[spaces.p2v.dof(n, c)];
                x[form.v_dof(n, c)] = state.v[spaces.p2v.dof(n, c)];
            }
        }
        let constrained = vec![false; ndofs];
        let mut r = vec![0.0; ndofs];
        assemble_residual(&form, &x, &constrained, &mut r);
        let max = r.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        assert!(max < 1e-10, "residual {max}");
    }

    #[test]
    fn jacobian_matches_finite_differences_across_contact_branches() {
        let mesh = small_disk();
        let state = VacuumState::launched(mesh, [0.0, -0.5]);
        let spaces = state.spaces();
        let ndofs = spaces.layout.ndofs();
        // Sink the disk so its lower part penetrates the floor: both contact
        // branches are active somewhere, and stress plus incompressibility
        // see a genuinely nonlinear configuration.
        let mut x = vec![0.0; ndofs];
        let mut rng_state = 0x9e3779b97f4a7c15u64;
        let mut noise = || {
            rng_state = rng_state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((rng_state >> 11) as f64 / (1u64 << 53) as f64 - 0.5) * 1e-3
        };
        let form = VacuumForm::new(
            &state.mesh,
            &spaces,
            5.0e4,
            1000.0,
            1.0e6,
            state.u.clone(),
            state.v.clone(),
            1e-4,
        );
        for n in 0..spaces.p2v.nnodes() {
            x[form.u_dof(n, 0)] = noise();
            x[form.u_dof(n, 1)] = -0.15 + noise();
            x[form.v_dof(n, 0)] = noise();
            x[form.v_dof(n, 1)] = -0.5 + noise();
        }
        for n in 0..spaces.p1s.nnodes() {
            x[form.q_dof(n)] = 100.0 * noise();
        }
        for n in 0..spaces.p2s.nnodes() {
            x[form.lambda_dof(n)] = -50.0 + 100.0 * noise();
        }
        let constrained = vec![false; ndofs];
        let worst = max_jacobian_mismatch(&form, &x, &constrained, 1e-6);
        assert!(worst < 1e-6, "jacobian mismatch {worst}");
    }

    #[test]
    fn jacobian_det_scan_flags_inversion() {
        let mesh = small_disk();
        let state = VacuumState::launched(mesh, [0.0, 0.0]);
        let spaces = state.spaces();
        assert!((vacuum_jacobian_dets(&state.mesh, &spaces, &state.u) - 1.0).abs() < 1e-12);
        // Strong vertical squash: dets drop below one but stay positive.
        let mut u = state.u.clone();
        spaces.p2v.fill_nodal(&mut u, |p, out| {
            out[0] = 0.0;
            out[1] = -0.5 * (p[1] - 0.3);
        });
        let d = vacuum_jacobian_dets(&state.mesh, &spaces, &u);
        assert!((d - 0.5).abs() < 1e-12, "det {d}");
    }
}
