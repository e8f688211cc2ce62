//! Reference rebound of the elastic disk with no surrounding fluid.
//!
//! A total-Lagrangian incompressible neo-Hookean disk flies ballistically
//! toward the floor `y = 0`, touches it and rebounds.  The mesh is the
//! undeformed disk and never changes; displacement, velocity and two
//! multiplier fields (incompressibility and contact) live on it.  Contact
//! is augmented-Lagrangian over the disk volume: every material point is
//! barred from crossing the floor.  With no fluid there is nothing to
//! dissipate energy, so the solver doubles as a check on the energy
//! bookkeeping that immersed runs are compared against.

pub mod contact;
pub mod form;
pub mod run;

pub use form::{vacuum_jacobian_dets, VacuumForm, VACUUM_NL};
pub use run::{run_vacuum, vacuum_step, VacuumParams, VacuumStepError};

use crate::fem::basis::p2_values;
use crate::fem::{CellGeom, ElementKind, FunctionSpace, SpaceDomain, SystemLayout, TRI_QUAD};
use crate::mesh::Mesh;

/// Function spaces of the vacuum problem on the fixed disk mesh.
pub struct VacuumSpaces {
    /// Quadratic two-component space shared by displacement and velocity.
    pub p2v: FunctionSpace,
    /// Linear scalar space for the incompressibility multiplier.
    pub p1s: FunctionSpace,
    /// Quadratic scalar space for the contact multiplier.
    pub p2s: FunctionSpace,
    /// Monolithic unknown layout: `[u, v, q, lambda]`.
    pub layout: SystemLayout,
}

impl VacuumSpaces {
    pub fn new(mesh: &Mesh) -> Self {
        let p2v = FunctionSpace::new(mesh, ElementKind::P2, 2, SpaceDomain::All);
        let p1s = FunctionSpace::new(mesh, ElementKind::P1, 1, SpaceDomain::All);
        let p2s = FunctionSpace::new(mesh, ElementKind::P2, 1, SpaceDomain::All);
        let layout = SystemLayout::new(&[p2v.ndofs(), p2v.ndofs(), p1s.ndofs(), p2s.ndofs()]);
        Self { p2v, p1s, p2s, layout }
    }
}

/// Complete vacuum solver state at one instant.
pub struct VacuumState {
    /// Undeformed disk; the reference configuration throughout the run.
    pub mesh: Mesh,
    /// Total displacement from the reference configuration.
    pub u: Vec<f64>,
    /// Material velocity.
    pub v: Vec<f64>,
    /// Incompressibility multiplier, stored as its deviation from the
    /// stress-free value `-G`; identically zero at rest.
    pub q: Vec<f64>,
    /// Contact multiplier; nonpositive where contact is active, zero
    /// elsewhere.
    pub lambda: Vec<f64>,
    /// Current time.
    pub t: f64,
}

impl VacuumState {
    /// Undeformed disk moving rigidly at `v0`.
    pub fn launched(mesh: Mesh, v0: [f64; 2]) -> Self {
        let spaces = VacuumSpaces::new(&mesh);
        let mut v = vec![0.0; spaces.p2v.ndofs()];
        spaces.p2v.fill_nodal(&mut v, |_, out| {
            out[0] = v0[0];
            out[1] = v0[1];
        });
        Self {
            u: vec![0.0; spaces.p2v.ndofs()],
            v,
            q: vec![0.0; spaces.p1s.ndofs()],
            lambda: vec![0.0; spaces.p2s.ndofs()],
            t: 0.0,
            mesh,
        }
    }

    /// Spaces matching the state's mesh.
    pub fn spaces(&self) -> VacuumSpaces {
        VacuumSpaces::new(&self.mesh)
    }

    /// Kinetic energy `1/2 integral rho |v|^2` over the reference domain.
    pub fn kinetic_energy(&self, spaces: &VacuumSpaces, rho_ref: f64) -> f64 {
        self.quadrature_sum(spaces, |vals, _, cell_nodes| {
            let mut vq = [0.0f64; 2];
            for (ln, &node) in cell_nodes.iter().enumerate() {
                for c in 0..2 {
                    vq[c] += self.v[spaces.p2v.dof(node, c)] * vals[ln];
                }
            }
            0.5 * rho_ref * (vq[0] * vq[0] + vq[1] * vq[1])
        })
    }

    /// Stored elastic energy `integral G/2 (|F|^2 - 2)` with `F = I + grad u`.
    pub fn elastic_energy(&self, spaces: &VacuumSpaces, g_shear: f64) -> f64 {
        self.quadrature_sum(spaces, |_, grads, cell_nodes| {
            let mut f = [[1.0, 0.0], [0.0, 1.0]];
            for (ln, &node) in cell_nodes.iter().enumerate() {
                for c in 0..2 {
                    let uv = self.u[spaces.p2v.dof(node, c)];
                    f[c][0] += uv * grads[ln][0];
                    f[c][1] += uv * grads[ln][1];
                }
            }
            let sq = f[0][0] * f[0][0] + f[0][1] * f[0][1] + f[1][0] * f[1][0] + f[1][1] * f[1][1];
            0.5 * g_shear * (sq - 2.0)
        })
    }

    /// Lowest current height `Y + u_y` over all displacement nodes.
    pub fn min_height(&self, spaces: &VacuumSpaces) -> f64 {
        (0..spaces.p2v.nnodes())
            .map(|n| spaces.p2v.node_pos(n)[1] + self.u[spaces.p2v.dof(n, 1)])
            .fold(f64::INFINITY, f64::min)
    }

    fn quadrature_sum(
        &self,
        spaces: &VacuumSpaces,
        mut f: impl FnMut(&[f64; 6], &[[f64; 2]; 6], &[usize]) -> f64,
    ) -> f64 {
        let mut total = 0.0;
        for (ci, tri) in self.mesh.triangles.iter().enumerate() {
            let geom = CellGeom::new(&self.mesh.tri_points(tri));
            let nodes = spaces.p2v.cell_nodes(ci).expect("global space covers all cells");
            for q in &TRI_QUAD {
                let vals = p2_values(&q.bary);
                let ref_grads = crate::fem::basis::p2_ref_grads(&q.bary);
                let grads: [[f64; 2]; 6] = std::array::from_fn(|ln| geom.grad(ref_grads[ln]));
                total += geom.area * q.weight * f(&vals, &grads, nodes);
            }
        }
        total
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::generate::{default_disk_mesh, disk_mesh};
    use crate::mesh::generate::GeometrySpec;

    #[test]
    fn launched_disk_kinetic_energy_matches_rigid_body_value() {
        let mesh = default_disk_mesh();
        let area = mesh.subdomain_area(crate::mesh::Subdomain::Solid);
        let state = VacuumState::launched(mesh, [0.0, -0.5]);
        let spaces = state.spaces();
        let ek = state.kinetic_energy(&spaces, 1000.0);
        // Uniform v is reproduced exactly by the quadrature.
        assert!((ek - 0.5 * 1000.0 * 0.25 * area).abs() < 1e-9);
        // Disk of radius 0.2: 1/2 * 1000 * 0.5^2 * pi r^2 = 15.70796...
        assert!((ek - 15.70796).abs() < 0.16, "ek = {ek}");
        assert_eq!(state.elastic_energy(&spaces, 5.0e4), 0.0);
    }

    #[test]
    fn affine_displacement_has_exact_elastic_energy() {
        let mesh = disk_mesh(&GeometrySpec::default(), 16, 0.08).unwrap();
        let area = mesh.subdomain_area(crate::mesh::Subdomain::Solid);
        let mut state = VacuumState::launched(mesh, [0.0, 0.0]);
        let spaces = state.spaces();
        // u = A X gives constant F = I + A on every cell.
        let a = [[0.01, 0.02], [0.03, -0.01]];
        spaces.p2v.fill_nodal(&mut state.u, |p, out| {
            out[0] = a[0][0] * p[0] + a[0][1] * p[1];
            out[1] = a[1][0] * p[0] + a[1][1] * p[1];
        });
        let sq = (1.0 + a[0][0]) * (1.0 + a[0][0])
            + a[0][1] * a[0][1]
            + a[1][0] * a[1][0]
            + (1.0 + a[1][1]) * (1.0 + a[1][1]);
        let g_shear = 5.0e4;
        let want = 0.5 * g_shear * (sq - 2.0) * area;
        let got = state.elastic_energy(&spaces, g_shear);
        assert!((got - want).abs() < 1e-9 * want.abs().max(1.0), "got {got} want {want}");
    }

    #[test]
    fn min_height_tracks_displacement() {
        let mesh = default_disk_mesh();
        let mut state = VacuumState::launched(mesh, [0.0, -0.5]);
        let spaces = state.spaces();
        // The generator puts a vertex exactly at the circle bottom.
        assert!((state.min_height(&spaces) - 0.1).abs() < 1e-12);
        spaces.p2v.fill_nodal(&mut state.u, |_, out| {
            out[0] = 0.0;
            out[1] = -0.06;
        });
        assert!((state.min_height(&spaces) - 0.04).abs() < 1e-12);
    }
}
