//! The combined monolithic weak form of one implicit substep.
//!
//! Unknowns per cell: quadratic velocity (12), quadratic mesh displacement
//! (12) and, on fluid cells, linear pressure (3).  Solid cells integrate
//! momentum against the stored-gradient pullback plus the kinematic
//! relation between displacement rate and velocity; fluid cells integrate
//! Navier-Stokes mapped through the current mesh deformation plus an
//! artificial elasticity that extends the interface motion into the fluid
//! mesh.  Interface displacement rows take the kinematic equation from
//! solid cells only, so fluid cells scatter no artificial-elasticity
//! contribution into them.

use crate::fem::basis::{p1_values, p2_ref_grads, p2_values};
use crate::fem::{CellForm, CellGeom, ElementKind, FunctionSpace, Scalar, SpaceDomain, M2, V2, TRI_QUAD};
use crate::material::{cauchy_fluid, piola_compressible, MaterialParams, PseudoSolidParams};
use crate::mesh::{BoundaryTag, Mesh, Subdomain};

use super::AleSpaces;

/// Local slots of one cell: 12 velocity + 12 displacement + 3 pressure.
pub const FSI_NL: usize = 27;
const V0: usize = 0;
const U0: usize = 12;
const P0: usize = 24;

/// Row `c` of a matrix dotted with a constant gradient.
fn rowdot<T: Scalar>(m: &M2<T>, c: usize, g: [f64; 2]) -> T {
    m.0[c][0].mul_f64(g[0]) + m.0[c][1].mul_f64(g[1])
}

/// Interpolates a two-component field from 12 interleaved local values.
fn interp_vec<T: Scalar>(x: &[T], base: usize, vals: &[f64; 6]) -> V2<T> {
    let mut v = V2::zero();
    for ln in 0..6 {
        for c in 0..2 {
            v.0[c] += x[base + 2 * ln + c].mul_f64(vals[ln]);
        }
    }
    v
}

/// Gradient of a two-component field, rows = components.
fn interp_grad<T: Scalar>(x: &[T], base: usize, grads: &[[f64; 2]; 6]) -> M2<T> {
    let mut m = M2::zero();
    for ln in 0..6 {
        for c in 0..2 {
            let xv = x[base + 2 * ln + c];
            m.0[c][0] += xv.mul_f64(grads[ln][0]);
            m.0[c][1] += xv.mul_f64(grads[ln][1]);
        }
    }
    m
}

/// Artificial-elasticity rows `lambda div u div phi + mu (grad u +
/// grad u^T) : grad phi` for the 12 displacement slots, honoring per-node
/// skip flags.
fn pseudo_solid_rows<T: Scalar>(
    grad_u: &M2<T>,
    grads: &[[f64; 2]; 6],
    (mu_a, lambda_a): (f64, f64),
    w: f64,
    skip: &[bool; 6],
    out: &mut [T],
    base: usize,
) {
    let div_u = grad_u.trace();
    let sym2 = *grad_u + grad_u.t();
    for ln in 0..6 {
        if skip[ln] {
            continue;
        }
        for c in 0..2 {
            let t1 = (div_u.mul_f64(lambda_a)).mul_f64(grads[ln][c]);
            let t2 = rowdot(&sym2, c, grads[ln]).mul_f64(mu_a);
            out[base + 2 * ln + c] += (t1 + t2).mul_f64(w);
        }
    }
}

/// The combined fluid-structure residual of one implicit substep of size
/// `h`, with previous-substep fields frozen inside.
pub struct FsiForm<'a> {
    mesh: &'a Mesh,
    spaces: &'a AleSpaces,
    params: MaterialParams,
    geoms: Vec<CellGeom>,
    lame: Vec<(f64, f64)>,
    interface_node: Vec<bool>,
    f_r: Vec<f64>,
    v_old: Vec<f64>,
    u_old: Vec<f64>,
    h: f64,
}

impl<'a> FsiForm<'a> {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        mesh: &'a Mesh,
        spaces: &'a AleSpaces,
        params: MaterialParams,
        pseudo: PseudoSolidParams,
        f_r: Vec<f64>,
        v_old: Vec<f64>,
        u_old: Vec<f64>,
        h: f64,
    ) -> Self {
        assert!(h > 0.0);
        assert_eq!(f_r.len(), spaces.p2t.ndofs());
        assert_eq!(v_old.len(), spaces.p2v.ndofs());
        assert_eq!(u_old.len(), spaces.p2v.ndofs());
        let geoms: Vec<CellGeom> =
            mesh.triangles.iter().map(|t| CellGeom::new(&mesh.tri_points(t))).collect();
        let lame = mesh
            .triangles
            .iter()
            .zip(&geoms)
            .map(|(t, g)| {
                if t.label == Subdomain::Fluid { pseudo.lame(g.area) } else { (0.0, 0.0) }
            })
            .collect();
        let mut interface_node = vec![false; spaces.p2v.nnodes()];
        for n in spaces.p2v.interface_nodes(mesh) {
            interface_node[n] = true;
        }
        Self { mesh, spaces, params, geoms, lame, interface_node, f_r, v_old, u_old, h }
    }

    pub fn v_dof(&self, node: usize, comp: usize) -> usize {
        self.spaces.layout.offset(0) + self.spaces.p2v.dof(node, comp)
    }

    pub fn u_dof(&self, node: usize, comp: usize) -> usize {
        self.spaces.layout.offset(1) + self.spaces.p2v.dof(node, comp)
    }

    pub fn p_dof(&self, node: usize) -> usize {
        self.spaces.layout.offset(2) + self.spaces.p1p.dof(node, 0)
    }
}

/// Dirichlet set of the monolithic system: no-slip floor for the velocity,
/// pinned mesh displacement on the whole outer boundary.
pub fn fsi_dirichlet(mesh: &Mesh, spaces: &AleSpaces) -> Vec<(usize, f64)> {
    let mut out = Vec::new();
    for node in spaces.p2v.boundary_nodes(mesh, Some(BoundaryTag::Bottom)) {
        for c in 0..2 {
            out.push((spaces.layout.offset(0) + spaces.p2v.dof(node, c), 0.0));
        }
    }
    for node in spaces.p2v.boundary_nodes(mesh, None) {
        for c in 0..2 {
            out.push((spaces.layout.offset(1) + spaces.p2v.dof(node, c), 0.0));
        }
    }
    out
}

impl CellForm<FSI_NL> for FsiForm<'_> {
    fn ncells(&self) -> usize {
        self.mesh.triangles.len()
    }

    fn cell_dofs(&self, cell: usize, dofs: &mut [usize; FSI_NL]) -> Option<usize> {
        let nodes = self.spaces.p2v.cell_nodes(cell).expect("global velocity space");
        for (ln, &node) in nodes.iter().enumerate() {
            for c in 0..2 {
                dofs[V0 + 2 * ln + c] = self.v_dof(node, c);
                dofs[U0 + 2 * ln + c] = self.u_dof(node, c);
            }
        }
        match self.spaces.p1p.cell_nodes(cell) {
            Some(pn) => {
                for (k, &node) in pn.iter().enumerate() {
                    dofs[P0 + k] = self.p_dof(node);
                }
                Some(FSI_NL)
            }
            None => Some(P0),
        }
    }

    fn cell_residual<T: Scalar>(&self, cell: usize, x: &[T; FSI_NL], out: &mut [T; FSI_NL]) {
        let geom = self.geoms[cell];
        let nodes = self.spaces.p2v.cell_nodes(cell).unwrap();
        let solid = self.mesh.triangles[cell].label == Subdomain::Solid;

        // Per-cell gathers of frozen fields.
        let mut vo = [0.0; 12];
        let mut uo = [0.0; 12];
        let mut fr = [[0.0; 4]; 6];
        for (ln, &node) in nodes.iter().enumerate() {
            for c in 0..2 {
                vo[2 * ln + c] = self.v_old[self.spaces.p2v.dof(node, c)];
                uo[2 * ln + c] = self.u_old[self.spaces.p2v.dof(node, c)];
            }
            if solid {
                for k in 0..4 {
                    fr[ln][k] = self.f_r[self.spaces.p2t.dof(node, k)];
                }
            }
        }
        let skip: [bool; 6] = std::array::from_fn(|ln| self.interface_node[nodes[ln]]);

        let inv_h = 1.0 / self.h;
        for q in &TRI_QUAD {
            let vals = p2_values(&q.bary);
            let ref_grads = p2_ref_grads(&q.bary);
            let grads: [[f64; 2]; 6] = std::array::from_fn(|ln| geom.grad(ref_grads[ln]));

            let v = interp_vec(x, V0, &vals);
            let grad_v = interp_grad(x, V0, &grads);
            let u = interp_vec(x, U0, &vals);
            let grad_u = interp_grad(x, U0, &grads);
            let v_old = interp_vec::<f64>(&vo, 0, &vals);
            let u_old = interp_vec::<f64>(&uo, 0, &vals);

            let dv = (v - V2::from_f64(v_old.0)).mul_f64(inv_h);
            let mesh_vel = (u - V2::from_f64(u_old.0)).mul_f64(inv_h);
            let f_c = M2::identity() + grad_u;

            if solid {
                // Interpolate the deviation from identity so an identity
                // nodal field stays exactly identity at quadrature points
                // (partition-of-unity rounding would otherwise be amplified
                // by the bulk modulus).
                let mut f_r_q = [1.0, 0.0, 0.0, 1.0];
                let eye = [1.0, 0.0, 0.0, 1.0];
                for ln in 0..6 {
                    for k in 0..4 {
                        f_r_q[k] += (fr[ln][k] - eye[k]) * vals[ln];
                    }
                }
                let f_r = M2([[f_r_q[0], f_r_q[1]], [f_r_q[2], f_r_q[3]]]);
                let j_r = f_r.det();
                debug_assert!(j_r > 0.0, "stored gradient inverted on cell {cell}");
                let w = geom.area * q.weight / j_r;

                let f = f_c * M2::from_f64(f_r.0);
                let piola = piola_compressible(f, self.params.g_shear, self.params.kappa);
                let stress = piola * M2::from_f64(f_r.0).t();
                let kin = v - mesh_vel;
                for ln in 0..6 {
                    for c in 0..2 {
                        let inertia = dv.0[c].mul_f64(self.params.rho_s0 * vals[ln]);
                        let elast = rowdot(&stress, c, grads[ln]);
                        out[V0 + 2 * ln + c] += (inertia + elast).mul_f64(w);
                        out[U0 + 2 * ln + c] += kin.0[c].mul_f64(w * vals[ln]);
                    }
                }
            } else {
                let w = geom.area * q.weight;
                let j_c = f_c.det();
                let f_c_inv = f_c.inv();
                let grad_v_cur = grad_v * f_c_inv;

                let pb = p1_values(&q.bary);
                let mut p = T::zero();
                for k in 0..3 {
                    p += x[P0 + k].mul_f64(pb[k]);
                }

                let t_f = cauchy_fluid(grad_v_cur, p, self.params.mu);
                let stress = (t_f * f_c_inv.t()).scale(j_c);
                let conv = grad_v_cur.mulv(v - mesh_vel);
                let accel = (dv + conv).scale(j_c).mul_f64(self.params.rho_f);
                for ln in 0..6 {
                    for c in 0..2 {
                        let mom = accel.0[c].mul_f64(vals[ln]) + rowdot(&stress, c, grads[ln]);
                        out[V0 + 2 * ln + c] += mom.mul_f64(w);
                    }
                }
                pseudo_solid_rows(&grad_u, &grads, self.lame[cell], w, &skip, out, U0);
                let div_cur = grad_v_cur.trace() * j_c;
                for k in 0..3 {
                    out[P0 + k] += div_cur.mul_f64(w * pb[k]);
                }
            }
        }
    }
}

/// Standalone artificial-elasticity form over one space, for verification
/// against hand quadrature and finite differences.
pub struct PseudoSolidForm<'a> {
    mesh: &'a Mesh,
    pub space: FunctionSpace,
    geoms: Vec<Option<CellGeom>>,
    lame: Vec<(f64, f64)>,
}

impl<'a> PseudoSolidForm<'a> {
    pub fn new(mesh: &'a Mesh, domain: SpaceDomain, pseudo: PseudoSolidParams) -> Self {
        let space = FunctionSpace::new(mesh, ElementKind::P2, 2, domain);
        let geoms: Vec<Option<CellGeom>> = (0..mesh.triangles.len())
            .map(|c| space.cell_nodes(c).map(|_| CellGeom::new(&mesh.tri_points(&mesh.triangles[c]))))
            .collect();
        let lame = geoms
            .iter()
            .map(|g| g.map(|g| pseudo.lame(g.area)).unwrap_or((0.0, 0.0)))
            .collect();
        Self { mesh, space, geoms, lame }
    }
}

impl CellForm<12> for PseudoSolidForm<'_> {
    fn ncells(&self) -> usize {
        self.mesh.triangles.len()
    }

    fn cell_dofs(&self, cell: usize, dofs: &mut [usize; 12]) -> Option<usize> {
        let nodes = self.space.cell_nodes(cell)?;
        for (ln, &node) in nodes.iter().enumerate() {
            for c in 0..2 {
                dofs[2 * ln + c] = self.space.dof(node, c);
            }
        }
        Some(12)
    }

    fn cell_residual<T: Scalar>(&self, cell: usize, x: &[T; 12], out: &mut [T; 12]) {
        let geom = self.geoms[cell].expect("residual only on covered cells");
        for q in &TRI_QUAD {
            let ref_grads = p2_ref_grads(&q.bary);
            let grads: [[f64; 2]; 6] = std::array::from_fn(|ln| geom.grad(ref_grads[ln]));
            let grad_u = interp_grad(x, 0, &grads);
            pseudo_solid_rows(
                &grad_u,
                &grads,
                self.lame[cell],
                geom.area * q.weight,
                &[false; 6],
                out,
                0,
            );
        }
    }
}

/// Small labeled test fixture: a box of fluid cells with a roughly
/// disk-shaped solid blob that stays clear of the outer boundary.
#[cfg(test)]
pub(crate) fn tiny_fsi_mesh(n: usize) -> Mesh {
    let mut mesh = crate::mesh::box_mesh(n, n, 0.8, 0.8);
    for t in &mut mesh.triangles {
        let c = crate::geometry::centroid(
            mesh.vertices[t.v[0]],
            mesh.vertices[t.v[1]],
            mesh.vertices[t.v[2]],
        );
        let d2 = (c[0] - 0.4).powi(2) + (c[1] - 0.45).powi(2);
        if d2 < 0.18 * 0.18 {
            t.label = Subdomain::Solid;
        }
    }
    mesh.rebuild_interface_from_labels();
    mesh.check_invariants().unwrap();
    assert!(mesh.subdomain_area(Subdomain::Solid) > 0.0);
    mesh
}
