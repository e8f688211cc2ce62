//! The updated-ALE fluid-structure time stepper.
//!
//! Between re-meshes the computational domain is the last repaired mesh;
//! all unknowns live on it as Lagrange fields.  The solid deformation
//! gradient splits multiplicatively into a stored nodal part `F_r`
//! (accumulated at re-mesh events) and a current part `F_c = I + grad u_c`
//! from the mesh displacement unknown, so the stepper never differentiates
//! across mesh generations.

pub mod forms;
pub mod remesh;
pub mod run;
pub mod stokes;
pub mod theta;

pub use forms::FsiForm;
pub use remesh::{remesh_if_needed, GapSizeField, RemeshError, RemeshOutcome, SizeParams, StrategyKind};
pub use run::{advance, glowinski_step, RemeshPolicy, StepError, StepReport, Stepper};
pub use stokes::{initial_conditions, StokesProblem};
pub use theta::GlowinskiSettings;

use crate::fem::{ElementKind, FunctionSpace, SpaceDomain, SystemLayout};
use crate::geometry::Point;
use crate::mesh::{Mesh, Subdomain};

/// Function spaces of one mesh generation.
///
/// Velocity and mesh displacement share one global quadratic vector space;
/// pressure is linear on fluid cells only; the stored deformation gradient
/// is a four-component quadratic field collocated with the velocity nodes.
pub struct AleSpaces {
    /// Quadratic two-component space for `v` and `u_c`.
    pub p2v: FunctionSpace,
    /// Linear scalar pressure space on fluid cells.
    pub p1p: FunctionSpace,
    /// Quadratic four-component space holding `F_r` row-major.
    pub p2t: FunctionSpace,
    /// Monolithic unknown layout: `[v, u_c, p]`.
    pub layout: SystemLayout,
}

impl AleSpaces {
    pub fn new(mesh: &Mesh) -> Self {
        let p2v = FunctionSpace::new(mesh, ElementKind::P2, 2, SpaceDomain::All);
        let p1p =
            FunctionSpace::new(mesh, ElementKind::P1, 1, SpaceDomain::Only(Subdomain::Fluid));
        let p2t = FunctionSpace::new(mesh, ElementKind::P2, 4, SpaceDomain::All);
        let layout = SystemLayout::new(&[p2v.ndofs(), p2v.ndofs(), p1p.ndofs()]);
        Self { p2v, p1p, p2t, layout }
    }
}

/// Complete solver state at one instant.
pub struct AleState {
    /// Domain of the last re-mesh; field reference configuration.
    pub mesh: Mesh,
    /// Velocity, quadratic two-component nodal values.
    pub v: Vec<f64>,
    /// Mesh displacement accumulated since the last re-mesh; zero on the
    /// outer boundary.
    pub u_c: Vec<f64>,
    /// Fluid pressure, linear nodal values on fluid cells.
    pub p: Vec<f64>,
    /// Stored deformation gradient at re-mesh time, nodal `[F00 F01 F10 F11]`.
    pub f_r: Vec<f64>,
    /// Current time.
    pub t: f64,
    /// Time of the last re-mesh.
    pub t_r: f64,
}

impl AleState {
    /// Zero-field state with identity stored gradient on a fresh mesh.
    pub fn at_rest(mesh: Mesh) -> Self {
        let spaces = AleSpaces::new(&mesh);
        let mut f_r = vec![0.0; spaces.p2t.ndofs()];
        spaces.p2t.fill_nodal(&mut f_r, |_, out| {
            out[0] = 1.0;
            out[3] = 1.0;
        });
        Self {
            v: vec![0.0; spaces.p2v.ndofs()],
            u_c: vec![0.0; spaces.p2v.ndofs()],
            p: vec![0.0; spaces.p1p.ndofs()],
            f_r,
            t: 0.0,
            t_r: 0.0,
            mesh,
        }
    }

    /// Spaces matching the current mesh generation.
    pub fn spaces(&self) -> AleSpaces {
        AleSpaces::new(&self.mesh)
    }

    /// Per-vertex offsets of the current mesh displacement field.
    pub fn vertex_displacements(&self, spaces: &AleSpaces) -> Vec<Point> {
        (0..self.mesh.vertices.len())
            .map(|vi| {
                let n = spaces.p2v.vertex_node(vi).expect("global space covers all vertices");
                [self.u_c[spaces.p2v.dof(n, 0)], self.u_c[spaces.p2v.dof(n, 1)]]
            })
            .collect()
    }

    /// Worst cell quality of the mesh displaced by `u_c`.
    pub fn displaced_quality(&self, spaces: &AleSpaces) -> f64 {
        self.mesh.quality_displaced(&self.vertex_displacements(spaces))
    }
}
