//! Two-dimensional simulation of an elastic disk rebounding off a rigid wall
//! inside an incompressible Newtonian fluid, together with the dry (vacuum)
//! reference problem of the same disk bouncing against the wall.
//!
//! The wet solver advances a monolithic velocity / mesh-displacement /
//! pressure system on a single conforming triangle mesh whose cells are
//! labeled fluid or solid. The mesh deforms with the solid; whenever element
//! quality degrades past a threshold the computational domain is rebased onto
//! the deformed configuration, locally repaired by edge splits, collapses,
//! flips and vertex smoothing, and the accumulated deformation is folded into
//! a nodal deformation-gradient history field. The rebound is contactless:
//! a thin lubrication film always separates the disk from the wall, and an
//! adaptive sizing strategy keeps several element layers across the film.
//!
//! Module map:
//! - [`geometry`]: small 2D primitives shared by everything else.
//! - [`mesh`]: triangle mesh with subdomain labels, local editing operations,
//!   adaptation sweeps, generation of the disk-in-box mesh, text I/O.
//! - [`distance`]: exact point-to-polyline distance fields used by the
//!   sizing strategy that refines toward the disk surface and the wall.
//! - [`fem`]: P1/P2 Lagrange spaces, quadrature, dual-number assembly,
//!   Dirichlet handling, Newton with a sparse direct solver, and
//!   cross-mesh field transfer.
//! - [`material`]: constitutive laws for the solid and the fluid.
//! - [`ale`]: the monolithic fluid–structure stepper (theta time scheme,
//!   combined weak form, re-meshing orchestration, initial Stokes solve).
//! - [`vacuum`]: the dry bounce solver with an augmented-Lagrangian wall
//!   constraint.
//! - [`diagnostics`]: gap width, wall pressure, energies, restitution.
//! - [`config`]: run configuration, presets, text round-trip.
//! - [`output`]: CSV time series, manifests, checkpoints.

pub mod ale;
pub mod config;
pub mod diagnostics;
pub mod distance;
pub mod fem;
pub mod geometry;
pub mod material;
pub mod mesh;
pub mod output;
pub mod vacuum;
