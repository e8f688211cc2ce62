//! Finite element infrastructure: dual-number arithmetic, reference
//! elements, function spaces, sparse assembly, and Newton solves.

pub mod algebra;
pub mod assemble;
pub mod basis;
pub mod dual;
pub mod fd;
pub mod newton;
pub mod quadrature;
pub mod scalar;
pub mod space;
pub mod sparse;
pub mod transfer;

pub use algebra::{M2, V2};
pub use assemble::{assemble_jacobian, assemble_residual, coupling_pairs, solver_for, CellForm};
pub use basis::CellGeom;
pub use dual::Dual;
pub use fd::max_jacobian_mismatch;
pub use newton::{newton_solve, NewtonError, NewtonReport, NewtonSettings};
pub use quadrature::{QuadPoint, TRI_QUAD};
pub use scalar::Scalar;
pub use space::{ElementKind, FunctionSpace, SpaceDomain, SystemLayout};
pub use sparse::{LinearError, LinearSolver};
pub use transfer::{eval_field, transfer_nodal, MeshLocator};
