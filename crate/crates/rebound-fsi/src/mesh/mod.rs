//! Conforming triangle mesh with fluid/solid subdomain labels, a marked
//! solid–fluid interface polyline, and tagged outer-boundary edges.
//!
//! Invariants maintained by every editing operation:
//! - triangles are counterclockwise with strictly positive area;
//! - every edge has one or two incident triangles; one-triangle edges are
//!   exactly the registered boundary edges;
//! - interface edges have two incident triangles with different labels and
//!   every other interior edge separates same-label triangles;
//! - interface vertices have exactly two incident interface edges, so the
//!   interface is a disjoint union of closed polylines;
//! - every vertex is referenced by at least one triangle;
//! - the triangulated domain is a topological disk (V - E + F = 1).

pub mod adapt;
pub mod generate;
pub mod io;
pub mod ops;
pub mod quality;

use std::collections::{BTreeMap, BTreeSet};

use crate::geometry::{centroid, signed_area, Point};

pub use adapt::{adapt_mesh, AdaptReport, AdaptSettings, RefinementStrategy};
pub use generate::{box_mesh, generate_initial_mesh, GenerateError};
pub use ops::{edge_collapse, edge_flip, edge_split, vertex_move, MeshEditor, OpReject};
pub use quality::triangle_quality;

pub type VertexId = usize;

/// Undirected edge key, stored with the smaller vertex id first.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct EdgeKey(VertexId, VertexId);

impl EdgeKey {
    pub fn new(a: VertexId, b: VertexId) -> Self {
        if a <= b {
            EdgeKey(a, b)
        } else {
            EdgeKey(b, a)
        }
    }

    #[inline]
    pub fn a(&self) -> VertexId {
        self.0
    }

    #[inline]
    pub fn b(&self) -> VertexId {
        self.1
    }

    /// The other endpoint, assuming `v` is one of the two.
    #[inline]
    pub fn opposite(&self, v: VertexId) -> VertexId {
        if self.0 == v {
            self.1
        } else {
            self.0
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Subdomain {
    Fluid,
    Solid,
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum BoundaryTag {
    /// The rigid wall at the bottom of the box (no-slip, never moves).
    Bottom,
    /// Lateral and top walls (traction-free for the flow, pinned mesh).
    LateralTop,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Tri {
    pub v: [VertexId; 3],
    pub label: Subdomain,
}

impl Tri {
    pub fn edges(&self) -> [EdgeKey; 3] {
        [
            EdgeKey::new(self.v[0], self.v[1]),
            EdgeKey::new(self.v[1], self.v[2]),
            EdgeKey::new(self.v[2], self.v[0]),
        ]
    }

    pub fn contains_vertex(&self, v: VertexId) -> bool {
        self.v.contains(&v)
    }

    /// Vertex opposite to edge `e`; `None` if `e` is not an edge of the
    /// triangle.
    pub fn opposite_vertex(&self, e: EdgeKey) -> Option<VertexId> {
        if !self.contains_vertex(e.a()) || !self.contains_vertex(e.b()) {
            return None;
        }
        self.v.iter().copied().find(|&v| v != e.a() && v != e.b())
    }
}

#[derive(Clone, Debug, Default)]
pub struct Mesh {
    pub vertices: Vec<Point>,
    pub triangles: Vec<Tri>,
    pub interface_edges: BTreeSet<EdgeKey>,
    pub boundary_edges: BTreeMap<EdgeKey, BoundaryTag>,
    /// Incremented every time the simulation rebases onto a repaired mesh.
    pub generation: u32,
}

/// How a vertex may be edited. Boundary and interface vertices are pinned:
/// they may be kept by a collapse but never moved or deleted.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum VertexConstraint {
    Free,
    Interface,
    Boundary,
}

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum InvariantError {
    #[error("vertex {0} has a non-finite coordinate")]
    NonFiniteVertex(VertexId),
    #[error("triangle {0} references an invalid or repeated vertex")]
    BadIndex(usize),
    #[error("triangle {0} has non-positive area {1:.3e}")]
    NonPositiveArea(usize, f64),
    #[error("edge ({0}, {1}) has {2} incident triangles")]
    BadIncidence(VertexId, VertexId, usize),
    #[error("one-triangle edge ({0}, {1}) is not a registered boundary edge")]
    UnregisteredBoundary(VertexId, VertexId),
    #[error("registered boundary edge ({0}, {1}) does not have exactly one incident triangle")]
    FalseBoundary(VertexId, VertexId),
    #[error("interface edge ({0}, {1}) does not separate solid from fluid")]
    BadInterface(VertexId, VertexId),
    #[error("edge ({0}, {1}) separates different subdomains but is not marked as interface")]
    UnmarkedInterface(VertexId, VertexId),
    #[error("interface vertex {0} has {1} incident interface edges (want 2)")]
    OpenInterface(VertexId, usize),
    #[error("vertex {0} is not referenced by any triangle")]
    OrphanVertex(VertexId),
    #[error("Euler characteristic {0} (want 1 for a disk-topology domain)")]
    EulerCharacteristic(i64),
}

impl Mesh {
    #[inline]
    pub fn tri_points(&self, t: &Tri) -> [Point; 3] {
        [
            self.vertices[t.v[0]],
            self.vertices[t.v[1]],
            self.vertices[t.v[2]],
        ]
    }

    pub fn tri_area(&self, t: &Tri) -> f64 {
        let [a, b, c] = self.tri_points(t);
        signed_area(a, b, c)
    }

    pub fn tri_centroid(&self, t: &Tri) -> Point {
        let [a, b, c] = self.tri_points(t);
        centroid(a, b, c)
    }

    pub fn tri_quality(&self, t: &Tri) -> f64 {
        let [a, b, c] = self.tri_points(t);
        triangle_quality(a, b, c)
    }

    /// Minimum triangle quality over the mesh; the sole mesh-health scalar
    /// used to trigger re-meshing. Empty meshes report 0.
    pub fn quality(&self) -> f64 {
        if self.triangles.is_empty() {
            return 0.0;
        }
        self.triangles
            .iter()
            .map(|t| self.tri_quality(t))
            .fold(f64::INFINITY, f64::min)
    }

    /// Minimum quality with every vertex displaced by `displacement`
    /// (a per-vertex offset, e.g. an evaluated displacement field).
    pub fn quality_displaced(&self, displacement: &[Point]) -> f64 {
        assert_eq!(displacement.len(), self.vertices.len());
        let mut q = if self.triangles.is_empty() { 0.0 } else { f64::INFINITY };
        for t in &self.triangles {
            let p: Vec<Point> = t
                .v
                .iter()
                .map(|&v| {
                    [
                        self.vertices[v][0] + displacement[v][0],
                        self.vertices[v][1] + displacement[v][1],
                    ]
                })
                .collect();
            q = q.min(triangle_quality(p[0], p[1], p[2]));
        }
        q
    }

    /// Map from every edge to the (1 or 2) incident triangle indices.
    pub fn edge_incidence(&self) -> BTreeMap<EdgeKey, Vec<usize>> {
        let mut map: BTreeMap<EdgeKey, Vec<usize>> = BTreeMap::new();
        for (ti, t) in self.triangles.iter().enumerate() {
            for e in t.edges() {
                map.entry(e).or_default().push(ti);
            }
        }
        map
    }

    /// Per-vertex editing constraint derived from the interface and boundary
    /// registries. Boundary wins over interface for reporting purposes; a
    /// vertex on both is pinned either way.
    pub fn vertex_constraints(&self) -> Vec<VertexConstraint> {
        let mut c = vec![VertexConstraint::Free; self.vertices.len()];
        for e in &self.interface_edges {
            c[e.a()] = VertexConstraint::Interface;
            c[e.b()] = VertexConstraint::Interface;
        }
        for e in self.boundary_edges.keys() {
            c[e.a()] = VertexConstraint::Boundary;
            c[e.b()] = VertexConstraint::Boundary;
        }
        c
    }

    /// Vertices lying on the interface polyline, in sorted order.
    pub fn interface_vertices(&self) -> BTreeSet<VertexId> {
        let mut s = BTreeSet::new();
        for e in &self.interface_edges {
            s.insert(e.a());
            s.insert(e.b());
        }
        s
    }

    /// Vertices of boundary edges carrying `tag`, in sorted order.
    pub fn boundary_vertices(&self, tag: BoundaryTag) -> BTreeSet<VertexId> {
        let mut s = BTreeSet::new();
        for (e, t) in &self.boundary_edges {
            if *t == tag {
                s.insert(e.a());
                s.insert(e.b());
            }
        }
        s
    }

    pub fn subdomain_area(&self, label: Subdomain) -> f64 {
        self.triangles
            .iter()
            .filter(|t| t.label == label)
            .map(|t| self.tri_area(t))
            .sum()
    }

    /// Recomputes the interface registry as the set of edges whose two
    /// incident cells carry different labels. Useful after relabeling cells
    /// of an existing mesh.
    pub fn rebuild_interface_from_labels(&mut self) {
        self.interface_edges.clear();
        for (e, tris) in self.edge_incidence() {
            if let [a, b] = tris[..] {
                if self.triangles[a].label != self.triangles[b].label {
                    self.interface_edges.insert(e);
                }
            }
        }
    }

    /// Full structural validation. Cheap enough to run after every
    /// adaptation pass in tests; production code runs it at generation and
    /// re-meshing boundaries.
    pub fn check_invariants(&self) -> Result<(), InvariantError> {
        let nv = self.vertices.len();
        for (i, p) in self.vertices.iter().enumerate() {
            if !p[0].is_finite() || !p[1].is_finite() {
                return Err(InvariantError::NonFiniteVertex(i));
            }
        }
        let mut referenced = vec![false; nv];
        for (ti, t) in self.triangles.iter().enumerate() {
            let [a, b, c] = t.v;
            if a >= nv || b >= nv || c >= nv || a == b || b == c || a == c {
                return Err(InvariantError::BadIndex(ti));
            }
            referenced[a] = true;
            referenced[b] = true;
            referenced[c] = true;
            let area = self.tri_area(t);
            if !(area > 0.0) {
                return Err(InvariantError::NonPositiveArea(ti, area));
            }
        }
        if let Some(i) = referenced.iter().position(|r| !r) {
            return Err(InvariantError::OrphanVertex(i));
        }

        let incidence = self.edge_incidence();
        for (e, tris) in &incidence {
            match tris.len() {
                1 => {
                    if !self.boundary_edges.contains_key(e) {
                        return Err(InvariantError::UnregisteredBoundary(e.a(), e.b()));
                    }
                }
                2 => {
                    let l0 = self.triangles[tris[0]].label;
                    let l1 = self.triangles[tris[1]].label;
                    if self.interface_edges.contains(e) {
                        if l0 == l1 {
                            return Err(InvariantError::BadInterface(e.a(), e.b()));
                        }
                    } else if l0 != l1 {
                        return Err(InvariantError::UnmarkedInterface(e.a(), e.b()));
                    }
                }
                n => return Err(InvariantError::BadIncidence(e.a(), e.b(), n)),
            }
        }
        for e in self.boundary_edges.keys() {
            if incidence.get(e).map(|v| v.len()) != Some(1) {
                return Err(InvariantError::FalseBoundary(e.a(), e.b()));
            }
        }
        for e in &self.interface_edges {
            if incidence.get(e).map(|v| v.len()) != Some(2) {
                return Err(InvariantError::BadInterface(e.a(), e.b()));
            }
        }

        let mut interface_degree: BTreeMap<VertexId, usize> = BTreeMap::new();
        for e in &self.interface_edges {
            *interface_degree.entry(e.a()).or_insert(0) += 1;
            *interface_degree.entry(e.b()).or_insert(0) += 1;
        }
        for (v, d) in interface_degree {
            if d != 2 {
                return Err(InvariantError::OpenInterface(v, d));
            }
        }

        let chi = nv as i64 - incidence.len() as i64 + self.triangles.len() as i64;
        if chi != 1 {
            return Err(InvariantError::EulerCharacteristic(chi));
        }
        Ok(())
    }
}

/// Two triangles sharing a diagonal: unit square split along (0, 2).
#[cfg(test)]
pub(crate) fn two_tri_square() -> Mesh {
    let mut m = Mesh {
        vertices: vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
        triangles: vec![
            Tri { v: [0, 1, 2], label: Subdomain::Fluid },
            Tri { v: [0, 2, 3], label: Subdomain::Fluid },
        ],
        interface_edges: BTreeSet::new(),
        boundary_edges: BTreeMap::new(),
        generation: 0,
    };
    m.boundary_edges.insert(EdgeKey::new(0, 1), BoundaryTag::Bottom);
    m.boundary_edges.insert(EdgeKey::new(1, 2), BoundaryTag::LateralTop);
    m.boundary_edges.insert(EdgeKey::new(2, 3), BoundaryTag::LateralTop);
    m.boundary_edges.insert(EdgeKey::new(3, 0), BoundaryTag::LateralTop);
    m
}
