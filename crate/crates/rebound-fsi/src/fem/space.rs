//! Function spaces: degree-of-freedom numbering over a mesh.
//!
//! A space is P1 or P2 Lagrange with `ncomp` interleaved components, over
//! the whole mesh or restricted to one subdomain.  Restricted spaces own
//! nodes only where their cells touch, which places pressure unknowns on
//! fluid cells including the interface ring.  Numbering is deterministic:
//! active vertices in index order first, then (for P2) active edges in
//! sorted key order.

use std::collections::{BTreeMap, BTreeSet};

use crate::geometry::{midpoint, Point};
use crate::mesh::{BoundaryTag, EdgeKey, Mesh, Subdomain};

/// Polynomial degree of a space.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ElementKind {
    P1,
    P2,
}

/// Which cells carry the space.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpaceDomain {
    All,
    Only(Subdomain),
}

/// Scalar-node numbering plus component interleaving for one field.
///
/// Dof `node * ncomp + comp` holds component `comp` at node `node`.
pub struct FunctionSpace {
    pub kind: ElementKind,
    pub ncomp: usize,
    pub domain: SpaceDomain,
    nnodes: usize,
    node_pos: Vec<Point>,
    vertex_node: Vec<Option<usize>>,
    edge_node: BTreeMap<EdgeKey, usize>,
    cell_nodes: Vec<Option<[usize; 6]>>,
}

impl FunctionSpace {
    pub fn new(mesh: &Mesh, kind: ElementKind, ncomp: usize, domain: SpaceDomain) -> Self {
        assert!(ncomp >= 1);
        let active = |label: Subdomain| match domain {
            SpaceDomain::All => true,
            SpaceDomain::Only(s) => label == s,
        };

        let mut vertex_active = vec![false; mesh.vertices.len()];
        let mut edges = BTreeSet::new();
        for t in &mesh.triangles {
            if !active(t.label) {
                continue;
            }
            for v in t.v {
                vertex_active[v] = true;
            }
            if kind == ElementKind::P2 {
                edges.extend(t.edges());
            }
        }

        let mut vertex_node = vec![None; mesh.vertices.len()];
        let mut node_pos = Vec::new();
        for (v, &on) in vertex_active.iter().enumerate() {
            if on {
                vertex_node[v] = Some(node_pos.len());
                node_pos.push(mesh.vertices[v]);
            }
        }
        let mut edge_node = BTreeMap::new();
        for e in edges {
            edge_node.insert(e, node_pos.len());
            node_pos.push(midpoint(mesh.vertices[e.a()], mesh.vertices[e.b()]));
        }

        let cell_nodes = mesh
            .triangles
            .iter()
            .map(|t| {
                if !active(t.label) {
                    return None;
                }
                let mut n = [usize::MAX; 6];
                for k in 0..3 {
                    n[k] = vertex_node[t.v[k]].unwrap();
                }
                if kind == ElementKind::P2 {
                    for (k, e) in t.edges().into_iter().enumerate() {
                        n[3 + k] = edge_node[&e];
                    }
                }
                Some(n)
            })
            .collect();

        Self {
            kind,
            ncomp,
            domain,
            nnodes: node_pos.len(),
            node_pos,
            vertex_node,
            edge_node,
            cell_nodes,
        }
    }

    pub fn nnodes(&self) -> usize {
        self.nnodes
    }

    pub fn ndofs(&self) -> usize {
        self.nnodes * self.ncomp
    }

    pub fn nodes_per_cell(&self) -> usize {
        match self.kind {
            ElementKind::P1 => 3,
            ElementKind::P2 => 6,
        }
    }

    /// Scalar node indices of one cell in local order, or `None` when the
    /// cell lies outside the space domain.
    pub fn cell_nodes(&self, cell: usize) -> Option<&[usize]> {
        self.cell_nodes[cell]
            .as_ref()
            .map(|n| &n[..self.nodes_per_cell()])
    }

    pub fn node_pos(&self, node: usize) -> Point {
        self.node_pos[node]
    }

    pub fn dof(&self, node: usize, comp: usize) -> usize {
        debug_assert!(comp < self.ncomp);
        node * self.ncomp + comp
    }

    pub fn vertex_node(&self, v: usize) -> Option<usize> {
        self.vertex_node[v]
    }

    pub fn edge_node(&self, e: EdgeKey) -> Option<usize> {
        self.edge_node.get(&e).copied()
    }

    /// Nodes lying on the given edges: both endpoints, plus midpoints for
    /// P2.  Sorted and deduplicated.
    pub fn nodes_on_edges<'a>(
        &self,
        edges: impl IntoIterator<Item = &'a EdgeKey>,
    ) -> Vec<usize> {
        let mut out = BTreeSet::new();
        for e in edges {
            for v in [e.a(), e.b()] {
                if let Some(n) = self.vertex_node[v] {
                    out.insert(n);
                }
            }
            if let Some(&n) = self.edge_node.get(e) {
                out.insert(n);
            }
        }
        out.into_iter().collect()
    }

    /// Nodes on the fluid-solid interface.
    pub fn interface_nodes(&self, mesh: &Mesh) -> Vec<usize> {
        self.nodes_on_edges(mesh.interface_edges.iter())
    }

    /// Nodes on the outer boundary, optionally restricted to one tag.
    pub fn boundary_nodes(&self, mesh: &Mesh, tag: Option<BoundaryTag>) -> Vec<usize> {
        self.nodes_on_edges(
            mesh.boundary_edges
                .iter()
                .filter(|(_, t)| tag.is_none_or(|want| **t == want))
                .map(|(e, _)| e),
        )
    }

    /// Fills `out` nodewise from a function of position.  `out` has `ndofs`
    /// entries; `f` writes the `ncomp` components of one node.
    pub fn fill_nodal(&self, out: &mut [f64], mut f: impl FnMut(Point, &mut [f64])) {
        assert_eq!(out.len(), self.ndofs());
        for n in 0..self.nnodes {
            let d = self.dof(n, 0);
            f(self.node_pos[n], &mut out[d..d + self.ncomp]);
        }
    }
}

/// Offsets of several concatenated fields in one global unknown vector.
#[derive(Clone, Debug)]
pub struct SystemLayout {
    offsets: Vec<usize>,
    total: usize,
}

impl SystemLayout {
    pub fn new(sizes: &[usize]) -> Self {
        let mut offsets = Vec::with_capacity(sizes.len());
        let mut total = 0;
        for &s in sizes {
            offsets.push(total);
            total += s;
        }
        Self { offsets, total }
    }

    pub fn offset(&self, field: usize) -> usize {
        self.offsets[field]
    }

    pub fn ndofs(&self) -> usize {
        self.total
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::two_tri_square;

    #[test]
    fn p2_space_counts_vertices_and_edges() {
        let mesh = two_tri_square();
        let s = FunctionSpace::new(&mesh, ElementKind::P2, 2, SpaceDomain::All);
        // 4 vertices + 5 edges.
        assert_eq!(s.nnodes(), 9);
        assert_eq!(s.ndofs(), 18);
        assert_eq!(s.cell_nodes(0).unwrap().len(), 6);
        // Vertex nodes come first in vertex order.
        for v in 0..4 {
            assert_eq!(s.vertex_node(v), Some(v));
        }
        // Midpoint positions are edge midpoints.
        let n = s.edge_node(EdgeKey::new(0, 2)).unwrap();
        assert_eq!(s.node_pos(n), [0.5, 0.5]);
    }

    #[test]
    fn restricted_space_covers_only_matching_cells() {
        let mut mesh = two_tri_square();
        mesh.triangles[0].label = Subdomain::Solid;
        mesh.interface_edges.insert(EdgeKey::new(0, 2));
        let s = FunctionSpace::new(&mesh, ElementKind::P1, 1, SpaceDomain::Only(Subdomain::Solid));
        // Solid cell (0,1,2): vertex 3 is not covered.
        assert_eq!(s.nnodes(), 3);
        assert!(s.cell_nodes(1).is_none());
        assert!(s.vertex_node(3).is_none());
        // Interface nodes are shared: the fluid-restricted space sees them too.
        let f = FunctionSpace::new(&mesh, ElementKind::P1, 1, SpaceDomain::Only(Subdomain::Fluid));
        assert_eq!(f.interface_nodes(&mesh).len(), 2);
    }

    #[test]
    fn boundary_node_selection_by_tag() {
        let mesh = two_tri_square();
        let s = FunctionSpace::new(&mesh, ElementKind::P2, 1, SpaceDomain::All);
        let bottom = s.boundary_nodes(&mesh, Some(BoundaryTag::Bottom));
        // Bottom edge (0,1): two endpoints plus one midpoint.
        assert_eq!(bottom.len(), 3);
        let all = s.boundary_nodes(&mesh, None);
        // All 4 boundary edges: 4 vertices + 4 midpoints.
        assert_eq!(all.len(), 8);
    }

    #[test]
    fn fill_nodal_writes_components_interleaved() {
        let mesh = two_tri_square();
        let s = FunctionSpace::new(&mesh, ElementKind::P1, 2, SpaceDomain::All);
        let mut v = vec![0.0; s.ndofs()];
        s.fill_nodal(&mut v, |p, out| {
            out[0] = p[0];
            out[1] = -p[1];
        });
        for n in 0..s.nnodes() {
            let p = s.node_pos(n);
            assert_eq!(v[s.dof(n, 0)], p[0]);
            assert_eq!(v[s.dof(n, 1)], -p[1]);
        }
    }

    #[test]
    fn layout_concatenates_fields() {
        let l = SystemLayout::new(&[10, 4, 7]);
        assert_eq!(l.offset(0), 0);
        assert_eq!(l.offset(1), 10);
        assert_eq!(l.offset(2), 14);
        assert_eq!(l.ndofs(), 21);
    }
}
