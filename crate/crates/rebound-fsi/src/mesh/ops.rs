//! Local mesh editing: edge flip, edge collapse, edge split, vertex move.
//!
//! All four operations are transactional: they either apply fully and leave
//! the mesh valid, or reject without mutating anything. Constrained entities
//! (interface polyline, outer boundary) are never moved or coarsened; the
//! only allowed refinement of them is midpoint insertion on their own
//! segments, which preserves the polyline geometry exactly.

use std::collections::{BTreeMap, BTreeSet};

use crate::geometry::{centroid, dist, midpoint, signed_area, Point};
use crate::mesh::quality::triangle_quality;
use crate::mesh::{BoundaryTag, EdgeKey, Mesh, Tri, VertexConstraint, VertexId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum OpReject {
    #[error("edge not present in the mesh")]
    UnknownEdge,
    #[error("operation would modify the interface polyline")]
    Interface,
    #[error("operation would modify the outer boundary")]
    Boundary,
    #[error("flip quadrilateral is not strictly convex")]
    Nonconvex,
    #[error("triangles across the edge belong to different subdomains")]
    SubdomainMismatch,
    #[error("operation would invert a triangle")]
    Inversion,
    #[error("operation would break local manifold topology")]
    Topology,
    #[error("vertex is pinned to the interface or boundary")]
    Constrained,
    #[error("move does not strictly improve local quality")]
    NoImprovement,
}

/// Incremental editing session over a mesh. Keeps edge-to-triangle and
/// vertex-to-triangle adjacency up to date across operations so adaptation
/// sweeps stay near linear time. Deterministic: all iteration is over
/// ordered maps and slot reuse follows a stack discipline.
pub struct MeshEditor {
    verts: Vec<Point>,
    vert_alive: Vec<bool>,
    constraint: Vec<VertexConstraint>,
    tris: Vec<Option<Tri>>,
    free_slots: Vec<usize>,
    edge_tris: BTreeMap<EdgeKey, Vec<usize>>,
    vert_tris: Vec<Vec<usize>>,
    interface: BTreeSet<EdgeKey>,
    boundary: BTreeMap<EdgeKey, BoundaryTag>,
    generation: u32,
}

impl MeshEditor {
    pub fn from_mesh(mesh: &Mesh) -> Self {
        let mut ed = MeshEditor {
            verts: mesh.vertices.clone(),
            vert_alive: vec![true; mesh.vertices.len()],
            constraint: mesh.vertex_constraints(),
            tris: Vec::with_capacity(mesh.triangles.len()),
            free_slots: Vec::new(),
            edge_tris: BTreeMap::new(),
            vert_tris: vec![Vec::new(); mesh.vertices.len()],
            interface: mesh.interface_edges.clone(),
            boundary: mesh.boundary_edges.clone(),
            generation: mesh.generation,
        };
        for t in &mesh.triangles {
            ed.add_tri(*t);
        }
        ed
    }

    /// Compact the editor state back into a plain mesh. Dead vertices and
    /// triangle slots are dropped; indices are remapped in ascending order.
    pub fn into_mesh(self) -> Mesh {
        let mut vmap = vec![usize::MAX; self.verts.len()];
        let mut vertices = Vec::new();
        for (i, p) in self.verts.iter().enumerate() {
            if self.vert_alive[i] {
                vmap[i] = vertices.len();
                vertices.push(*p);
            }
        }
        let remap_tri = |t: &Tri| Tri {
            v: [vmap[t.v[0]], vmap[t.v[1]], vmap[t.v[2]]],
            label: t.label,
        };
        let triangles: Vec<Tri> = self.tris.iter().flatten().map(remap_tri).collect();
        let interface_edges = self
            .interface
            .iter()
            .map(|e| EdgeKey::new(vmap[e.a()], vmap[e.b()]))
            .collect();
        let boundary_edges = self
            .boundary
            .iter()
            .map(|(e, t)| (EdgeKey::new(vmap[e.a()], vmap[e.b()]), *t))
            .collect();
        Mesh {
            vertices,
            triangles,
            interface_edges,
            boundary_edges,
            generation: self.generation,
        }
    }

    #[inline]
    pub fn vertex(&self, v: VertexId) -> Point {
        self.verts[v]
    }

    #[inline]
    pub fn vertex_count_alive(&self) -> usize {
        self.vert_alive.iter().filter(|a| **a).count()
    }

    #[inline]
    pub fn tri_count_alive(&self) -> usize {
        self.tris.iter().flatten().count()
    }

    pub fn constraint(&self, v: VertexId) -> VertexConstraint {
        self.constraint[v]
    }

    pub fn edge_exists(&self, e: EdgeKey) -> bool {
        self.edge_tris.contains_key(&e)
    }

    pub fn edge_length(&self, e: EdgeKey) -> f64 {
        dist(self.verts[e.a()], self.verts[e.b()])
    }

    pub fn is_interface(&self, e: EdgeKey) -> bool {
        self.interface.contains(&e)
    }

    pub fn is_boundary(&self, e: EdgeKey) -> bool {
        self.boundary.contains_key(&e)
    }

    /// Snapshot of all current edges in sorted order.
    pub fn edges_sorted(&self) -> Vec<EdgeKey> {
        self.edge_tris.keys().copied().collect()
    }

    /// Snapshot of alive triangle slots in ascending order.
    pub fn tri_slots(&self) -> Vec<usize> {
        self.tris
            .iter()
            .enumerate()
            .filter_map(|(i, t)| t.as_ref().map(|_| i))
            .collect()
    }

    pub fn tri(&self, slot: usize) -> Option<&Tri> {
        self.tris.get(slot).and_then(|t| t.as_ref())
    }

    pub fn tri_points(&self, t: &Tri) -> [Point; 3] {
        [self.verts[t.v[0]], self.verts[t.v[1]], self.verts[t.v[2]]]
    }

    pub fn tri_quality_of(&self, t: &Tri) -> f64 {
        let [a, b, c] = self.tri_points(t);
        triangle_quality(a, b, c)
    }

    pub fn min_quality(&self) -> f64 {
        let mut q = f64::INFINITY;
        let mut any = false;
        for t in self.tris.iter().flatten() {
            q = q.min(self.tri_quality_of(t));
            any = true;
        }
        if any {
            q
        } else {
            0.0
        }
    }

    fn add_tri(&mut self, t: Tri) -> usize {
        let slot = match self.free_slots.pop() {
            Some(s) => {
                self.tris[s] = Some(t);
                s
            }
            None => {
                self.tris.push(Some(t));
                self.tris.len() - 1
            }
        };
        for e in t.edges() {
            self.edge_tris.entry(e).or_default().push(slot);
        }
        for v in t.v {
            self.vert_tris[v].push(slot);
        }
        slot
    }

    fn delete_tri(&mut self, slot: usize) {
        let t = self.tris[slot].take().expect("deleting a dead triangle slot");
        for e in t.edges() {
            let entry = self.edge_tris.get_mut(&e).expect("edge map out of sync");
            entry.retain(|&s| s != slot);
            if entry.is_empty() {
                self.edge_tris.remove(&e);
            }
        }
        for v in t.v {
            self.vert_tris[v].retain(|&s| s != slot);
        }
        self.free_slots.push(slot);
    }

    fn new_vertex(&mut self, p: Point, c: VertexConstraint) -> VertexId {
        self.verts.push(p);
        self.vert_alive.push(true);
        self.constraint.push(c);
        self.vert_tris.push(Vec::new());
        self.verts.len() - 1
    }

    /// Directed occurrence of edge `e` in triangle `t`: returns (u, w, x)
    /// such that (u, w) traverses `e` in the triangle's orientation and `x`
    /// is the opposite vertex.
    fn directed_in(&self, t: &Tri, e: EdgeKey) -> (VertexId, VertexId, VertexId) {
        for i in 0..3 {
            let u = t.v[i];
            let w = t.v[(i + 1) % 3];
            if EdgeKey::new(u, w) == e {
                return (u, w, t.v[(i + 2) % 3]);
            }
        }
        unreachable!("edge not in triangle");
    }

    /// Alive vertex ids in ascending order.
    pub fn vertices_alive_sorted(&self) -> Vec<VertexId> {
        self.vert_alive
            .iter()
            .enumerate()
            .filter_map(|(v, a)| a.then_some(v))
            .collect()
    }

    /// Quality of a flip without mutating: returns (min quality of the two
    /// current triangles, min quality after the flip), or None when the flip
    /// would be rejected.
    pub fn flip_preview(&self, e: EdgeKey) -> Option<(f64, f64)> {
        let incident = self.edge_tris.get(&e)?;
        if incident.len() != 2 || self.boundary.contains_key(&e) || self.interface.contains(&e) {
            return None;
        }
        let t1 = self.tris[incident[0]].expect("slot alive");
        let t2 = self.tris[incident[1]].expect("slot alive");
        if t1.label != t2.label {
            return None;
        }
        let (u, w, c) = self.directed_in(&t1, e);
        let (_, _, d) = self.directed_in(&t2, e);
        let (pu, pw, pc, pd) = (self.verts[u], self.verts[w], self.verts[c], self.verts[d]);
        if !(signed_area(pu, pd, pc) > 0.0) || !(signed_area(pw, pc, pd) > 0.0) {
            return None;
        }
        if self.edge_tris.contains_key(&EdgeKey::new(c, d)) {
            return None;
        }
        let before = self.tri_quality_of(&t1).min(self.tri_quality_of(&t2));
        let after = triangle_quality(pu, pd, pc).min(triangle_quality(pw, pc, pd));
        Some((before, after))
    }

    /// Replace the diagonal of the quadrilateral formed by the two triangles
    /// incident on `e`. Rejected for interface, boundary, or mixed-subdomain
    /// edges, and when the quadrilateral is not strictly convex.
    pub fn edge_flip(&mut self, e: EdgeKey) -> Result<(), OpReject> {
        let incident = self.edge_tris.get(&e).ok_or(OpReject::UnknownEdge)?.clone();
        if self.boundary.contains_key(&e) || incident.len() < 2 {
            return Err(OpReject::Boundary);
        }
        if self.interface.contains(&e) {
            return Err(OpReject::Interface);
        }
        let (s1, s2) = (incident[0], incident[1]);
        let t1 = self.tris[s1].expect("slot alive");
        let t2 = self.tris[s2].expect("slot alive");
        if t1.label != t2.label {
            return Err(OpReject::SubdomainMismatch);
        }
        let (u, w, c) = self.directed_in(&t1, e);
        let (_, _, d) = self.directed_in(&t2, e);
        let (pu, pw, pc, pd) = (self.verts[u], self.verts[w], self.verts[c], self.verts[d]);
        // New triangles (u, d, c) and (w, c, d); both must be strictly CCW,
        // which is exactly strict convexity of the quadrilateral u-d-w-c.
        if !(signed_area(pu, pd, pc) > 0.0) || !(signed_area(pw, pc, pd) > 0.0) {
            return Err(OpReject::Nonconvex);
        }
        if self.edge_tris.contains_key(&EdgeKey::new(c, d)) {
            // The replacement diagonal already exists elsewhere; flipping
            // would create a doubled edge. Unreachable on embedded meshes,
            // kept as a defensive topology guard.
            return Err(OpReject::Nonconvex);
        }
        let label = t1.label;
        self.delete_tri(s1);
        self.delete_tri(s2);
        self.add_tri(Tri { v: [u, d, c], label });
        self.add_tri(Tri { v: [w, c, d], label });
        Ok(())
    }

    /// Vertices adjacent to `v` through alive triangles.
    pub fn link_vertices(&self, v: VertexId) -> BTreeSet<VertexId> {
        let mut s = BTreeSet::new();
        for &slot in &self.vert_tris[v] {
            for w in self.tris[slot].expect("slot alive").v {
                if w != v {
                    s.insert(w);
                }
            }
        }
        s
    }

    /// Point the endpoints of `e` would merge at if collapsed, or None when
    /// the constraint rules alone already forbid the collapse.
    pub fn collapse_target(&self, e: EdgeKey) -> Option<Point> {
        if !self.edge_tris.contains_key(&e)
            || self.boundary.contains_key(&e)
            || self.interface.contains(&e)
        {
            return None;
        }
        let (a, b) = (e.a(), e.b());
        match (self.constraint[a], self.constraint[b]) {
            (VertexConstraint::Free, VertexConstraint::Free) => {
                Some(midpoint(self.verts[a], self.verts[b]))
            }
            (VertexConstraint::Free, _) => Some(self.verts[b]),
            (_, VertexConstraint::Free) => Some(self.verts[a]),
            _ => None,
        }
    }

    /// Insert the midpoint of `e`, splitting each incident triangle in two.
    /// Children inherit subdomain labels; interface/boundary registrations
    /// are replaced by the two halves. The only rejection is an unknown edge.
    pub fn edge_split(&mut self, e: EdgeKey) -> Result<VertexId, OpReject> {
        let incident = self.edge_tris.get(&e).ok_or(OpReject::UnknownEdge)?.clone();
        let (a, b) = (e.a(), e.b());
        let mconstraint = if self.interface.contains(&e) {
            VertexConstraint::Interface
        } else if self.boundary.contains_key(&e) {
            VertexConstraint::Boundary
        } else {
            VertexConstraint::Free
        };
        let m = self.new_vertex(midpoint(self.verts[a], self.verts[b]), mconstraint);
        for slot in incident {
            let t = self.tris[slot].expect("slot alive");
            let (u, w, x) = self.directed_in(&t, e);
            self.delete_tri(slot);
            self.add_tri(Tri { v: [u, m, x], label: t.label });
            self.add_tri(Tri { v: [m, w, x], label: t.label });
        }
        if self.interface.remove(&e) {
            self.interface.insert(EdgeKey::new(a, m));
            self.interface.insert(EdgeKey::new(m, b));
        }
        if let Some(tag) = self.boundary.remove(&e) {
            self.boundary.insert(EdgeKey::new(a, m), tag);
            self.boundary.insert(EdgeKey::new(m, b), tag);
        }
        Ok(m)
    }

    /// Local quality change of a collapse without mutating: returns
    /// (min star quality before, min surviving star quality after), or None
    /// when constraint rules alone forbid the collapse. Topology and
    /// inversion rejections still surface only from [`Self::edge_collapse`].
    pub fn collapse_preview(&self, e: EdgeKey) -> Option<(f64, f64)> {
        let target = self.collapse_target(e)?;
        let incident = self.edge_tris.get(&e)?.clone();
        let (a, b) = (e.a(), e.b());
        let mut before = f64::INFINITY;
        let mut after = f64::INFINITY;
        let mut seen = BTreeSet::new();
        for &slot in self.vert_tris[a].iter().chain(self.vert_tris[b].iter()) {
            if !seen.insert(slot) {
                continue;
            }
            let t = self.tris[slot].expect("slot alive");
            let [p0, p1, p2] = self.tri_points(&t);
            before = before.min(triangle_quality(p0, p1, p2));
            if incident.contains(&slot) {
                continue;
            }
            let q: Vec<Point> = t
                .v
                .iter()
                .map(|&v| if v == a || v == b { target } else { self.verts[v] })
                .collect();
            after = after.min(triangle_quality(q[0], q[1], q[2]));
        }
        Some((before, after))
    }

    /// Contract `e` into a single vertex. Free–free pairs merge at the edge
    /// midpoint; a pair with one pinned endpoint keeps the pinned vertex in
    /// place; pairs with two pinned endpoints are rejected. The link
    /// condition guards manifoldness and an explicit orientation check
    /// guards against inverting any surviving star triangle.
    pub fn edge_collapse(&mut self, e: EdgeKey) -> Result<(), OpReject> {
        let incident = self.edge_tris.get(&e).ok_or(OpReject::UnknownEdge)?.clone();
        if self.boundary.contains_key(&e) || incident.len() < 2 {
            return Err(OpReject::Boundary);
        }
        if self.interface.contains(&e) {
            return Err(OpReject::Interface);
        }
        let (a, b) = (e.a(), e.b());

        // Link condition: the common neighbors of a and b must be exactly
        // the vertices opposite the collapsing edge.
        let mut opposite = BTreeSet::new();
        for &slot in &incident {
            let t = self.tris[slot].expect("slot alive");
            let (_, _, x) = self.directed_in(&t, e);
            opposite.insert(x);
        }
        if opposite.len() != incident.len() {
            return Err(OpReject::Topology);
        }
        let link = |v: VertexId| -> BTreeSet<VertexId> {
            let mut s = BTreeSet::new();
            for &slot in &self.vert_tris[v] {
                for w in self.tris[slot].expect("slot alive").v {
                    if w != v {
                        s.insert(w);
                    }
                }
            }
            s
        };
        let common: BTreeSet<VertexId> = link(a).intersection(&link(b)).copied().collect();
        if common != opposite {
            return Err(OpReject::Topology);
        }

        let (ca, cb) = (self.constraint[a], self.constraint[b]);
        let (kept, dead, target): (VertexId, VertexId, Point) = match (ca, cb) {
            (VertexConstraint::Free, VertexConstraint::Free) => {
                (a, b, midpoint(self.verts[a], self.verts[b]))
            }
            (VertexConstraint::Free, _) => (b, a, self.verts[b]),
            (_, VertexConstraint::Free) => (a, b, self.verts[a]),
            _ if ca == VertexConstraint::Interface || cb == VertexConstraint::Interface => {
                return Err(OpReject::Interface)
            }
            _ => return Err(OpReject::Boundary),
        };

        // Orientation precheck on every surviving triangle of both stars.
        let survives = |slot: usize| !incident.contains(&slot);
        let mut touched: Vec<usize> = self.vert_tris[a]
            .iter()
            .chain(self.vert_tris[b].iter())
            .copied()
            .filter(|s| survives(*s))
            .collect();
        touched.sort_unstable();
        touched.dedup();
        for &slot in &touched {
            let t = self.tris[slot].expect("slot alive");
            let p: Vec<Point> = t
                .v
                .iter()
                .map(|&v| if v == kept || v == dead { target } else { self.verts[v] })
                .collect();
            if !(signed_area(p[0], p[1], p[2]) > 0.0) {
                return Err(OpReject::Inversion);
            }
        }

        // Apply: move the kept vertex, rewrite the dead vertex's star.
        self.verts[kept] = target;
        let mut star_dead = self.vert_tris[dead].clone();
        star_dead.sort_unstable();
        for slot in star_dead {
            let mut t = self.tris[slot].expect("slot alive");
            self.delete_tri(slot);
            if incident.contains(&slot) {
                continue;
            }
            for v in t.v.iter_mut() {
                if *v == dead {
                    *v = kept;
                }
            }
            self.add_tri(t);
        }
        self.vert_alive[dead] = false;
        Ok(())
    }

    /// Move a free vertex to the area-weighted centroid of its incident
    /// triangles, accepting only strict improvement of the star's minimum
    /// quality.
    pub fn vertex_move(&mut self, v: VertexId) -> Result<(), OpReject> {
        if v >= self.verts.len() || !self.vert_alive[v] {
            return Err(OpReject::UnknownEdge);
        }
        if self.constraint[v] != VertexConstraint::Free {
            return Err(OpReject::Constrained);
        }
        let star = self.vert_tris[v].clone();
        let mut num = [0.0, 0.0];
        let mut den = 0.0;
        let mut q_before = f64::INFINITY;
        for &slot in &star {
            let t = self.tris[slot].expect("slot alive");
            let [p0, p1, p2] = self.tri_points(&t);
            let area = signed_area(p0, p1, p2);
            let c = centroid(p0, p1, p2);
            num[0] += area * c[0];
            num[1] += area * c[1];
            den += area;
            q_before = q_before.min(triangle_quality(p0, p1, p2));
        }
        if !(den > 0.0) {
            return Err(OpReject::NoImprovement);
        }
        let candidate = [num[0] / den, num[1] / den];
        let old = self.verts[v];
        // Damped line search toward the candidate: the full step can
        // overshoot in anisotropic stars, shorter steps often still improve.
        for damping in [1.0, 0.5, 0.25] {
            self.verts[v] = [
                old[0] + damping * (candidate[0] - old[0]),
                old[1] + damping * (candidate[1] - old[1]),
            ];
            let mut q_after = f64::INFINITY;
            for &slot in &star {
                let t = self.tris[slot].expect("slot alive");
                let [p0, p1, p2] = self.tri_points(&t);
                q_after = q_after.min(triangle_quality(p0, p1, p2));
            }
            if q_after > q_before {
                return Ok(());
            }
        }
        self.verts[v] = old;
        Err(OpReject::NoImprovement)
    }
}

/// One-shot wrappers that edit a `Mesh` in place. Adaptation sweeps should
/// use a single [`MeshEditor`] session instead.
pub fn edge_flip(mesh: &mut Mesh, e: EdgeKey) -> Result<(), OpReject> {
    let mut ed = MeshEditor::from_mesh(mesh);
    ed.edge_flip(e)?;
    *mesh = ed.into_mesh();
    Ok(())
}

pub fn edge_split(mesh: &mut Mesh, e: EdgeKey) -> Result<VertexId, OpReject> {
    let mut ed = MeshEditor::from_mesh(mesh);
    let m = ed.edge_split(e)?;
    let out = ed.into_mesh();
    // Split never deletes vertices, so ids are stable and `m` is the last.
    *mesh = out;
    Ok(m)
}

pub fn edge_collapse(mesh: &mut Mesh, e: EdgeKey) -> Result<(), OpReject> {
    let mut ed = MeshEditor::from_mesh(mesh);
    ed.edge_collapse(e)?;
    *mesh = ed.into_mesh();
    Ok(())
}

pub fn vertex_move(mesh: &mut Mesh, v: VertexId) -> Result<(), OpReject> {
    let mut ed = MeshEditor::from_mesh(mesh);
    ed.vertex_move(v)?;
    *mesh = ed.into_mesh();
    Ok(())
}
