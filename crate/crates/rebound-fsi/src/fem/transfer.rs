//! Field transfer between meshes via point location and interpolation.
//!
//! After a re-mesh every nodal field of the new mesh is sampled from the
//! old one.  A uniform bucket grid accelerates the point-in-triangle
//! search; points that fall marginally outside (curved interface replaced
//! by new chords) snap to the nearest candidate cell with clamped
//! barycentric coordinates.

use crate::geometry::{signed_area, Point};
use crate::mesh::Mesh;

use super::basis::{p1_values, p2_values};
use super::space::{ElementKind, FunctionSpace};

/// Accepts barycentric coordinates this far below zero as an on-cell hit.
const BARY_SNAP: f64 = 1e-9;

/// Uniform-grid accelerated point location over one mesh.
pub struct MeshLocator {
    cells: Vec<[Point; 3]>,
    lo: Point,
    cell: f64,
    nx: usize,
    ny: usize,
    buckets: Vec<Vec<u32>>,
}

impl MeshLocator {
    pub fn new(mesh: &Mesh) -> Self {
        assert!(!mesh.triangles.is_empty());
        let cells: Vec<[Point; 3]> = (0..mesh.triangles.len())
            .map(|t| mesh.tri_points(&mesh.triangles[t]))
            .collect();

        let (mut lo, mut hi) = ([f64::MAX; 2], [f64::MIN; 2]);
        for p in &mesh.vertices {
            for k in 0..2 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        let extent = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1e-12);
        // Target a few triangles per bucket: mean diameter ~ sqrt(2 * area).
        let mean_area: f64 =
            cells.iter().map(|c| signed_area(c[0], c[1], c[2]).abs()).sum::<f64>()
                / cells.len() as f64;
        let cell = (2.0 * mean_area).sqrt().max(extent / 512.0);
        let nx = ((hi[0] - lo[0]) / cell).ceil().max(1.0) as usize;
        let ny = ((hi[1] - lo[1]) / cell).ceil().max(1.0) as usize;

        let mut buckets = vec![Vec::new(); nx * ny];
        let clamp = |v: f64, n: usize| (v.max(0.0) as usize).min(n - 1);
        for (t, pts) in cells.iter().enumerate() {
            let xs = pts.map(|p| p[0]);
            let ys = pts.map(|p| p[1]);
            let i0 = clamp((xs.iter().copied().fold(f64::MAX, f64::min) - lo[0]) / cell, nx);
            let i1 = clamp((xs.iter().copied().fold(f64::MIN, f64::max) - lo[0]) / cell, nx);
            let j0 = clamp((ys.iter().copied().fold(f64::MAX, f64::min) - lo[1]) / cell, ny);
            let j1 = clamp((ys.iter().copied().fold(f64::MIN, f64::max) - lo[1]) / cell, ny);
            for j in j0..=j1 {
                for i in i0..=i1 {
                    buckets[j * nx + i].push(t as u32);
                }
            }
        }
        Self { cells, lo, cell, nx, ny, buckets }
    }

    fn bary(&self, t: usize, p: Point) -> [f64; 3] {
        let [a, b, c] = self.cells[t];
        let area = signed_area(a, b, c);
        [
            signed_area(p, b, c) / area,
            signed_area(a, p, c) / area,
            signed_area(a, b, p) / area,
        ]
    }

    /// Containing cell and barycentric coordinates of `p`, restricted to
    /// cells accepted by `keep`.  Falls back to the accepted cell whose
    /// coordinates violate positivity least; `None` if `keep` rejects all
    /// reachable cells.
    pub fn locate_filtered(
        &self,
        p: Point,
        keep: impl Fn(usize) -> bool,
    ) -> Option<(usize, [f64; 3])> {
        let gx =
            (((p[0] - self.lo[0]) / self.cell).floor().max(0.0) as usize).min(self.nx - 1);
        let gy =
            (((p[1] - self.lo[1]) / self.cell).floor().max(0.0) as usize).min(self.ny - 1);

        let mut best: Option<(usize, [f64; 3], f64)> = None;
        let max_ring = self.nx.max(self.ny);
        for ring in 0..=max_ring {
            let mut visited_any = false;
            for (i, j) in ring_cells(gx, gy, ring, self.nx, self.ny) {
                visited_any = true;
                for &t in &self.buckets[j * self.nx + i] {
                    let t = t as usize;
                    if !keep(t) {
                        continue;
                    }
                    let b = self.bary(t, p);
                    let minb = b[0].min(b[1]).min(b[2]);
                    if best.as_ref().is_none_or(|(_, _, m)| minb > *m) {
                        best = Some((t, b, minb));
                    }
                }
            }
            if let Some((_, _, m)) = best {
                if m >= -BARY_SNAP {
                    break;
                }
            }
            // Grid exhausted on all sides.
            if !visited_any && ring > 0 {
                break;
            }
        }
        best.map(|(t, mut b, _)| {
            // Clamp marginal negatives and renormalize.
            let mut s = 0.0;
            for v in &mut b {
                *v = v.max(0.0);
                s += *v;
            }
            for v in &mut b {
                *v /= s;
            }
            (t, b)
        })
    }

    /// Containing cell and barycentric coordinates of `p`.
    pub fn locate(&self, p: Point) -> (usize, [f64; 3]) {
        self.locate_filtered(p, |_| true).expect("non-empty mesh")
    }
}

/// Grid cells at Chebyshev distance `ring` from `(gx, gy)`, row-major order.
fn ring_cells(
    gx: usize,
    gy: usize,
    ring: usize,
    nx: usize,
    ny: usize,
) -> impl Iterator<Item = (usize, usize)> {
    let (gx, gy, r) = (gx as i64, gy as i64, ring as i64);
    (gy - r..=gy + r).flat_map(move |j| {
        (gx - r..=gx + r).filter_map(move |i| {
            let on_ring = (i - gx).abs() == r || (j - gy).abs() == r;
            if on_ring && i >= 0 && j >= 0 && (i as usize) < nx && (j as usize) < ny {
                Some((i as usize, j as usize))
            } else {
                None
            }
        })
    })
}

/// Evaluates the components of `field` at a barycentric point of `cell`.
pub fn eval_field(
    space: &FunctionSpace,
    field: &[f64],
    cell: usize,
    bary: &[f64; 3],
    out: &mut [f64],
) {
    let nodes = space.cell_nodes(cell).expect("cell outside space domain");
    out[..space.ncomp].fill(0.0);
    let mut vals = [0.0; 6];
    match space.kind {
        ElementKind::P1 => vals[..3].copy_from_slice(&p1_values(bary)),
        ElementKind::P2 => vals = p2_values(bary),
    }
    for (i, &node) in nodes.iter().enumerate() {
        for c in 0..space.ncomp {
            out[c] += field[space.dof(node, c)] * vals[i];
        }
    }
}

/// Interpolates `src_field` onto the nodes of `dst_space`.
///
/// Both spaces must have equal component counts.  Restricted spaces only
/// sample from cells inside the source domain, so a pressure field never
/// reads values across the interface.
pub fn transfer_nodal(
    src_space: &FunctionSpace,
    src_field: &[f64],
    locator: &MeshLocator,
    dst_space: &FunctionSpace,
    dst_field: &mut [f64],
) {
    assert_eq!(src_space.ncomp, dst_space.ncomp);
    assert_eq!(dst_field.len(), dst_space.ndofs());
    let mut out = vec![0.0; src_space.ncomp];
    for node in 0..dst_space.nnodes() {
        let p = dst_space.node_pos(node);
        let (cell, bary) = locator
            .locate_filtered(p, |t| src_space.cell_nodes(t).is_some())
            .expect("source space covers no cells");
        eval_field(src_space, src_field, cell, &bary, &mut out);
        for (c, &v) in out.iter().enumerate() {
            dst_field[dst_space.dof(node, c)] = v;
        }
    }
}
