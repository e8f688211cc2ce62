//! Adaptive re-meshing with conservative field rebasing.
//!
//! Mesh motion is an unknown: the displacement `u_c` deforms the last
//! repaired mesh virtually, and only when the deformed cells degrade below
//! a quality threshold does the solver rebase.  Rebasing folds `F_c` into
//! the stored gradient node by node, moves the vertices, repairs the moved
//! mesh, interpolates the fields onto the repaired one, and zeroes `u_c`.

use crate::distance::DistanceQuery;
use crate::fem::basis::{p2_ref_grads, P2_NODE_BARY};
use crate::fem::{eval_field, CellGeom, FunctionSpace, MeshLocator};
use crate::geometry::Point;
use crate::mesh::{adapt_mesh, AdaptReport, AdaptSettings, Mesh, RefinementStrategy, Subdomain};

use super::{AleSpaces, AleState};

/// Refinement driver selected by run configuration.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum StrategyKind {
    /// Quality-driven repair only; no size control.
    None,
    /// Quality-driven repair plus splits of badly shaped cells.
    Quality,
    /// Gap-driven sizing: target edge length grows with the summed
    /// distances to the interface and to the bottom wall, so the film
    /// between the disk and the wall always carries several cell layers.
    Eikonal,
}

/// Parameters of the gap-driven target edge length
/// `h(x) = clamp(alpha * (d_interface(x) + d_wall(x)), h_min, h_max)`.
#[derive(Clone, Copy, Debug)]
pub struct SizeParams {
    pub alpha: f64,
    pub h_min: f64,
    pub h_max: f64,
}

impl SizeParams {
    /// Defaults with `h_max` set to the mean edge length of `mesh`, so the
    /// far field never refines beyond the initial resolution.
    pub fn for_mesh(mesh: &Mesh) -> Self {
        SizeParams { alpha: 0.5, h_min: 1e-4, h_max: mean_edge_length(mesh) }
    }
}

/// Mean length over unique edges; the far-field sizing scale.
pub fn mean_edge_length(mesh: &Mesh) -> f64 {
    let mut sum = 0.0;
    let mut count = 0usize;
    for (e, _) in mesh.edge_incidence() {
        sum += crate::geometry::dist(mesh.vertices[e.a()], mesh.vertices[e.b()]);
        count += 1;
    }
    assert!(count > 0, "mesh has no edges");
    sum / count as f64
}

/// Pointwise target edge length from distances to the interface and the
/// bottom wall of one (typically displaced) mesh.
pub struct GapSizeField {
    interface: DistanceQuery,
    wall: DistanceQuery,
    params: SizeParams,
}

impl GapSizeField {
    pub fn new(mesh: &Mesh, params: SizeParams) -> Self {
        let seg = |a: usize, b: usize| [mesh.vertices[a], mesh.vertices[b]];
        let interface: Vec<[Point; 2]> =
            mesh.interface_edges.iter().map(|e| seg(e.a(), e.b())).collect();
        let wall: Vec<[Point; 2]> = mesh
            .boundary_edges
            .iter()
            .filter(|(_, &tag)| tag == crate::mesh::BoundaryTag::Bottom)
            .map(|(e, _)| seg(e.a(), e.b()))
            .collect();
        assert!(!interface.is_empty(), "mesh has no interface");
        assert!(!wall.is_empty(), "mesh has no bottom wall");
        Self {
            interface: DistanceQuery::new(interface),
            wall: DistanceQuery::new(wall),
            params,
        }
    }

    /// Target edge length at `p`.
    pub fn target(&self, p: Point) -> f64 {
        let e = self.interface.distance(p) + self.wall.distance(p);
        (self.params.alpha * e).clamp(self.params.h_min, self.params.h_max)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RemeshError {
    #[error("mesh adaptation stalled at quality {final_min_quality:.3e} (floor {floor:.3e})")]
    AdaptStalled { final_min_quality: f64, floor: f64 },
    #[error("stored deformation gradient lost positivity at node {node} (det {det:.3e})")]
    NonpositiveJacobian { node: usize, det: f64 },
    #[error("point location failed while transferring fields at ({x:.6}, {y:.6})")]
    PointLocationFailed { x: f64, y: f64 },
}

/// What `remesh_if_needed` did.
#[derive(Debug, Clone, Copy)]
pub struct RemeshOutcome {
    pub remeshed: bool,
    /// Worst cell quality of the mesh displaced by `u_c` (the trigger).
    pub probe_quality: f64,
    pub report: Option<AdaptReport>,
}

/// Rebases the state onto a repaired mesh when the displaced-mesh quality
/// drops below `q0`; otherwise leaves every field untouched.
///
/// On a rebase the stored gradient becomes `(I + grad u_c) * F_r` node by
/// node, the vertices move by `u_c`, the moved mesh is adapted, and `v`
/// (everywhere), `F_r` (from solid cells only), and `p` (from fluid cells
/// only) are interpolated onto the new mesh.  `u_c` resets to zero, the
/// re-mesh time advances to `t`, and the generation counter increments.
pub fn remesh_if_needed(
    state: &mut AleState,
    q0: f64,
    strategy: StrategyKind,
    size: &SizeParams,
    settings: &AdaptSettings,
) -> Result<RemeshOutcome, RemeshError> {
    let spaces = state.spaces();
    let offsets = state.vertex_displacements(&spaces);
    let probe = state.mesh.quality_displaced(&offsets);
    if probe >= q0 {
        return Ok(RemeshOutcome { remeshed: false, probe_quality: probe, report: None });
    }

    // Fold the current deformation into the stored gradient: nodal values
    // of grad u_c (area-weighted over incident cells) compose from the left.
    let grads = nodal_displacement_gradients(&state.mesh, &spaces, &state.u_c);
    let mut f_src = state.f_r.clone();
    for node in 0..spaces.p2t.nnodes() {
        let g = grads[node];
        let fc = [1.0 + g[0], g[1], g[2], 1.0 + g[3]];
        let fr: Vec<f64> = (0..4).map(|k| state.f_r[spaces.p2t.dof(node, k)]).collect();
        let f = [
            fc[0] * fr[0] + fc[1] * fr[2],
            fc[0] * fr[1] + fc[1] * fr[3],
            fc[2] * fr[0] + fc[3] * fr[2],
            fc[2] * fr[1] + fc[3] * fr[3],
        ];
        let det = f[0] * f[3] - f[1] * f[2];
        if !(det > 0.0) {
            return Err(RemeshError::NonpositiveJacobian { node, det });
        }
        for k in 0..4 {
            f_src[spaces.p2t.dof(node, k)] = f[k];
        }
    }

    // Move the mesh; nodal fields ride along unchanged.
    let mut moved = state.mesh.clone();
    for (v, d) in moved.vertices.iter_mut().zip(&offsets) {
        v[0] += d[0];
        v[1] += d[1];
    }

    // Repair a copy of the moved mesh.
    let mut repaired = moved.clone();
    let size_fn;
    let driver = match strategy {
        StrategyKind::None => RefinementStrategy::None,
        StrategyKind::Quality => RefinementStrategy::Quality,
        StrategyKind::Eikonal => {
            let field = GapSizeField::new(&moved, *size);
            size_fn = move |p: Point| field.target(p);
            RefinementStrategy::SizeField(&size_fn)
        }
    };
    let report = adapt_mesh(&mut repaired, settings, driver);
    if report.stalled && report.final_min_quality < q0.min(settings.q_target) {
        return Err(RemeshError::AdaptStalled {
            final_min_quality: report.final_min_quality,
            floor: q0.min(settings.q_target),
        });
    }

    // Interpolate fields from the moved mesh onto the repaired one.  The
    // moved mesh shares the old connectivity, so the old nodal values are
    // valid on it directly.
    let src = AleSpaces::new(&moved);
    let dst = AleSpaces::new(&repaired);
    let locator = MeshLocator::new(&moved);

    let mut v_new = vec![0.0; dst.p2v.ndofs()];
    transfer(&src.p2v, &state.v, &locator, &dst.p2v, &mut v_new, |_| true)?;

    let mut p_new = vec![0.0; dst.p1p.ndofs()];
    let fluid = |t: usize| moved.triangles[t].label == Subdomain::Fluid;
    transfer(&src.p1p, &state.p, &locator, &dst.p1p, &mut p_new, fluid)?;

    // The stored gradient only matters on solid cells; sample it from solid
    // cells alone and keep the identity elsewhere.
    let mut f_new = vec![0.0; dst.p2t.ndofs()];
    dst.p2t.fill_nodal(&mut f_new, |_, out| {
        out[0] = 1.0;
        out[3] = 1.0;
    });
    let solid = |t: usize| moved.triangles[t].label == Subdomain::Solid;
    let mut solid_nodes = vec![false; dst.p2t.nnodes()];
    for (t, tri) in repaired.triangles.iter().enumerate() {
        if tri.label == Subdomain::Solid {
            for &n in dst.p2t.cell_nodes(t).expect("global space") {
                solid_nodes[n] = true;
            }
        }
    }
    let mut out = [0.0; 4];
    for node in 0..dst.p2t.nnodes() {
        if !solid_nodes[node] {
            continue;
        }
        let p = dst.p2t.node_pos(node);
        let (cell, bary) = locator
            .locate_filtered(p, solid)
            .ok_or(RemeshError::PointLocationFailed { x: p[0], y: p[1] })?;
        eval_field(&src.p2t, &f_src, cell, &bary, &mut out);
        let det = out[0] * out[3] - out[1] * out[2];
        if !(det > 0.0) {
            return Err(RemeshError::NonpositiveJacobian { node, det });
        }
        for k in 0..4 {
            f_new[dst.p2t.dof(node, k)] = out[k];
        }
    }

    state.mesh = repaired;
    state.mesh.generation = state.mesh.generation.wrapping_add(1);
    state.v = v_new;
    state.u_c = vec![0.0; dst.p2v.ndofs()];
    state.p = p_new;
    state.f_r = f_new;
    state.t_r = state.t;
    Ok(RemeshOutcome { remeshed: true, probe_quality: probe, report: Some(report) })
}

/// `transfer_nodal` with the location failure surfaced as an error.
fn transfer(
    src_space: &FunctionSpace,
    src_field: &[f64],
    locator: &MeshLocator,
    dst_space: &FunctionSpace,
    dst_field: &mut [f64],
    keep: impl Fn(usize) -> bool,
) -> Result<(), RemeshError> {
    let filter = |t: usize| src_space.cell_nodes(t).is_some() && keep(t);
    let mut out = vec![0.0; src_space.ncomp];
    for node in 0..dst_space.nnodes() {
        let p = dst_space.node_pos(node);
        let (cell, bary) = locator
            .locate_filtered(p, filter)
            .ok_or(RemeshError::PointLocationFailed { x: p[0], y: p[1] })?;
        eval_field(src_space, src_field, cell, &bary, &mut out);
        for (c, &v) in out.iter().enumerate() {
            dst_field[dst_space.dof(node, c)] = v;
        }
    }
    Ok(())
}

/// Area-weighted nodal average of the displacement gradient, row-major
/// `[du0/dx0, du0/dx1, du1/dx0, du1/dx1]` per node.  Exact for affine
/// displacement fields.
fn nodal_displacement_gradients(
    mesh: &Mesh,
    spaces: &AleSpaces,
    u: &[f64],
) -> Vec<[f64; 4]> {
    let nnodes = spaces.p2v.nnodes();
    let mut acc = vec![[0.0; 4]; nnodes];
    let mut wsum = vec![0.0; nnodes];
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let geom = CellGeom::new(&mesh.tri_points(tri));
        let nodes = spaces.p2v.cell_nodes(t).expect("global space");
        for (ln, &node) in nodes.iter().enumerate() {
            let ref_grads = p2_ref_grads(&P2_NODE_BARY[ln]);
            let mut g = [0.0; 4];
            for (l2, &n2) in nodes.iter().enumerate() {
                let gg = geom.grad(ref_grads[l2]);
                for c in 0..2 {
                    let val = u[spaces.p2v.dof(n2, c)];
                    g[2 * c] += val * gg[0];
                    g[2 * c + 1] += val * gg[1];
                }
            }
            let w = geom.area;
            for k in 0..4 {
                acc[node][k] += w * g[k];
            }
            wsum[node] += w;
        }
    }
    for (a, w) in acc.iter_mut().zip(&wsum) {
        debug_assert!(*w > 0.0);
        for v in a.iter_mut() {
            *v /= w;
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ale::forms::tiny_fsi_mesh;
    use crate::mesh::box_mesh;

    fn smooth_state(mesh: Mesh) -> AleState {
        let mut state = AleState::at_rest(mesh);
        let spaces = state.spaces();
        spaces.p2v.fill_nodal(&mut state.v, |p, out| {
            out[0] = 0.3 + 0.1 * p[0] - 0.2 * p[1];
            out[1] = -0.1 + 0.05 * p[0] * p[1];
        });
        spaces.p1p.fill_nodal(&mut state.p, |p, out| out[0] = 2.0 + p[0] + 3.0 * p[1]);
        state
    }

    #[test]
    fn high_quality_probe_leaves_state_untouched() {
        let mut state = smooth_state(tiny_fsi_mesh(6));
        let spaces = state.spaces();
        // Tiny smooth displacement: quality stays near the undisplaced value.
        spaces.p2v.fill_nodal(&mut state.u_c, |p, out| {
            out[0] = 1e-4 * p[0] * (0.8 - p[0]);
            out[1] = -1e-4 * p[1];
        });
        let before_v = state.v.clone();
        let before_u = state.u_c.clone();
        let before_p = state.p.clone();
        let before_f = state.f_r.clone();
        let before_vertices = state.mesh.vertices.clone();

        let size = SizeParams::for_mesh(&state.mesh);
        let out = remesh_if_needed(
            &mut state,
            0.05,
            StrategyKind::Quality,
            &size,
            &AdaptSettings::default(),
        )
        .unwrap();

        assert!(!out.remeshed);
        assert!(out.probe_quality >= 0.05);
        assert_eq!(state.v, before_v);
        assert_eq!(state.u_c, before_u);
        assert_eq!(state.p, before_p);
        assert_eq!(state.f_r, before_f);
        assert_eq!(state.mesh.vertices, before_vertices);
        assert_eq!(state.mesh.generation, 0);
        assert_eq!(state.t_r, 0.0);
    }

    #[test]
    fn rigid_translation_rebase_preserves_constant_fields() {
        let mut state = smooth_state(tiny_fsi_mesh(6));
        let spaces = state.spaces();
        let c = [0.013, -0.008];
        spaces.p2v.fill_nodal(&mut state.u_c, |_, out| {
            out[0] = c[0];
            out[1] = c[1];
        });
        // Constant velocity so the transfer must reproduce it exactly.
        spaces.p2v.fill_nodal(&mut state.v, |_, out| {
            out[0] = 0.4;
            out[1] = -0.7;
        });
        state.t = 0.25;

        // A trigger above the metric maximum (0.25) forces the rebase.
        let size = SizeParams::for_mesh(&state.mesh);
        let out = remesh_if_needed(
            &mut state,
            0.5,
            StrategyKind::Quality,
            &size,
            &AdaptSettings::default(),
        )
        .unwrap();

        assert!(out.remeshed);
        assert_eq!(state.mesh.generation, 1);
        assert_eq!(state.t_r, 0.25);
        state.mesh.check_invariants().unwrap();

        let spaces = state.spaces();
        assert!(state.u_c.iter().all(|&x| x == 0.0));
        for n in 0..spaces.p2v.nnodes() {
            assert!((state.v[spaces.p2v.dof(n, 0)] - 0.4).abs() < 1e-12);
            assert!((state.v[spaces.p2v.dof(n, 1)] + 0.7).abs() < 1e-12);
        }
        // Translation has zero gradient: the stored gradient stays identity.
        for n in 0..spaces.p2t.nnodes() {
            let f: Vec<f64> = (0..4).map(|k| state.f_r[spaces.p2t.dof(n, k)]).collect();
            assert!((f[0] - 1.0).abs() < 1e-12, "F00 = {}", f[0]);
            assert!(f[1].abs() < 1e-12 && f[2].abs() < 1e-12);
            assert!((f[3] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn affine_displacement_composes_stored_gradient_exactly() {
        let mut state = AleState::at_rest(tiny_fsi_mesh(6));
        let spaces = state.spaces();
        // Start from a constant non-identity stored gradient.
        let f_prev = [1.05, 0.01, 0.02, 0.95];
        spaces.p2t.fill_nodal(&mut state.f_r, |_, out| out.copy_from_slice(&f_prev));
        // Affine displacement u = M x with a small matrix M.
        let m = [0.02, -0.01, 0.015, 0.03];
        spaces.p2v.fill_nodal(&mut state.u_c, |p, out| {
            out[0] = m[0] * p[0] + m[1] * p[1];
            out[1] = m[2] * p[0] + m[3] * p[1];
        });

        let size = SizeParams::for_mesh(&state.mesh);
        let out = remesh_if_needed(
            &mut state,
            0.5,
            StrategyKind::None,
            &size,
            &AdaptSettings::default(),
        )
        .unwrap();
        assert!(out.remeshed);

        // Expected composition (I + M) * F_prev, constant over the solid, so
        // interpolation must reproduce it to round-off.
        let fc = [1.0 + m[0], m[1], m[2], 1.0 + m[3]];
        let want = [
            fc[0] * f_prev[0] + fc[1] * f_prev[2],
            fc[0] * f_prev[1] + fc[1] * f_prev[3],
            fc[2] * f_prev[0] + fc[3] * f_prev[2],
            fc[2] * f_prev[1] + fc[3] * f_prev[3],
        ];
        let spaces = state.spaces();
        let mut solid_nodes = std::collections::BTreeSet::new();
        for (t, tri) in state.mesh.triangles.iter().enumerate() {
            if tri.label == Subdomain::Solid {
                solid_nodes.extend(spaces.p2t.cell_nodes(t).unwrap().iter().copied());
            }
        }
        assert!(!solid_nodes.is_empty());
        for &n in &solid_nodes {
            for k in 0..4 {
                let got = state.f_r[spaces.p2t.dof(n, k)];
                assert!(
                    (got - want[k]).abs() < 1e-10,
                    "node {n} comp {k}: got {got}, want {}",
                    want[k]
                );
            }
        }
    }

    #[test]
    fn gap_sizing_builds_several_layers_across_a_thin_film() {
        // A solid block hovering one cell row (1e-3) above the wall: inside
        // the film below it the summed distance to wall and interface is
        // exactly the gap, so the target length is half the gap and several
        // cell rows must appear across the film.
        let gap = 1e-3;
        let mut mesh = box_mesh(6, 3, 0.03, 3.0 * gap);
        let solid: Vec<bool> = mesh
            .triangles
            .iter()
            .map(|t| {
                let c = mesh.tri_centroid(t);
                c[1] > gap && c[1] < 2.0 * gap && c[0] > 0.005 && c[0] < 0.025
            })
            .collect();
        for (t, is_solid) in mesh.triangles.iter_mut().zip(solid) {
            if is_solid {
                t.label = Subdomain::Solid;
            }
        }
        mesh.rebuild_interface_from_labels();
        mesh.check_invariants().unwrap();

        let size = SizeParams { alpha: 0.5, h_min: 1e-4, h_max: mean_edge_length(&mesh) };
        let field = GapSizeField::new(&mesh, size);
        // Inside the film the two distances sum to the gap exactly.
        assert!((field.target([0.012, 0.5 * gap]) - 0.5 * gap).abs() < 1e-12);

        // The grading from 5e-4 in the film to the coarse far field is
        // extreme for this fixture, so a stall above the quality floor is
        // acceptable; the sizing itself is what is under test.
        let settings = AdaptSettings::default();
        let size_fn = |p: Point| field.target(p);
        let report = adapt_mesh(&mut mesh, &settings, RefinementStrategy::SizeField(&size_fn));
        assert!(
            report.final_min_quality >= settings.quality_floor,
            "adaptation left quality below floor: {report:?}"
        );
        mesh.check_invariants().unwrap();

        // Count distinct fluid cells met by a vertical probe through the
        // film, sampled off the structured grid lines.
        let locator = MeshLocator::new(&mesh);
        let x = 0.0117;
        let mut crossed = std::collections::BTreeSet::new();
        for k in 0..400 {
            let y = gap * (k as f64 + 0.5) / 400.0;
            let (cell, _) =
                locator.locate_filtered([x, y], |t| mesh.triangles[t].label == Subdomain::Fluid)
                    .unwrap();
            crossed.insert(cell);
        }
        assert!(
            crossed.len() >= 4,
            "want >= 4 cell layers across the film, got {}",
            crossed.len()
        );
    }

    #[test]
    fn size_field_clamps_to_bounds() {
        let mesh = tiny_fsi_mesh(6);
        let size = SizeParams { alpha: 0.5, h_min: 1e-4, h_max: 0.05 };
        let field = GapSizeField::new(&mesh, size);
        // On the interface the interface distance vanishes; far away the
        // target saturates at h_max.
        let far = field.target([0.0, 0.0]);
        assert!(far <= 0.05 + 1e-15);
        let probe = field.target([0.4, 0.62]);
        assert!(probe >= 1e-4 && probe <= 0.05 + 1e-15);
    }
}
