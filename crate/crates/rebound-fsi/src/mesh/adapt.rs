//! Quality- and size-driven mesh adaptation built from the local operations.
//!
//! One sweep runs four passes in a fixed order: split, collapse, flip, move.
//! Sweeps repeat until the minimum triangle quality reaches the target and
//! the size criterion (if any) is met, until a sweep accepts no operation
//! (reported as a stall), or until the sweep budget runs out. All iteration
//! orders are sorted, so adaptation is deterministic.

use std::collections::{BTreeSet, VecDeque};

use crate::geometry::{dist, midpoint, Point};
use crate::mesh::ops::MeshEditor;
use crate::mesh::{EdgeKey, Mesh};

/// What drives refinement. `None` still allows quality-driven coarsening,
/// flips, and smoothing; `Quality` additionally splits the longest edge of
/// triangles below the quality floor; `SizeField` refines and coarsens
/// toward a pointwise target edge length.
#[derive(Clone, Copy)]
pub enum RefinementStrategy<'a> {
    None,
    Quality,
    SizeField(&'a dyn Fn(Point) -> f64),
}

#[derive(Debug, Clone, Copy)]
pub struct AdaptSettings {
    /// Sweeps stop once every triangle reaches this quality.
    pub q_target: f64,
    /// Triangles below this quality drive splits (Quality strategy) and
    /// shortest-edge collapses (all strategies).
    pub quality_floor: f64,
    /// An edge splits when longer than this multiple of the local target
    /// length.
    pub split_len_factor: f64,
    /// An edge collapses when shorter than this multiple of the local target
    /// length (SizeField strategy only).
    pub collapse_len_factor: f64,
    pub max_sweeps: usize,
    /// When false, interface edges are never split. Splitting them is
    /// geometrically exact (the polyline is piecewise straight) but changes
    /// the interface segment count, which mesh generation keeps fixed.
    pub refine_interface: bool,
}

impl Default for AdaptSettings {
    fn default() -> Self {
        AdaptSettings {
            q_target: 0.1,
            quality_floor: 0.05,
            split_len_factor: 4.0 / 3.0,
            collapse_len_factor: 0.45,
            max_sweeps: 50,
            refine_interface: true,
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct AdaptReport {
    pub sweeps: usize,
    pub splits: usize,
    pub collapses: usize,
    pub flips: usize,
    pub moves: usize,
    pub final_min_quality: f64,
    /// True when adaptation stopped without meeting its targets: either a
    /// full sweep accepted nothing or the sweep budget ran out. The mesh is
    /// still valid, just short of the requested quality or sizing.
    pub stalled: bool,
}

/// Strict-improvement margin for flips; prevents ping-ponging between
/// equal-quality configurations across sweeps.
const FLIP_MARGIN: f64 = 1e-12;

fn size_targets_met(ed: &MeshEditor, settings: &AdaptSettings, size: &dyn Fn(Point) -> f64) -> bool {
    for e in ed.edges_sorted() {
        if !settings.refine_interface && ed.is_interface(e) {
            continue;
        }
        let mid = midpoint(ed.vertex(e.a()), ed.vertex(e.b()));
        if ed.edge_length(e) > settings.split_len_factor * size(mid) {
            return false;
        }
    }
    true
}

fn split_pass(
    ed: &mut MeshEditor,
    settings: &AdaptSettings,
    strategy: RefinementStrategy,
    budget: &mut usize,
) -> usize {
    let mut splits = 0;
    match strategy {
        RefinementStrategy::None => {}
        RefinementStrategy::Quality => {
            // Longest edge of every triangle below the floor, deduplicated.
            // Inverted triangles are skipped: no split can repair them, only
            // collapses and flips can.
            let mut targets = BTreeSet::new();
            for slot in ed.tri_slots() {
                let t = *ed.tri(slot).expect("slot alive");
                let [p0, p1, p2] = ed.tri_points(&t);
                if crate::geometry::signed_area(p0, p1, p2) <= 0.0 {
                    continue;
                }
                if ed.tri_quality_of(&t) >= settings.quality_floor {
                    continue;
                }
                let longest = t
                    .edges()
                    .into_iter()
                    .max_by(|a, b| {
                        ed.edge_length(*a)
                            .partial_cmp(&ed.edge_length(*b))
                            .expect("finite lengths")
                    })
                    .expect("triangle has edges");
                targets.insert(longest);
            }
            for e in targets {
                if *budget == 0 {
                    break;
                }
                if !settings.refine_interface && ed.is_interface(e) {
                    continue;
                }
                if ed.edge_exists(e) && ed.edge_split(e).is_ok() {
                    *budget -= 1;
                    splits += 1;
                }
            }
        }
        RefinementStrategy::SizeField(size) => {
            // FIFO over all edges; children and spokes of a split are
            // re-enqueued, so one sweep grades fully through steep size
            // gradients. The budget guards against a degenerate size field.
            let mut queue: VecDeque<EdgeKey> = ed.edges_sorted().into();
            while let Some(e) = queue.pop_front() {
                if !ed.edge_exists(e) {
                    continue;
                }
                if !settings.refine_interface && ed.is_interface(e) {
                    continue;
                }
                let mid = midpoint(ed.vertex(e.a()), ed.vertex(e.b()));
                if ed.edge_length(e) <= settings.split_len_factor * size(mid) {
                    continue;
                }
                if *budget == 0 {
                    break;
                }
                let (a, b) = (e.a(), e.b());
                if let Ok(m) = ed.edge_split(e) {
                    *budget -= 1;
                    splits += 1;
                    queue.push_back(EdgeKey::new(a, m));
                    queue.push_back(EdgeKey::new(m, b));
                    for x in ed.link_vertices(m) {
                        if x != a && x != b {
                            queue.push_back(EdgeKey::new(m, x));
                        }
                    }
                }
            }
        }
    }
    splits
}

fn collapse_pass(
    ed: &mut MeshEditor,
    settings: &AdaptSettings,
    strategy: RefinementStrategy,
) -> usize {
    // Quality candidates: shortest edge of every triangle below the floor,
    // accepted only when the local minimum quality strictly improves. Size
    // candidates (SizeField only): every edge below the collapse length,
    // accepted unless a merged edge would immediately need splitting again.
    let mut quality_candidates = BTreeSet::new();
    for slot in ed.tri_slots() {
        let t = *ed.tri(slot).expect("slot alive");
        if ed.tri_quality_of(&t) >= settings.quality_floor {
            continue;
        }
        let shortest = t
            .edges()
            .into_iter()
            .min_by(|a, b| {
                ed.edge_length(*a)
                    .partial_cmp(&ed.edge_length(*b))
                    .expect("finite lengths")
            })
            .expect("triangle has edges");
        quality_candidates.insert(shortest);
    }
    let mut size_candidates = BTreeSet::new();
    if let RefinementStrategy::SizeField(size) = strategy {
        for e in ed.edges_sorted() {
            let mid = midpoint(ed.vertex(e.a()), ed.vertex(e.b()));
            if ed.edge_length(e) < settings.collapse_len_factor * size(mid) {
                size_candidates.insert(e);
            }
        }
    }
    let mut collapses = 0;
    for e in size_candidates.iter().chain(quality_candidates.difference(&size_candidates)) {
        let e = *e;
        if !ed.edge_exists(e) {
            continue;
        }
        let driven_by_size = size_candidates.contains(&e);
        if driven_by_size {
            if let RefinementStrategy::SizeField(size) = strategy {
                let Some(target) = ed.collapse_target(e) else { continue };
                let mut neighbors = ed.link_vertices(e.a());
                neighbors.extend(ed.link_vertices(e.b()));
                neighbors.remove(&e.a());
                neighbors.remove(&e.b());
                let overlong = neighbors.iter().any(|&x| {
                    let p = ed.vertex(x);
                    dist(target, p) > settings.split_len_factor * size(midpoint(target, p))
                });
                if overlong {
                    continue;
                }
            }
        } else {
            match ed.collapse_preview(e) {
                Some((before, after)) if after > before => {}
                _ => continue,
            }
        }
        if ed.edge_collapse(e).is_ok() {
            collapses += 1;
        }
    }
    collapses
}

fn flip_pass(ed: &mut MeshEditor) -> usize {
    let mut flips = 0;
    for e in ed.edges_sorted() {
        if let Some((before, after)) = ed.flip_preview(e) {
            if after > before + FLIP_MARGIN && ed.edge_flip(e).is_ok() {
                flips += 1;
            }
        }
    }
    flips
}

fn move_pass(ed: &mut MeshEditor) -> usize {
    let mut moves = 0;
    for v in ed.vertices_alive_sorted() {
        if ed.vertex_move(v).is_ok() {
            moves += 1;
        }
    }
    moves
}

/// Adapt `mesh` in place. See [`AdaptSettings`] and [`RefinementStrategy`]
/// for the stopping criteria; the report says how far adaptation got.
pub fn adapt_mesh(
    mesh: &mut Mesh,
    settings: &AdaptSettings,
    strategy: RefinementStrategy,
) -> AdaptReport {
    let mut ed = MeshEditor::from_mesh(mesh);
    let mut report = AdaptReport::default();
    // Hard cap on refinement across the whole call; a stall is reported
    // instead of letting a hostile size field or unrepairable geometry grow
    // the mesh without bound.
    let mut split_budget = 40 * ed.tri_count_alive() + 10_000;
    loop {
        let targets_met = ed.min_quality() >= settings.q_target
            && match strategy {
                RefinementStrategy::SizeField(size) => size_targets_met(&ed, settings, size),
                _ => true,
            };
        if targets_met {
            break;
        }
        if report.sweeps >= settings.max_sweeps {
            report.stalled = true;
            break;
        }
        let splits = split_pass(&mut ed, settings, strategy, &mut split_budget);
        let collapses = collapse_pass(&mut ed, settings, strategy);
        let flips = flip_pass(&mut ed);
        let moves = move_pass(&mut ed);
        report.sweeps += 1;
        report.splits += splits;
        report.collapses += collapses;
        report.flips += flips;
        report.moves += moves;
        if splits + collapses + flips + moves == 0 {
            report.stalled = true;
            break;
        }
    }
    report.final_min_quality = ed.min_quality();
    *mesh = ed.into_mesh();
    debug_assert!(mesh.check_invariants().is_ok());
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{BoundaryTag, Subdomain, Tri};
    use std::collections::BTreeMap;

    /// Structured n x n unit-square grid split into right triangles, with a
    /// distorted band of vertices when `jitter` is set.
    fn grid_mesh(n: usize, jitter: f64) -> Mesh {
        let idx = |i: usize, j: usize| j * (n + 1) + i;
        let mut vertices = Vec::new();
        for j in 0..=n {
            for i in 0..=n {
                let mut p = [i as f64 / n as f64, j as f64 / n as f64];
                if i > 0 && i < n && j > 0 && j < n {
                    // Deterministic pseudo-jitter: enough to create slivers
                    // but never inverted triangles (|offset| < cell / 2).
                    let s = ((i * 31 + j * 17) % 7) as f64 / 7.0 - 0.5;
                    p[0] += jitter * s / n as f64;
                    p[1] += jitter * (0.5 - s.abs()) / n as f64;
                }
                vertices.push(p);
            }
        }
        let mut triangles = Vec::new();
        for j in 0..n {
            for i in 0..n {
                let (a, b, c, d) = (idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1));
                triangles.push(Tri { v: [a, b, c], label: Subdomain::Fluid });
                triangles.push(Tri { v: [a, c, d], label: Subdomain::Fluid });
            }
        }
        let mut boundary_edges = BTreeMap::new();
        for i in 0..n {
            boundary_edges.insert(EdgeKey::new(idx(i, 0), idx(i + 1, 0)), BoundaryTag::Bottom);
            boundary_edges
                .insert(EdgeKey::new(idx(i, n), idx(i + 1, n)), BoundaryTag::LateralTop);
            boundary_edges
                .insert(EdgeKey::new(idx(0, i), idx(0, i + 1)), BoundaryTag::LateralTop);
            boundary_edges
                .insert(EdgeKey::new(idx(n, i), idx(n, i + 1)), BoundaryTag::LateralTop);
        }
        Mesh {
            vertices,
            triangles,
            interface_edges: Default::default(),
            boundary_edges,
            generation: 0,
        }
    }

    #[test]
    fn quality_strategy_repairs_distorted_grid() {
        let mut m = grid_mesh(8, 0.9);
        m.check_invariants().unwrap();
        assert!(m.quality() < 0.1, "fixture should start below target");
        let s = AdaptSettings::default();
        let report = adapt_mesh(&mut m, &s, RefinementStrategy::Quality);
        m.check_invariants().unwrap();
        assert!(
            report.stalled || m.quality() >= s.q_target,
            "quality {} after {} sweeps",
            m.quality(),
            report.sweeps
        );
        assert!(!report.stalled, "unexpected stall: {report:?}");
    }

    #[test]
    fn none_strategy_never_splits() {
        let mut m = grid_mesh(6, 0.8);
        let report = adapt_mesh(&mut m, &AdaptSettings::default(), RefinementStrategy::None);
        m.check_invariants().unwrap();
        assert_eq!(report.splits, 0);
    }

    #[test]
    fn size_field_grades_toward_corner() {
        let mut m = grid_mesh(4, 0.0);
        let size = |p: Point| (0.02 + 0.35 * (p[0].powi(2) + p[1].powi(2)).sqrt()).min(0.3);
        let s = AdaptSettings::default();
        let report = adapt_mesh(&mut m, &s, RefinementStrategy::SizeField(&size));
        m.check_invariants().unwrap();
        assert!(report.splits > 0);
        assert!(!report.stalled, "{report:?}");
        // Every edge respects the local size bound.
        let inc = m.edge_incidence();
        for e in inc.keys() {
            let (a, b) = (m.vertices[e.a()], m.vertices[e.b()]);
            let len = crate::geometry::dist(a, b);
            let h = size(crate::geometry::midpoint(a, b));
            assert!(len <= s.split_len_factor * h + 1e-12, "edge len {len} vs target {h}");
        }
        assert!(m.quality() >= s.q_target);
        // Refinement is genuinely graded: shortest edge near the corner is
        // several times shorter than the longest far edge.
        let min_len = inc
            .keys()
            .map(|e| crate::geometry::dist(m.vertices[e.a()], m.vertices[e.b()]))
            .fold(f64::INFINITY, f64::min);
        let max_len = inc
            .keys()
            .map(|e| crate::geometry::dist(m.vertices[e.a()], m.vertices[e.b()]))
            .fold(0.0, f64::max);
        assert!(max_len / min_len > 3.0, "min {min_len} max {max_len}");
    }

    #[test]
    fn impossible_target_reports_stall() {
        let mut m = grid_mesh(3, 0.0);
        let s = AdaptSettings {
            q_target: 0.26, // above the equilateral optimum, unreachable
            max_sweeps: 5,
            ..AdaptSettings::default()
        };
        let report = adapt_mesh(&mut m, &s, RefinementStrategy::Quality);
        m.check_invariants().unwrap();
        assert!(report.stalled);
        assert!(report.final_min_quality < s.q_target);
    }
}
