//! Fast point-to-polyline distance queries.
//!
//! A [`DistanceQuery`] indexes a set of segments into a uniform grid and
//! answers nearest-distance queries at arbitrary points by expanding rings
//! of grid cells until no closer segment can exist. Used for the size field
//! that grades mesh resolution toward the immersed interface and the wall.

use crate::geometry::{dist, point_segment_distance, Point};

#[derive(Debug, Clone)]
pub struct DistanceQuery {
    segments: Vec<[Point; 2]>,
    lo: Point,
    cell: f64,
    nx: usize,
    ny: usize,
    /// Segment indices per grid cell, row-major.
    buckets: Vec<Vec<u32>>,
}

impl DistanceQuery {
    /// Build an index over `segments`. Panics on an empty set or non-finite
    /// coordinates.
    pub fn new(segments: Vec<[Point; 2]>) -> Self {
        assert!(!segments.is_empty(), "distance query needs at least one segment");
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        let mut total_len = 0.0;
        for s in &segments {
            for p in s {
                assert!(p[0].is_finite() && p[1].is_finite());
                lo[0] = lo[0].min(p[0]);
                lo[1] = lo[1].min(p[1]);
                hi[0] = hi[0].max(p[0]);
                hi[1] = hi[1].max(p[1]);
            }
            total_len += dist(s[0], s[1]);
        }
        let extent = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1e-12);
        // Cell size near the mean segment length keeps both bucket sizes and
        // ring counts small for polyline-like inputs.
        let mean_len = total_len / segments.len() as f64;
        let cell = mean_len.max(extent / 512.0);
        let nx = (((hi[0] - lo[0]) / cell).ceil() as usize + 1).max(1);
        let ny = (((hi[1] - lo[1]) / cell).ceil() as usize + 1).max(1);
        let mut buckets = vec![Vec::new(); nx * ny];
        for (si, s) in segments.iter().enumerate() {
            let sx0 = (((s[0][0].min(s[1][0]) - lo[0]) / cell).floor() as isize).clamp(0, nx as isize - 1);
            let sx1 = (((s[0][0].max(s[1][0]) - lo[0]) / cell).floor() as isize).clamp(0, nx as isize - 1);
            let sy0 = (((s[0][1].min(s[1][1]) - lo[1]) / cell).floor() as isize).clamp(0, ny as isize - 1);
            let sy1 = (((s[0][1].max(s[1][1]) - lo[1]) / cell).floor() as isize).clamp(0, ny as isize - 1);
            for gy in sy0..=sy1 {
                for gx in sx0..=sx1 {
                    buckets[gy as usize * nx + gx as usize].push(si as u32);
                }
            }
        }
        DistanceQuery { segments, lo, cell, nx, ny, buckets }
    }

    /// Distance from `p` to the closest indexed segment.
    pub fn distance(&self, p: Point) -> f64 {
        let gx = (((p[0] - self.lo[0]) / self.cell).floor() as isize).clamp(0, self.nx as isize - 1);
        let gy = (((p[1] - self.lo[1]) / self.cell).floor() as isize).clamp(0, self.ny as isize - 1);
        let mut best = f64::INFINITY;
        let max_ring = self.nx.max(self.ny) as isize;
        for ring in 0..=max_ring {
            // Cells in this ring can only contain segments no closer than
            // (ring - 1) cell widths; once the best found distance beats
            // that bound, no further ring can improve it.
            if best.is_finite() && (ring - 1) as f64 * self.cell > best {
                break;
            }
            let scan = |gx2: isize, gy2: isize, best: &mut f64| {
                if gx2 < 0 || gy2 < 0 || gx2 >= self.nx as isize || gy2 >= self.ny as isize {
                    return;
                }
                for &si in &self.buckets[gy2 as usize * self.nx + gx2 as usize] {
                    let s = &self.segments[si as usize];
                    *best = best.min(point_segment_distance(p, s[0], s[1]));
                }
            };
            if ring == 0 {
                scan(gx, gy, &mut best);
            } else {
                for dx in -ring..=ring {
                    scan(gx + dx, gy - ring, &mut best);
                    scan(gx + dx, gy + ring, &mut best);
                }
                for dy in (1 - ring)..ring {
                    scan(gx - ring, gy + dy, &mut best);
                    scan(gx + ring, gy + dy, &mut best);
                }
            }
        }
        best
    }

    pub fn segment_count(&self) -> usize {
        self.segments.len()
    }
}
