//! Lagrange bases on the reference triangle.
//!
//! Local node order follows the cell edge convention: vertices `v0 v1 v2`,
//! then midpoints of edges `(v0,v1)`, `(v1,v2)`, `(v2,v0)`.  Reference
//! coordinates are `(xi, eta)` with barycentric `(1 - xi - eta, xi, eta)`.

use crate::geometry::Point;

/// Linear shape functions at a barycentric point.
pub fn p1_values(b: &[f64; 3]) -> [f64; 3] {
    *b
}

/// Gradients of the linear shape functions in reference coordinates.
pub fn p1_ref_grads() -> [[f64; 2]; 3] {
    [[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]]
}

/// Quadratic shape functions at a barycentric point.
pub fn p2_values(b: &[f64; 3]) -> [f64; 6] {
    [
        b[0] * (2.0 * b[0] - 1.0),
        b[1] * (2.0 * b[1] - 1.0),
        b[2] * (2.0 * b[2] - 1.0),
        4.0 * b[0] * b[1],
        4.0 * b[1] * b[2],
        4.0 * b[2] * b[0],
    ]
}

/// Gradients of the quadratic shape functions in reference coordinates.
pub fn p2_ref_grads(b: &[f64; 3]) -> [[f64; 2]; 6] {
    let g = p1_ref_grads();
    let mut out = [[0.0; 2]; 6];
    for i in 0..3 {
        let c = 4.0 * b[i] - 1.0;
        out[i] = [c * g[i][0], c * g[i][1]];
    }
    // Midpoint of edge (i, j) has shape 4 b_i b_j.
    for (m, (i, j)) in [(3, (0, 1)), (4, (1, 2)), (5, (2, 0))] {
        for k in 0..2 {
            out[m][k] = 4.0 * (b[j] * g[i][k] + b[i] * g[j][k]);
        }
    }
    out
}

/// Affine geometry factors of one cell: maps reference gradients to physical
/// ones and carries the cell area.
#[derive(Clone, Copy, Debug)]
pub struct CellGeom {
    inv_jt: [[f64; 2]; 2],
    pub area: f64,
}

impl CellGeom {
    pub fn new(pts: &[Point; 3]) -> Self {
        let j = [
            [pts[1][0] - pts[0][0], pts[2][0] - pts[0][0]],
            [pts[1][1] - pts[0][1], pts[2][1] - pts[0][1]],
        ];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        // J^{-T}, rows are the barycentric direction gradients.
        let inv_jt = [
            [j[1][1] / det, -j[1][0] / det],
            [-j[0][1] / det, j[0][0] / det],
        ];
        Self { inv_jt, area: 0.5 * det }
    }

    /// Physical gradient of a shape function from its reference gradient.
    pub fn grad(&self, ref_grad: [f64; 2]) -> [f64; 2] {
        [
            self.inv_jt[0][0] * ref_grad[0] + self.inv_jt[0][1] * ref_grad[1],
            self.inv_jt[1][0] * ref_grad[0] + self.inv_jt[1][1] * ref_grad[1],
        ]
    }

    /// Physical coordinates of a barycentric point.
    pub fn point(pts: &[Point; 3], b: &[f64; 3]) -> Point {
        [
            b[0] * pts[0][0] + b[1] * pts[1][0] + b[2] * pts[2][0],
            b[0] * pts[0][1] + b[1] * pts[1][1] + b[2] * pts[2][1],
        ]
    }
}

/// Barycentric coordinates of the six P2 nodes in local order.
pub const P2_NODE_BARY: [[f64; 3]; 6] = [
    [1.0, 0.0, 0.0],
    [0.0, 1.0, 0.0],
    [0.0, 0.0, 1.0],
    [0.5, 0.5, 0.0],
    [0.0, 0.5, 0.5],
    [0.5, 0.0, 0.5],
];
