//! Small 2D geometric primitives on plain `[f64; 2]` points.

pub type Point = [f64; 2];

/// Side lengths below this are treated as degenerate by quality metrics.
pub const DEGENERATE_LENGTH: f64 = 1e-14;

#[inline]
pub fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1]]
}

#[inline]
pub fn add(a: Point, b: Point) -> Point {
    [a[0] + b[0], a[1] + b[1]]
}

#[inline]
pub fn scale(a: Point, s: f64) -> Point {
    [a[0] * s, a[1] * s]
}

#[inline]
pub fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

/// z-component of the cross product of 2D vectors.
#[inline]
pub fn cross(a: Point, b: Point) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

#[inline]
pub fn norm(a: Point) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub fn dist(a: Point, b: Point) -> f64 {
    norm(sub(a, b))
}

#[inline]
pub fn midpoint(a: Point, b: Point) -> Point {
    [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])]
}

/// Twice the signed area of triangle (a, b, c); positive when
/// counterclockwise.
#[inline]
pub fn signed_area2(a: Point, b: Point, c: Point) -> f64 {
    cross(sub(b, a), sub(c, a))
}

#[inline]
pub fn signed_area(a: Point, b: Point, c: Point) -> f64 {
    0.5 * signed_area2(a, b, c)
}

#[inline]
pub fn centroid(a: Point, b: Point, c: Point) -> Point {
    [(a[0] + b[0] + c[0]) / 3.0, (a[1] + b[1] + c[1]) / 3.0]
}

/// Euclidean distance from `p` to the closed segment (a, b).
pub fn point_segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let ab = sub(b, a);
    let len2 = dot(ab, ab);
    if len2 == 0.0 {
        return dist(p, a);
    }
    let t = (dot(sub(p, a), ab) / len2).clamp(0.0, 1.0);
    dist(p, add(a, scale(ab, t)))
}

/// Even-odd test for `p` strictly inside the closed polygon `poly`
/// (consecutive vertices, implicitly closed). Points on the boundary are
/// classified arbitrarily; callers must not rely on boundary behavior.
pub fn point_in_polygon(p: Point, poly: &[Point]) -> bool {
    let mut inside = false;
    let n = poly.len();
    let mut j = n - 1;
    for i in 0..n {
        let (pi, pj) = (poly[i], poly[j]);
        if ((pi[1] > p[1]) != (pj[1] > p[1]))
            && p[0] < (pj[0] - pi[0]) * (p[1] - pi[1]) / (pj[1] - pi[1]) + pi[0]
        {
            inside = !inside;
        }
        j = i;
    }
    inside
}
