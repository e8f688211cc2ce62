//! Triangle shape quality: the incircle-to-circumcircle area ratio.

use crate::geometry::{dist, signed_area, Point, DEGENERATE_LENGTH};

/// Quality of triangle (a, b, c) as the area ratio of its incircle to its
/// circumcircle, i.e. (r / R)^2 with r = A / s and R = abc / (4 A).
///
/// The value is 0.25 exactly for an equilateral triangle, decreases toward 0
/// as the triangle flattens, and is defined as 0 for degenerate or inverted
/// (clockwise) inputs.
pub fn triangle_quality(a: Point, b: Point, c: Point) -> f64 {
    let la = dist(b, c);
    let lb = dist(c, a);
    let lc = dist(a, b);
    if la.min(lb).min(lc) < DEGENERATE_LENGTH {
        return 0.0;
    }
    let area = signed_area(a, b, c);
    if !(area > 0.0) {
        return 0.0;
    }
    let s = 0.5 * (la + lb + lc);
    // r / R = 4 A^2 / (s * la * lb * lc)
    let ratio = 4.0 * area * area / (s * la * lb * lc);
    ratio * ratio
}
