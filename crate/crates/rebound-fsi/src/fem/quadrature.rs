//! Quadrature on the reference triangle.

/// Barycentric coordinates and weight of one quadrature point.  Weights sum
/// to one, so integrals scale by the physical cell area.
#[derive(Clone, Copy, Debug)]
pub struct QuadPoint {
    pub bary: [f64; 3],
    pub weight: f64,
}

const W1: f64 = 0.223_381_589_678_011;
const W2: f64 = 0.109_951_743_655_322;
const A1: f64 = 0.445_948_490_915_965;
const B1: f64 = 0.108_103_018_168_070;
const A2: f64 = 0.091_576_213_509_771;
const B2: f64 = 0.816_847_572_980_459;

/// Six-point rule, exact for polynomials through degree four.
pub const TRI_QUAD: [QuadPoint; 6] = [
    QuadPoint { bary: [B1, A1, A1], weight: W1 },
    QuadPoint { bary: [A1, B1, A1], weight: W1 },
    QuadPoint { bary: [A1, A1, B1], weight: W1 },
    QuadPoint { bary: [B2, A2, A2], weight: W2 },
    QuadPoint { bary: [A2, B2, A2], weight: W2 },
    QuadPoint { bary: [A2, A2, B2], weight: W2 },
];
