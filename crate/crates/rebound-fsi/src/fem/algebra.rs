//! Small dense vectors and matrices in two dimensions, generic over
//! [`Scalar`] so the same expressions serve residual and Jacobian passes.

use std::ops::{Add, Mul, Neg, Sub};

use super::scalar::Scalar;

/// Two-component vector.
#[derive(Clone, Copy, Debug)]
pub struct V2<T>(pub [T; 2]);

/// Row-major 2 by 2 matrix: `M2([[a, b], [c, d]])` is the matrix `[a b; c d]`.
#[derive(Clone, Copy, Debug)]
pub struct M2<T>(pub [[T; 2]; 2]);

impl<T: Scalar> V2<T> {
    pub fn zero() -> Self {
        Self([T::zero(); 2])
    }

    pub fn from_f64(v: [f64; 2]) -> Self {
        Self([T::from_f64(v[0]), T::from_f64(v[1])])
    }

    pub fn dot(self, rhs: Self) -> T {
        self.0[0] * rhs.0[0] + self.0[1] * rhs.0[1]
    }

    pub fn norm_sq(self) -> T {
        self.dot(self)
    }

    pub fn scale(self, s: T) -> Self {
        Self([self.0[0] * s, self.0[1] * s])
    }

    pub fn mul_f64(self, c: f64) -> Self {
        Self([self.0[0].mul_f64(c), self.0[1].mul_f64(c)])
    }

    /// Outer product `self otimes rhs`.
    pub fn outer(self, rhs: Self) -> M2<T> {
        M2([
            [self.0[0] * rhs.0[0], self.0[0] * rhs.0[1]],
            [self.0[1] * rhs.0[0], self.0[1] * rhs.0[1]],
        ])
    }
}

impl<T: Scalar> Add for V2<T> {
    type Output = Self;

    fn add(self, rhs: Self) -> Self {
        Self([self.0[0] + rhs.0[0], self.0[1] + rhs.0[1]])
    }
}

impl<T: Scalar> Sub for V2<T> {
    type Output = Self;

    fn sub(self, rhs: Self) -> Self {
        Self([self.0[0] - rhs.0[0], self.0[1] - rhs.0[1]])
    }
}

impl<T: Scalar> Neg for V2<T> {
    type Output = Self;

    fn neg(self) -> Self {
        Self([-self.0[0], -self.0[1]])
    }
}

impl<T: Scalar> M2<T> {
    pub fn zero() -> Self {
        Self([[T::zero(); 2]; 2])
    }

    pub fn identity() -> Self {
        let mut m = Self::zero();
        m.0[0][0] = T::from_f64(1.0);
        m.0[1][1] = T::from_f64(1.0);
        m
    }

    pub fn from_f64(m: [[f64; 2]; 2]) -> Self {
        Self([
            [T::from_f64(m[0][0]), T::from_f64(m[0][1])],
            [T::from_f64(m[1][0]), T::from_f64(m[1][1])],
        ])
    }

    pub fn t(self) -> Self {
        Self([
            [self.0[0][0], self.0[1][0]],
            [self.0[0][1], self.0[1][1]],
        ])
    }

    pub fn det(self) -> T {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    pub fn trace(self) -> T {
        self.0[0][0] + self.0[1][1]
    }

    /// Inverse by the adjugate; the caller guarantees a nonzero determinant.
    pub fn inv(self) -> Self {
        let d = self.det();
        Self([
            [self.0[1][1] / d, -self.0[0][1] / d],
            [-self.0[1][0] / d, self.0[0][0] / d],
        ])
    }

    pub fn mulv(self, v: V2<T>) -> V2<T> {
        V2([
            self.0[0][0] * v.0[0] + self.0[0][1] * v.0[1],
            self.0[1][0] * v.0[0] + self.0[1][1] * v.0[1],
        ])
    }

    pub fn scale(self, s: T) -> Self {
        Self([
            [self.0[0][0] * s, self.0[0][1] * s],
            [self.0[1][0] * s, self.0[1][1] * s],
        ])
    }

    pub fn mul_f64(self, c: f64) -> Self {
        Self([
            [self.0[0][0].mul_f64(c), self.0[0][1].mul_f64(c)],
            [self.0[1][0].mul_f64(c), self.0[1][1].mul_f64(c)],
        ])
    }

    /// Double contraction `A : B`.
    pub fn ddot(self, rhs: Self) -> T {
        self.0[0][0] * rhs.0[0][0]
            + self.0[0][1] * rhs.0[0][1]
            + self.0[1][0] * rhs.0[1][0]
            + self.0[1][1] * rhs.0[1][1]
    }

    /// Symmetric part.
    pub fn sym(self) -> Self {
        (self + self.t()).mul_f64(0.5)
    }
}

impl<T: Scalar> Add for M2<T> {
    type Output = Self;

    fn add(self, rhs: Self) -> Self {
        Self([
            [self.0[0][0] + rhs.0[0][0], self.0[0][1] + rhs.0[0][1]],
            [self.0[1][0] + rhs.0[1][0], self.0[1][1] + rhs.0[1][1]],
        ])
    }
}

impl<T: Scalar> Sub for M2<T> {
    type Output = Self;

    fn sub(self, rhs: Self) -> Self {
        Self([
            [self.0[0][0] - rhs.0[0][0], self.0[0][1] - rhs.0[0][1]],
            [self.0[1][0] - rhs.0[1][0], self.0[1][1] - rhs.0[1][1]],
        ])
    }
}

impl<T: Scalar> Neg for M2<T> {
    type Output = Self;

    fn neg(self) -> Self {
        self.mul_f64(-1.0)
    }
}

impl<T: Scalar> Mul for M2<T> {
    type Output = Self;

    fn mul(self, rhs: Self) -> Self {
        let mut out = Self::zero();
        for i in 0..2 {
            for j in 0..2 {
                out.0[i][j] =
                    self.0[i][0] * rhs.0[0][j] + self.0[i][1] * rhs.0[1][j];
            }
        }
        out
    }
}
