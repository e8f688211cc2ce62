//! Scalar abstraction shared by plain `f64` evaluation and forward-mode
//! automatic differentiation.

use std::fmt::Debug;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

/// Number type the weak-form kernels are written against.
///
/// The same kernel code evaluates residuals with `f64` and element Jacobians
/// with [`Dual`](super::dual::Dual); only the seeding of unknowns differs.
pub trait Scalar:
    Copy
    + Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
{
    /// Constant with zero derivative part.
    fn from_f64(x: f64) -> Self;

    /// Unknown seeded with a unit derivative in slot `k`; `f64` drops the seed.
    fn seed(x: f64, k: usize) -> Self;

    /// Point value, discarding any derivative part.
    fn value(&self) -> f64;

    fn zero() -> Self {
        Self::from_f64(0.0)
    }

    fn sqrt(self) -> Self;

    fn ln(self) -> Self;

    fn abs(self) -> Self;

    fn powi(self, n: i32) -> Self;

    /// Scale by a constant without lifting it to `Self` first.
    fn mul_f64(self, c: f64) -> Self;
}

impl Scalar for f64 {
    fn from_f64(x: f64) -> Self {
        x
    }

    fn seed(x: f64, _k: usize) -> Self {
        x
    }

    fn value(&self) -> f64 {
        *self
    }

    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }

    fn ln(self) -> Self {
        f64::ln(self)
    }

    fn abs(self) -> Self {
        f64::abs(self)
    }

    fn powi(self, n: i32) -> Self {
        f64::powi(self, n)
    }

    fn mul_f64(self, c: f64) -> Self {
        self * c
    }
}
