//! Fixed-size forward-mode dual numbers.
//!
//! `Dual<N>` carries a value and `N` partial derivatives through arithmetic,
//! so evaluating an element residual once with seeded unknowns yields the
//! whole local Jacobian block without hand-written linearizations.

use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use super::scalar::Scalar;

/// Value plus `N` partial derivatives.  `N` is the number of local unknowns
/// of one element type.
#[derive(Clone, Copy, Debug)]
pub struct Dual<const N: usize> {
    pub re: f64,
    pub im: [f64; N],
}

impl<const N: usize> Dual<N> {
    pub fn constant(x: f64) -> Self {
        Self { re: x, im: [0.0; N] }
    }

    /// Partial derivative in slot `k`.
    pub fn d(&self, k: usize) -> f64 {
        self.im[k]
    }
}

impl<const N: usize> Add for Dual<N> {
    type Output = Self;

    fn add(mut self, rhs: Self) -> Self {
        self.re += rhs.re;
        for k in 0..N {
            self.im[k] += rhs.im[k];
        }
        self
    }
}

impl<const N: usize> Sub for Dual<N> {
    type Output = Self;

    fn sub(mut self, rhs: Self) -> Self {
        self.re -= rhs.re;
        for k in 0..N {
            self.im[k] -= rhs.im[k];
        }
        self
    }
}

impl<const N: usize> Mul for Dual<N> {
    type Output = Self;

    fn mul(self, rhs: Self) -> Self {
        let mut im = [0.0; N];
        for k in 0..N {
            im[k] = self.im[k] * rhs.re + self.re * rhs.im[k];
        }
        Self { re: self.re * rhs.re, im }
    }
}

impl<const N: usize> Div for Dual<N> {
    type Output = Self;

    fn div(self, rhs: Self) -> Self {
        let inv = 1.0 / rhs.re;
        let re = self.re * inv;
        let mut im = [0.0; N];
        for k in 0..N {
            im[k] = (self.im[k] - re * rhs.im[k]) * inv;
        }
        Self { re, im }
    }
}

impl<const N: usize> Neg for Dual<N> {
    type Output = Self;

    fn neg(mut self) -> Self {
        self.re = -self.re;
        for k in 0..N {
            self.im[k] = -self.im[k];
        }
        self
    }
}

impl<const N: usize> AddAssign for Dual<N> {
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl<const N: usize> SubAssign for Dual<N> {
    fn sub_assign(&mut self, rhs: Self) {
        *self = *self - rhs;
    }
}

impl<const N: usize> MulAssign for Dual<N> {
    fn mul_assign(&mut self, rhs: Self) {
        *self = *self * rhs;
    }
}

impl<const N: usize> Scalar for Dual<N> {
    fn from_f64(x: f64) -> Self {
        Self::constant(x)
    }

    fn seed(x: f64, k: usize) -> Self {
        let mut d = Self::constant(x);
        d.im[k] = 1.0;
        d
    }

    fn value(&self) -> f64 {
        self.re
    }

    fn sqrt(self) -> Self {
        let s = self.re.sqrt();
        let c = 0.5 / s;
        let mut im = [0.0; N];
        for k in 0..N {
            im[k] = self.im[k] * c;
        }
        Self { re: s, im }
    }

    fn ln(self) -> Self {
        let inv = 1.0 / self.re;
        let mut im = [0.0; N];
        for k in 0..N {
            im[k] = self.im[k] * inv;
        }
        Self { re: self.re.ln(), im }
    }

    fn abs(self) -> Self {
        if self.re < 0.0 {
            -self
        } else {
            self
        }
    }

    fn powi(self, n: i32) -> Self {
        if n == 0 {
            return Self::constant(1.0);
        }
        let c = f64::from(n) * self.re.powi(n - 1);
        let mut im = [0.0; N];
        for k in 0..N {
            im[k] = self.im[k] * c;
        }
        Self { re: self.re.powi(n), im }
    }

    fn mul_f64(mut self, c: f64) -> Self {
        self.re *= c;
        for k in 0..N {
            self.im[k] *= c;
        }
        self
    }
}

#[cfg(test)]
mod tests {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;

    // f(x, y) = x^2 y + y / x + sqrt(x y) + ln(x) - |y| * x^3
    fn f<T: Scalar>(x: T, y: T) -> T {
        x * x * y + y / x + (x * y).sqrt() + x.ln() - y.abs() * x.powi(3)
    }

    fn df_dx(x: f64, y: f64) -> f64 {
        2.0 * x * y - y / (x * x) + 0.5 * y / (x * y).sqrt() + 1.0 / x
            - y.abs() * 3.0 * x * x
    }

    fn df_dy(x: f64, y: f64) -> f64 {
        x * x + 1.0 / x + 0.5 * x / (x * y).sqrt() - y.signum() * x.powi(3)
    }

    #[test]
    fn derivatives_match_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let x = rng.random_range(0.2..3.0);
            let y = rng.random_range(0.2..3.0);
            let r = f(Dual::<2>::seed(x, 0), Dual::<2>::seed(y, 1));
            assert!((r.re - f(x, y)).abs() <= 1e-12 * f(x, y).abs().max(1.0));
            let (gx, gy) = (df_dx(x, y), df_dy(x, y));
            assert!((r.d(0) - gx).abs() <= 1e-11 * gx.abs().max(1.0));
            assert!((r.d(1) - gy).abs() <= 1e-11 * gy.abs().max(1.0));
        }
    }

    #[test]
    fn constants_carry_no_derivative() {
        let c = Dual::<3>::constant(4.0);
        let x = Dual::<3>::seed(2.0, 1);
        let r = c * x + c;
        assert_eq!(r.re, 12.0);
        assert_eq!(r.im, [0.0, 4.0, 0.0]);
    }

    #[test]
    fn powi_zero_is_constant_one() {
        let x = Dual::<1>::seed(0.0, 0);
        let r = x.powi(0);
        assert_eq!(r.re, 1.0);
        assert_eq!(r.d(0), 0.0);
    }

    #[test]
    fn negative_branch_of_abs() {
        let x = Dual::<1>::seed(-1.5, 0);
        let r = x.abs();
        assert_eq!(r.re, 1.5);
        assert_eq!(r.d(0), -1.0);
    }
}
