//! Augmented-Lagrangian wall contact.
//!
//! The pointwise height above the wall, `g = Y + u_y`, is kept nonnegative
//! by the potential `l(g, lambda) = lambda g + (rho/2) g^2` on the active
//! branch `lambda + rho g <= 0` and `-lambda^2 / (2 rho)` on the inactive
//! one.  The potential is C1 across the switch, so the residual entering
//! the assembled system is continuous; the Jacobian has a bounded jump
//! there (semismooth Newton handles it).  At a converged state either
//! `g = 0` (active) or `lambda = 0` (inactive), which is exact
//! complementarity; `lambda` is the compressive contact pressure and stays
//! nonpositive.

use crate::fem::Scalar;

/// Whether the pair sits on the contact-active branch.
#[inline]
pub fn active(g: f64, lambda: f64, rho: f64) -> bool {
    lambda + rho * g <= 0.0
}

/// `dl/dg`: the downward contact traction entering the vertical momentum
/// rows.  Negative in contact (the wall pushes the body up through the
/// weak form sign), zero when separated.
pub fn force<T: Scalar>(g: T, lambda: T, rho: f64) -> T {
    if active(g.value(), lambda.value(), rho) {
        lambda + g.mul_f64(rho)
    } else {
        T::zero()
    }
}

/// `dl/dlambda`: the multiplier equation.  In contact it enforces `g = 0`;
/// separated it drives `lambda` to zero with the `1/rho` regularization
/// that keeps the multiplier block nonsingular.
pub fn residual<T: Scalar>(g: T, lambda: T, rho: f64) -> T {
    if active(g.value(), lambda.value(), rho) {
        g
    } else {
        lambda.mul_f64(-1.0 / rho)
    }
}
