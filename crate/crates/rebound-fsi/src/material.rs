//! Constitutive laws: compressible neo-Hookean solid, Newtonian fluid
//! stress, and the artificial elasticity that steers fluid mesh motion.

use crate::fem::algebra::M2;
use crate::fem::scalar::Scalar;

/// Physical parameters of one fluid-structure run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MaterialParams {
    /// Fluid density (kg/m^3).
    pub rho_f: f64,
    /// Solid density per reference volume (kg/m^3).
    pub rho_s0: f64,
    /// Dynamic viscosity (Pa s).
    pub mu: f64,
    /// Elastic shear modulus (Pa).
    pub g_shear: f64,
    /// Elastic bulk modulus (Pa); near-incompressible at 20x shear.
    pub kappa: f64,
}

impl Default for MaterialParams {
    fn default() -> Self {
        let g_shear = 5.0e4;
        Self { rho_f: 1.0, rho_s0: 1000.0, mu: 0.1, g_shear, kappa: 20.0 * g_shear }
    }
}

impl MaterialParams {
    pub fn validate(&self) -> Result<(), String> {
        for (name, v) in [
            ("rho_f", self.rho_f),
            ("rho_s", self.rho_s0),
            ("mu", self.mu),
            ("G", self.g_shear),
            ("kappa", self.kappa),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(format!("{name} must be positive, got {v}"));
            }
        }
        Ok(())
    }
}

/// Artificial elasticity controlling fluid mesh displacement.  Small cells
/// get stiff, so refined regions move nearly rigidly while coarse cells
/// absorb the deformation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PseudoSolidParams {
    /// Artificial Poisson ratio (dimensionless, slightly auxetic).
    pub nu_a: f64,
}

impl Default for PseudoSolidParams {
    fn default() -> Self {
        Self { nu_a: -0.02 }
    }
}

impl PseudoSolidParams {
    /// Cell stiffness from its area: E_a = 10 / V^(9/8).
    pub fn stiffness(&self, area: f64) -> f64 {
        assert!(area > 0.0, "pseudo-solid stiffness needs a positive cell area");
        10.0 / area.powf(9.0 / 8.0)
    }

    /// Per-cell Lame pair `(mu_a, lambda_a)` from the cell area.
    pub fn lame(&self, area: f64) -> (f64, f64) {
        let e_a = self.stiffness(area);
        let nu = self.nu_a;
        let mu_a = e_a / (2.0 * (1.0 + nu));
        let lambda_a = nu * e_a / ((1.0 - nu) * (1.0 - 2.0 * nu));
        (mu_a, lambda_a)
    }
}

/// First Piola-Kirchhoff stress of the compressible neo-Hookean solid:
/// `P = G (F - F^-T) + kappa (J - 1) J F^-T` with `J = det F`.
pub fn piola_compressible<T: Scalar>(f: M2<T>, g_shear: f64, kappa: f64) -> M2<T> {
    let j = f.det();
    debug_assert!(j.value() > 0.0, "nonpositive deformation jacobian");
    let f_inv_t = f.inv().t();
    let volumetric = (j - T::from_f64(1.0)) * j;
    (f - f_inv_t).mul_f64(g_shear) + f_inv_t.scale(volumetric).mul_f64(kappa)
}

/// Cauchy stress of the incompressible Newtonian fluid:
/// `T = -p I + 2 mu D` with `D = (grad v + grad v^T) / 2` in the current
/// configuration.
pub fn cauchy_fluid<T: Scalar>(grad_v: M2<T>, p: T, mu: f64) -> M2<T> {
    grad_v.sym().mul_f64(2.0 * mu) - M2::identity().scale(p)
}

/// First Piola-Kirchhoff stress of the incompressible neo-Hookean solid,
/// `P = G F + p J F^-T`, parametrized by the multiplier's deviation
/// `q = p + G` from its stress-free value:
/// `P = G (F - J F^-T) + q J F^-T`.  Both summands vanish exactly at
/// `F = I`, `q = 0`, so a resting body yields a bitwise-zero residual
/// instead of shear-modulus-times-epsilon rounding noise.
pub fn piola_incompressible<T: Scalar>(f: M2<T>, q_shift: T, g_shear: f64) -> M2<T> {
    let j = f.det();
    debug_assert!(j.value() > 0.0, "nonpositive deformation jacobian");
    let jf_inv_t = f.inv().t().scale(j);
    (f - jf_inv_t).mul_f64(g_shear) + jf_inv_t.scale(q_shift)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn max_abs(m: M2<f64>) -> f64 {
        m.0.iter().flatten().fold(0.0f64, |a, v| a.max(v.abs()))
    }

    #[test]
    fn reference_state_is_stress_free() {
        let p = piola_compressible(M2::identity(), 5.0e4, 1.0e6);
        assert_eq!(max_abs(p), 0.0);
    }

    #[test]
    fn simple_shear_stress_is_symmetric_shear() {
        // F = [[1, g], [0, 1]] keeps J = 1, so only the shear term remains:
        // F - F^-T = [[0, g], [g, 0]].
        let gamma = 0.3;
        let f = M2([[1.0, gamma], [0.0, 1.0]]);
        let p = piola_compressible(f, 5.0e4, 1.0e6);
        assert!((p.0[0][1] - 5.0e4 * gamma).abs() < 1e-9);
        assert!((p.0[1][0] - 5.0e4 * gamma).abs() < 1e-9);
        assert!(p.0[0][0].abs() < 1e-9 && p.0[1][1].abs() < 1e-9);
    }

    #[test]
    fn isotropic_dilation_matches_scalar_arithmetic() {
        // F = 1.1 I, G = 5e4, kappa = 1e6:
        // P = (G (1.1 - 1/1.1) + kappa 0.21 * 1.21 / 1.1) I = 240545.4545... I
        let p = piola_compressible(M2([[1.1, 0.0], [0.0, 1.1]]), 5.0e4, 1.0e6);
        let want = 5.0e4 * (1.1 - 1.0 / 1.1) + 1.0e6 * 0.21 * 1.21 / 1.1;
        assert!((want - 240545.454545).abs() < 1e-5);
        assert!((p.0[0][0] - want).abs() < 1e-9 * want);
        assert!((p.0[1][1] - want).abs() < 1e-9 * want);
        assert!(p.0[0][1].abs() < 1e-9 && p.0[1][0].abs() < 1e-9);
    }

    #[test]
    fn shifted_multiplier_matches_direct_incompressible_stress() {
        // P = G F + p J F^-T with p = q - G, against the shifted form.
        let g_shear = 5.0e4;
        let f = M2([[1.2, 0.3], [-0.1, 0.9]]);
        let q = 1234.5;
        let p_mult = q - g_shear;
        let j = f.det();
        let fit = f.inv().t();
        let direct = f.mul_f64(g_shear) + fit.mul_f64(p_mult * j);
        let shifted = piola_incompressible(f, q, g_shear);
        for r in 0..2 {
            for c in 0..2 {
                assert!((direct.0[r][c] - shifted.0[r][c]).abs() < 1e-9 * g_shear);
            }
        }
        // Rest state: exactly zero, not epsilon-scaled noise.
        assert_eq!(max_abs(piola_incompressible(M2::identity(), 0.0, g_shear)), 0.0);
    }

    #[test]
    fn fluid_stress_conventions() {
        // Still fluid: pure pressure.
        let t = cauchy_fluid(M2::zero(), 3.0, 0.7);
        assert_eq!(t.0, [[-3.0, 0.0], [0.0, -3.0]]);
        // Rigid rotation rate: antisymmetric gradient carries no stress.
        let t = cauchy_fluid(M2([[0.0, 1.0], [-1.0, 0.0]]), 0.0, 0.7);
        assert_eq!(max_abs(t), 0.0);
        // Simple shear: off-diagonal mu s from the half-symmetrization.
        let s = 2.5;
        let t = cauchy_fluid(M2([[0.0, s], [0.0, 0.0]]), 0.0, 0.7);
        assert!((t.0[0][1] - 0.7 * s).abs() < 1e-14);
        assert!((t.0[1][0] - 0.7 * s).abs() < 1e-14);
    }

    #[test]
    fn pseudo_solid_coefficients() {
        let ps = PseudoSolidParams::default();
        // V = 0.01: E_a = 10 / 0.01^(9/8) = 10^(1 + 2.25) = 10^3.25.
        let e_a = ps.stiffness(0.01);
        assert!((e_a - 10f64.powf(3.25)).abs() < 1e-9 * e_a);
        let (mu_a, lambda_a) = ps.lame(0.01);
        assert!((mu_a - e_a / 1.96).abs() < 1e-9 * e_a);
        // lambda_a = nu E_a / ((1 - nu)(1 - 2 nu)) with nu = -0.02.
        assert!((lambda_a - (-0.02) * e_a / (1.02 * 1.04)).abs() < 1e-9 * e_a);
        assert!(lambda_a < 0.0);
        // Stiffness grows as cells shrink.
        assert!(ps.stiffness(1e-6) > ps.stiffness(1e-2));
    }
}
