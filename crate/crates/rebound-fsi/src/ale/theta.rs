//! Second-order three-substep theta time scheme.
//!
//! One step from `t` to `t + dt` runs an implicit solve over the fraction
//! `1 - theta` of the step, an explicit combination replacing the middle
//! substep, and a second implicit solve over the final fraction.  The
//! combination `a u_A + b u_n` with `a = (1 - f)/f`, `b = (2 f - 1)/f`
//! (`f` the substep fraction) is algebraically the forward step
//! `u_A + (1 - 2 f) dt F(u_A)` with `F` eliminated through the preceding
//! implicit relation, so only two nonlinear solves are needed per step.
//! Second order requires `f (2 - f) = 1/2`, i.e. `f = 1 - theta` with
//! `theta = 1/sqrt(2)`.

/// Time discretization parameters.
#[derive(Clone, Copy, Debug)]
pub struct GlowinskiSettings {
    /// Scheme parameter in (1/2, 1); `1/sqrt(2)` gives second order.
    pub theta: f64,
    /// Full step size (s).
    pub dt: f64,
    /// Final time (s).
    pub t_end: f64,
}

impl Default for GlowinskiSettings {
    fn default() -> Self {
        Self { theta: std::f64::consts::FRAC_1_SQRT_2, dt: 1e-4, t_end: 0.6 }
    }
}

impl GlowinskiSettings {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.theta > 0.5 && self.theta < 1.0) {
            return Err(format!("theta must lie in (1/2, 1), got {}", self.theta));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(format!("dt must be positive, got {}", self.dt));
        }
        if self.t_end < self.dt && self.t_end != 0.0 {
            return Err(format!("t_end {} is below one step dt {}", self.t_end, self.dt));
        }
        Ok(())
    }

    /// Fraction of `dt` covered by each implicit substep.
    pub fn substep_fraction(&self) -> f64 {
        1.0 - self.theta
    }

    /// Weights `(a, b)` of the explicit combination `a u_A + b u_n`.
    pub fn combination(&self) -> (f64, f64) {
        let f = self.substep_fraction();
        ((1.0 - f) / f, (2.0 * f - 1.0) / f)
    }
}

/// One scheme step for a scalar ODE `u' = rhs(u)`, with the implicit
/// substeps delegated to `solve(u_old, h)` returning `u` with
/// `u = u_old + h * rhs(u)`.
pub fn scalar_step(
    settings: &GlowinskiSettings,
    u: f64,
    mut solve: impl FnMut(f64, f64) -> f64,
) -> f64 {
    let h = settings.substep_fraction() * settings.dt;
    let (a, _) = settings.combination();
    let u_a = solve(u, h);
    // Incremental form of a u_a + b u: exact at fixed points.
    let u_b = u_a + (a - 1.0) * (u_a - u);
    solve(u_b, h)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn settings(dt: f64) -> GlowinskiSettings {
        GlowinskiSettings { dt, t_end: 1.0, ..GlowinskiSettings::default() }
    }

    /// Implicit substep for u' = -u: u = u_old / (1 + h).
    fn decay(u_old: f64, h: f64) -> f64 {
        u_old / (1.0 + h)
    }

    #[test]
    fn decay_step_matches_hand_arithmetic() {
        // u' = -u, u0 = 1, dt = 0.1: two implicit substeps over
        // (1 - 1/sqrt(2)) dt with the extrapolation in between.
        let u1 = scalar_step(&settings(0.1), 1.0, decay);
        assert!((u1 - 0.904800463641).abs() < 1e-10, "u1 = {u1}");
        // Close to exp(-0.1) = 0.904837...
        assert!((u1 - (-0.1f64).exp()).abs() < 5e-5);
    }

    #[test]
    fn fixed_point_of_zero_rhs() {
        let u1 = scalar_step(&settings(0.1), 3.5, |u_old, _| u_old);
        assert_eq!(u1, 3.5);
    }

    #[test]
    fn convergence_order_at_least_two() {
        let errs: Vec<f64> = [0.1, 0.05, 0.025]
            .iter()
            .map(|&dt| {
                let s = settings(dt);
                let n = (1.0 / dt).round() as usize;
                let mut u = 1.0;
                for _ in 0..n {
                    u = scalar_step(&s, u, decay);
                }
                (u - (-1.0f64).exp()).abs()
            })
            .collect();
        for w in errs.windows(2) {
            let order = (w[0] / w[1]).ln() / 2.0f64.ln();
            assert!(order >= 1.9, "observed order {order}");
        }
    }

    #[test]
    fn combination_weights_sum_to_one_and_extrapolate() {
        let s = settings(0.1);
        let (a, b) = s.combination();
        assert!((a + b - 1.0).abs() < 1e-14);
        // The middle substep is explicit, so the combination extrapolates.
        assert!(a > 1.0 && b < 0.0);
        assert!((a - (1.0 + std::f64::consts::SQRT_2)).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_settings() {
        assert!(settings(0.0).validate().is_err());
        let mut s = settings(0.1);
        s.theta = 0.4;
        assert!(s.validate().is_err());
        assert!(settings(0.1).validate().is_ok());
    }
}
