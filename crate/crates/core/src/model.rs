//! Physical model of the two-mass screen: parameters, equations of motion,
//! the one-sided elastic stop and the first-order perturbation force.

use crate::error::{Error, Result};
use crate::generating;

/// Physical constants of the screen.
///
/// Stiffnesses split into a leading part (`*_bar`) and an `eps`-scaled
/// detuning (`*_tilde`); the stop stiffness is `eps * k1_hat` and the drive
/// amplitude fed to the base spring is `eps * r / k0_bar`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScreenParams {
    /// Mass of the sieve body (kg).
    pub m1: f64,
    /// Mass of the frame body (kg).
    pub m2: f64,
    /// Leading stiffness of the coupling spring (N/m).
    pub k0_bar: f64,
    /// Leading stiffness of the frame spring (N/m).
    pub k2_bar: f64,
    /// Detuning of the coupling spring (N/m, any sign).
    pub k0_tilde: f64,
    /// Detuning of the frame spring (N/m, any sign).
    pub k2_tilde: f64,
    /// Stop stiffness coefficient (N/m, >= 0).
    pub k1_hat: f64,
    /// Drive amplitude (N, >= 0).
    pub r: f64,
    /// Perturbation scale, 0 <= eps < 1.
    pub eps: f64,
    /// Intended resonance ratio omega2 / omega1 (positive integer).
    pub l: u32,
}

impl ScreenParams {
    /// Reference parameter set: 1:2 internal resonance, weak stop, weak drive.
    pub fn p0() -> Self {
        Self {
            m1: 11.0,
            m2: 64.0,
            k0_bar: 11.0,
            k2_bar: 25.0,
            k0_tilde: 0.0,
            k2_tilde: 0.0,
            k1_hat: 0.0,
            r: 10.0,
            eps: 1e-3,
            l: 2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidParams(what.to_string()));
        if !(self.m1 > 0.0 && self.m1.is_finite()) {
            return bad("m1 must be positive");
        }
        if !(self.m2 > 0.0 && self.m2.is_finite()) {
            return bad("m2 must be positive");
        }
        if !(self.k0_bar > 0.0 && self.k0_bar.is_finite()) {
            return bad("k0_bar must be positive");
        }
        if !(self.k2_bar > 0.0 && self.k2_bar.is_finite()) {
            return bad("k2_bar must be positive");
        }
        if !(self.k1_hat >= 0.0 && self.k1_hat.is_finite()) {
            return bad("k1_hat must be nonnegative");
        }
        if !(self.r >= 0.0 && self.r.is_finite()) {
            return bad("r must be nonnegative");
        }
        if !(self.eps >= 0.0 && self.eps < 1.0) {
            return bad("eps must lie in [0, 1)");
        }
        if !self.k0_tilde.is_finite() || !self.k2_tilde.is_finite() {
            return bad("stiffness detunings must be finite");
        }
        if self.l == 0 {
            return bad("l must be a positive integer");
        }
        Ok(())
    }
}

/// Displacements and velocities of both bodies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysState {
    pub x1: f64,
    pub x2: f64,
    pub v1: f64,
    pub v2: f64,
}

impl PhysState {
    pub const ZERO: Self = Self { x1: 0.0, x2: 0.0, v1: 0.0, v2: 0.0 };

    pub fn new(x1: f64, x2: f64, v1: f64, v2: f64) -> Self {
        Self { x1, x2, v1, v2 }
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.x1, self.x2, self.v1, self.v2]
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        Self::new(a[0], a[1], a[2], a[3])
    }

    pub fn norm(&self) -> f64 {
        (self.x1 * self.x1 + self.x2 * self.x2 + self.v1 * self.v1 + self.v2 * self.v2).sqrt()
    }
}

/// One-sided stop characteristic: force proportional to max{0, d}.
#[inline]
pub fn ramp(d: f64) -> f64 {
    d.max(0.0)
}

/// Drive signal scaled to O(1): r * cos(omega1 * t).
pub fn drive(t: f64, p: &ScreenParams) -> f64 {
    let omega = generating::drive_frequency(p);
    p.r * (omega * t).cos()
}

/// Full equations of motion, exactly as written, returned as
/// (x1', x2', v1', v2').
pub fn full_rhs(t: f64, s: &PhysState, p: &ScreenParams) -> PhysState {
    let omega = generating::drive_frequency(p);
    full_rhs_with_omega(t, s, p, omega)
}

/// Same as [`full_rhs`] but with the drive frequency precomputed, for use
/// inside integration loops.
pub fn full_rhs_with_omega(t: f64, s: &PhysState, p: &ScreenParams, omega: f64) -> PhysState {
    let eps = p.eps;
    let k0 = p.k0_bar + eps * p.k0_tilde;
    let k2 = p.k2_bar + eps * p.k2_tilde;
    let d = s.x1 - s.x2;
    let dd = s.v1 - s.v2;
    // Base excitation eta(t) = eps * eta_tilde(t) / k0_bar.
    let (sin_wt, cos_wt) = (omega * t).sin_cos();
    let eta = eps * p.r * cos_wt / p.k0_bar;
    let eta_dot = -eps * p.r * omega * sin_wt / p.k0_bar;
    // Stop force P(d) = eps * k1_hat * max{0, d} and its derivative.
    let stop = eps * p.k1_hat * ramp(d);
    let stop_rate = if d > 0.0 { eps * p.k1_hat } else { 0.0 };

    let a1 = (-eps * stop_rate * dd + eps * k0 * (eta_dot - dd) - stop + k0 * (eta - d)) / p.m1;
    let a2 = (eps * stop_rate * dd - eps * k2 * s.v2 - eps * k0 * (eta_dot - dd) + stop
        - k2 * s.x2
        - k0 * (eta - d))
        / p.m2;
    PhysState::new(s.v1, s.v2, a1, a2)
}

/// First-order (in eps) perturbation force (F01, F02), so that
/// m_i * x_i'' = -(M x)_i + eps * F0_i + O(eps^2).
pub fn perturbation_force(t: f64, s: &PhysState, p: &ScreenParams) -> (f64, f64) {
    let eta = drive(t, p);
    perturbation_force_with_drive(s, p, eta)
}

pub(crate) fn perturbation_force_with_drive(s: &PhysState, p: &ScreenParams, eta: f64) -> (f64, f64) {
    let d = s.x1 - s.x2;
    let dd = s.v1 - s.v2;
    let f1 = -p.k1_hat * ramp(d) - p.k0_tilde * d - p.k0_bar * dd + eta;
    let f2 = p.k1_hat * ramp(d) + p.k0_tilde * d + p.k0_bar * dd
        - eta
        - p.k2_tilde * s.x2
        - p.k2_bar * s.v2;
    (f1, f2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use proptest::prelude::*;

    #[test]
    fn ramp_examples() {
        assert_eq!(ramp(0.0), 0.0);
        assert_eq!(ramp(-3.5), 0.0);
        assert_eq!(ramp(2.25), 2.25);
    }

    proptest! {
        #[test]
        fn ramp_properties(x in -1e6f64..1e6, y in -1e6f64..1e6) {
            // nonnegative, 1-Lipschitz, and ramp(x) - ramp(-x) = x
            prop_assert!(ramp(x) >= 0.0);
            prop_assert!((ramp(x) - ramp(y)).abs() <= (x - y).abs());
            prop_assert_eq!(ramp(x) - ramp(-x), x);
        }
    }

    #[test]
    fn drive_examples() {
        let p = ScreenParams::p0();
        let omega = generating::drive_frequency(&p);
        assert_relative_eq!(drive(0.0, &p), 10.0, max_relative = 1e-14);
        assert_abs_diff_eq!(drive(std::f64::consts::FRAC_PI_2 / omega, &p), 0.0, epsilon = 1e-12);
        let t_period = 2.0 * std::f64::consts::PI / omega;
        assert_relative_eq!(drive(t_period, &p), 10.0, max_relative = 1e-12);
    }

    #[test]
    fn full_rhs_equilibrium_unforced() {
        let mut p = ScreenParams::p0();
        p.r = 0.0;
        let d = full_rhs(1.3, &PhysState::ZERO, &p);
        assert_eq!(d.to_array(), [0.0; 4]);
    }

    #[test]
    fn full_rhs_linear_part() {
        let mut p = ScreenParams::p0();
        p.eps = 0.0;
        let d = full_rhs(0.0, &PhysState::new(1.0, 0.0, 0.0, 0.0), &p);
        assert_relative_eq!(d.v1, -1.0, max_relative = 1e-14);
        assert_relative_eq!(d.v2, 11.0 / 64.0, max_relative = 1e-14);

        let d = full_rhs(0.0, &PhysState::new(1.0, 2.0, 0.0, 0.0), &p);
        assert_relative_eq!(d.v1, 1.0, max_relative = 1e-14);
        assert_relative_eq!(d.v2, -61.0 / 64.0, max_relative = 1e-14);
    }

    #[test]
    fn perturbation_force_examples() {
        let p = ScreenParams::p0();
        let omega = generating::drive_frequency(&p);
        let (f1, f2) =
            perturbation_force(std::f64::consts::FRAC_PI_2 / omega, &PhysState::ZERO, &p);
        assert_abs_diff_eq!(f1, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(f2, 0.0, epsilon = 1e-12);

        let (f1, f2) = perturbation_force(0.0, &PhysState::ZERO, &p);
        assert_relative_eq!(f1, 10.0, max_relative = 1e-14);
        assert_relative_eq!(f2, -10.0, max_relative = 1e-14);

        let mut p = ScreenParams::p0();
        p.r = 0.0;
        p.k1_hat = 25.0;
        let (f1, f2) = perturbation_force(0.7, &PhysState::new(1.0, 0.0, 0.0, 0.0), &p);
        assert_relative_eq!(f1, -25.0, max_relative = 1e-14);
        assert_relative_eq!(f2, 25.0, max_relative = 1e-14);
    }

    #[test]
    fn full_rhs_lipschitz() {
        // crude Lipschitz bound from the parameter magnitudes
        let p = ScreenParams::p0();
        let lip = 80.0;
        let mut rng_state = 0x9e3779b97f4a7c15u64;
        let mut next = move || {
            rng_state = rng_state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((rng_state >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        };
        for _ in 0..200 {
            let a = PhysState::new(next(), next(), next(), next());
            let b = PhysState::new(next(), next(), next(), next());
            let fa = full_rhs(0.4, &a, &p);
            let fb = full_rhs(0.4, &b, &p);
            let df = PhysState::new(fa.x1 - fb.x1, fa.x2 - fb.x2, fa.v1 - fb.v1, fa.v2 - fb.v2);
            let ds = PhysState::new(a.x1 - b.x1, a.x2 - b.x2, a.v1 - b.v1, a.v2 - b.v2);
            assert!(df.norm() <= lip * ds.norm());
        }
    }

    #[test]
    fn expansion_consistency_quadratic_in_eps() {
        // || acceleration - (-Mx/m + eps/m * F0) || <= C * eps^2
        let base = ScreenParams::p0();
        let states = [
            PhysState::new(0.3, -0.2, 0.1, 0.4),
            PhysState::new(-0.5, 0.7, -0.3, 0.2),
            PhysState::new(1.0, 0.9, -1.0, 0.5),
        ];
        let mut errs = Vec::new();
        for &eps in &[1e-2, 1e-3, 1e-4] {
            let mut p = base;
            p.eps = eps;
            p.k1_hat = 25.0;
            p.k0_tilde = 2.0;
            p.k2_tilde = -1.0;
            let mut worst: f64 = 0.0;
            for s in &states {
                let d = full_rhs(0.3, s, &p);
                let (f1, f2) = perturbation_force(0.3, s, &p);
                let mx1 = p.k0_bar * (s.x1 - s.x2);
                let mx2 = -p.k0_bar * s.x1 + (p.k0_bar + p.k2_bar) * s.x2;
                let e1 = d.v1 - (-mx1 + eps * f1) / p.m1;
                let e2 = d.v2 - (-mx2 + eps * f2) / p.m2;
                worst = worst.max(e1.hypot(e2));
            }
            errs.push(worst / (eps * eps));
        }
        // the eps^2-normalized error must stay bounded (quadratic decay)
        let cap = errs[0] * 4.0 + 1e-9;
        assert!(errs.iter().all(|&e| e <= cap), "errs = {errs:?}");
    }
}
