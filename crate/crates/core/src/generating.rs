//! The generating linear system: stiffness matrix, eigenfrequencies,
//! periodicity/resonance conditions, the fundamental matrix and the
//! amplitude change of variables.

use nalgebra::{Matrix4, Vector4};

use crate::error::{Error, Result};
use crate::model::{ramp, PhysState, ScreenParams};

/// Relative tolerance for the resonance ratio check.
pub const RESONANCE_TOL: f64 = 1e-9;

/// The 2x2 stiffness matrix of the generating system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StiffnessMatrix {
    pub a11: f64,
    pub a12: f64,
    pub a21: f64,
    pub a22: f64,
}

impl StiffnessMatrix {
    pub fn of_screen(p: &ScreenParams) -> Self {
        Self {
            a11: p.k0_bar,
            a12: -p.k0_bar,
            a21: -p.k0_bar,
            a22: p.k0_bar + p.k2_bar,
        }
    }
}

/// Periodicity condition on the generating system: a21*a12 < a11*a22.
pub fn check_periodicity(m: &StiffnessMatrix) -> bool {
    m.a21 * m.a12 < m.a11 * m.a22
}

/// Angular frequencies of the generating system, ordered omega1 < omega2.
pub fn eigenfrequencies(m: &StiffnessMatrix, m1: f64, m2: f64) -> Result<(f64, f64)> {
    let half_trace = 0.5 * (m.a22 / m2 + m.a11 / m1);
    let disc = 0.25 * (m.a22 / m2 - m.a11 / m1).powi(2) + m.a21 * m.a12 / (m1 * m2);
    if disc < 0.0 {
        // complex lambda^2: not a pair of pure oscillators
        return Err(Error::NotOscillatory(disc));
    }
    let root = disc.sqrt();
    let lambda_sq_hi = -half_trace + root; // closer to zero
    let lambda_sq_lo = -half_trace - root;
    if lambda_sq_hi >= 0.0 {
        return Err(Error::NotOscillatory(lambda_sq_hi));
    }
    let omega1 = (-lambda_sq_hi).sqrt();
    let omega2 = (-lambda_sq_lo).sqrt();
    if omega1 == omega2 {
        return Err(Error::ResonanceDegenerate);
    }
    Ok((omega1, omega2))
}

/// Drive frequency omega = omega1 computed directly from the leading
/// stiffnesses; NaN when the parameters admit no oscillatory basis.
pub fn drive_frequency(p: &ScreenParams) -> f64 {
    let m = StiffnessMatrix::of_screen(p);
    let half_trace = 0.5 * (m.a22 / p.m2 + m.a11 / p.m1);
    let disc = 0.25 * (m.a22 / p.m2 - m.a11 / p.m1).powi(2) + m.a21 * m.a12 / (p.m1 * p.m2);
    (half_trace - disc.sqrt()).sqrt()
}

/// Leading frame stiffness that locks the frequencies into omega2 = l*omega1.
pub fn k2_for_resonance(m1: f64, m2: f64, k0_bar: f64, l: u32) -> Result<f64> {
    let l2 = (l as f64) * (l as f64);
    let radicand = (1.0 - l2).powi(2) - 4.0 * l2 * m1 / m2;
    if radicand < 0.0 {
        return Err(Error::NoRealSolution(radicand));
    }
    let root = (1.0 + l2) - radicand.sqrt();
    Ok(k0_bar * (m2 / m1) * root * root / (4.0 * l2))
}

/// Amplitude coordinates multiplying the columns of the fundamental matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Amplitudes {
    pub a1c: f64,
    pub a1s: f64,
    pub a2c: f64,
    pub a2s: f64,
}

impl Amplitudes {
    pub const ZERO: Self = Self { a1c: 0.0, a1s: 0.0, a2c: 0.0, a2s: 0.0 };

    pub fn new(a1c: f64, a1s: f64, a2c: f64, a2s: f64) -> Self {
        Self { a1c, a1s, a2c, a2s }
    }

    pub fn to_vector(self) -> Vector4<f64> {
        Vector4::new(self.a1c, self.a1s, self.a2c, self.a2s)
    }

    pub fn from_vector(v: &Vector4<f64>) -> Self {
        Self::new(v[0], v[1], v[2], v[3])
    }

    pub fn norm(&self) -> f64 {
        self.to_vector().norm()
    }
}

/// Immutable generating basis: stiffness matrix, frequencies and period.
#[derive(Debug, Clone, Copy)]
pub struct GeneratingBasis {
    pub stiffness: StiffnessMatrix,
    pub m1: f64,
    pub m2: f64,
    pub omega1: f64,
    pub omega2: f64,
    /// Averaging period, 2*pi / omega1.
    pub period: f64,
}

impl GeneratingBasis {
    pub fn new(p: &ScreenParams) -> Result<Self> {
        p.validate()?;
        let stiffness = StiffnessMatrix::of_screen(p);
        if !check_periodicity(&stiffness) {
            return Err(Error::InvalidParams(
                "periodicity condition a21*a12 < a11*a22 fails".to_string(),
            ));
        }
        if stiffness.a12 == 0.0 {
            return Err(Error::InvalidParams("a12 must be nonzero".to_string()));
        }
        let (omega1, omega2) = eigenfrequencies(&stiffness, p.m1, p.m2)?;
        Ok(Self {
            stiffness,
            m1: p.m1,
            m2: p.m2,
            omega1,
            omega2,
            period: 2.0 * std::f64::consts::PI / omega1,
        })
    }

    /// x2-row coefficient for frequency block i: -a11 + m1 * omega_i^2.
    pub fn mode_shape(&self, omega: f64) -> f64 {
        -self.stiffness.a11 + self.m1 * omega * omega
    }

    /// True iff omega2 = l * omega1 to relative tolerance.
    pub fn resonance_check(&self, l: u32) -> bool {
        (self.omega2 - l as f64 * self.omega1).abs() <= RESONANCE_TOL * self.omega1
    }
}

/// True iff the screen's generating frequencies satisfy omega2 = l*omega1.
pub fn resonance_check(p: &ScreenParams, l: u32) -> Result<bool> {
    Ok(GeneratingBasis::new(p)?.resonance_check(l))
}

/// Fundamental matrix of the generating system; columns span the
/// (x1, x2, y1, y2) solutions of the two frequency blocks.
pub fn omega_of_t(t: f64, b: &GeneratingBasis) -> Matrix4<f64> {
    let a12 = b.stiffness.a12;
    let b1 = b.mode_shape(b.omega1);
    let b2 = b.mode_shape(b.omega2);
    let (s1, c1) = (b.omega1 * t).sin_cos();
    let (s2, c2) = (b.omega2 * t).sin_cos();
    Matrix4::new(
        a12 * s1,
        a12 * c1,
        a12 * s2,
        a12 * c2,
        b1 * s1,
        b1 * c1,
        b2 * s2,
        b2 * c2,
        b.m1 * b.omega1 * a12 * c1,
        -b.m1 * b.omega1 * a12 * s1,
        b.m1 * b.omega2 * a12 * c2,
        -b.m1 * b.omega2 * a12 * s2,
        b.m2 * b.omega1 * b1 * c1,
        -b.m2 * b.omega1 * b1 * s1,
        b.m2 * b.omega2 * b2 * c2,
        -b.m2 * b.omega2 * b2 * s2,
    )
}

/// Numerical inverse of the fundamental matrix, checked against
/// ||Omega * N - I||_inf <= 1e-10.
pub fn omega_inverse_of_t(t: f64, b: &GeneratingBasis) -> Result<Matrix4<f64>> {
    let omega = omega_of_t(t, b);
    let inv = omega
        .try_inverse()
        .ok_or(Error::SingularBasis { t, residual: f64::INFINITY })?;
    let residual = (omega * inv - Matrix4::identity()).abs().max();
    if residual > 1e-10 {
        return Err(Error::SingularBasis { t, residual });
    }
    Ok(inv)
}

/// Coefficient matrix C of the first-order generating system
/// (x1, x2, y1, y2)' = C (x1, x2, y1, y2).
pub fn linear_field_matrix(b: &GeneratingBasis) -> Matrix4<f64> {
    let m = &b.stiffness;
    Matrix4::new(
        0.0, 0.0, 1.0 / b.m1, 0.0, //
        0.0, 0.0, 0.0, 1.0 / b.m2, //
        -m.a11, -m.a12, 0.0, 0.0, //
        -m.a21, -m.a22, 0.0, 0.0,
    )
}

/// Amplitude coordinates of a momentum-space state: u = Omega(t)^-1 v.
pub fn to_amplitudes(t: f64, v: &Vector4<f64>, b: &GeneratingBasis) -> Result<Amplitudes> {
    let inv = omega_inverse_of_t(t, b)?;
    Ok(Amplitudes::from_vector(&(inv * v)))
}

/// Momentum-space state of amplitude coordinates: v = Omega(t) u.
pub fn from_amplitudes(t: f64, a: &Amplitudes, b: &GeneratingBasis) -> Vector4<f64> {
    omega_of_t(t, b) * a.to_vector()
}

/// Conversion (x1, x2, v1, v2) -> (x1, x2, y1, y2); the momentum correction
/// from the stop is O(eps^2).
pub fn state_to_momenta(s: &PhysState, p: &ScreenParams) -> Vector4<f64> {
    let q = p.eps * p.k1_hat * ramp(s.x1 - s.x2);
    Vector4::new(
        s.x1,
        s.x2,
        p.m1 * s.v1 + p.eps * q,
        p.m2 * s.v2 - p.eps * q,
    )
}

/// Inverse of [`state_to_momenta`].
pub fn momenta_to_state(v: &Vector4<f64>, p: &ScreenParams) -> PhysState {
    let q = p.eps * p.k1_hat * ramp(v[0] - v[1]);
    PhysState::new(
        v[0],
        v[1],
        (v[2] - p.eps * q) / p.m1,
        (v[3] + p.eps * q) / p.m2,
    )
}

/// Exact perturbation g of the first-order system v' = Cv + eps * g(t, v, eps)
/// in (x1, x2, y1, y2) coordinates.
pub fn perturbed_g(t: f64, v: &Vector4<f64>, eps: f64, p: &ScreenParams, b: &GeneratingBasis) -> Vector4<f64> {
    let d = v[0] - v[1];
    let q = eps * p.k1_hat * ramp(d); // q1 = -q2
    let vel1 = (v[2] - eps * q) / p.m1;
    let vel2 = (v[3] + eps * q) / p.m2;
    let dd = vel1 - vel2;
    let (sin_wt, cos_wt) = (b.omega1 * t).sin_cos();
    let eta = p.r * cos_wt;
    let eta_rate = -p.r * b.omega1 * sin_wt;
    let k0 = p.k0_bar + eps * p.k0_tilde;
    let k2 = p.k2_bar + eps * p.k2_tilde;
    // O(eps) drive correction from k0 * eta and eps * k0 * eta' in the
    // equations of motion (eta = eps * eta_tilde / k0_bar).
    let drive_corr = eps * (p.k0_tilde * eta + k0 * eta_rate) / p.k0_bar;
    let g3 = -p.k1_hat * ramp(d) - p.k0_tilde * d - k0 * dd + eta + drive_corr;
    let g4 = p.k1_hat * ramp(d) + p.k0_tilde * d + k0 * dd - eta - drive_corr
        - p.k2_tilde * v[1]
        - k2 * vel2;
    Vector4::new(-q / p.m1, q / p.m2, g3, g4)
}

/// Exact first-order field v' = Cv + eps * g(t, v, eps).
pub fn first_order_rhs(t: f64, v: &Vector4<f64>, eps: f64, p: &ScreenParams, b: &GeneratingBasis) -> Vector4<f64> {
    linear_field_matrix(b) * v + eps * perturbed_g(t, v, eps, p, b)
}
