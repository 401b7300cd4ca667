//! Reduction to the averaging standard form, the averaged vector field
//! (closed-form and by quadrature), its zeros, and the stability certificate.

pub mod field;

use std::sync::OnceLock;

use nalgebra::{Complex, Matrix4, Vector4};

use crate::error::{Error, Result};
use crate::generating::{self, Amplitudes, GeneratingBasis};
use crate::model::ScreenParams;
use crate::quadrature::GaussLegendre;

pub use field::{make_field, AveragedField, ClosedFormField, FnField, QuadratureField, FIELD_NAMES};

/// Coefficients of the averaged affine field at zero stop stiffness,
/// in the 1/T normalization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AveragedCoeffs {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub sigma: f64,
    pub mu: f64,
}

impl AveragedCoeffs {
    /// The same coefficients rescaled by a positive factor (e.g. the period,
    /// to recover the T-integral normalization).
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            alpha: self.alpha * factor,
            beta: self.beta * factor,
            gamma: self.gamma * factor,
            sigma: self.sigma * factor,
            mu: self.mu * factor,
        }
    }

    /// Damping condition for an attracting zero: alpha > 0 and gamma > 0.
    pub fn damping_positive(&self) -> bool {
        self.alpha > 0.0 && self.gamma > 0.0
    }
}

/// Closed-form averaged coefficients for the 1:2 resonance.
pub fn coefficients(p: &ScreenParams, b: &GeneratingBasis) -> AveragedCoeffs {
    let w = b.omega1;
    let (m1, m2) = (p.m1, p.m2);
    let (k0b, k2b) = (p.k0_bar, p.k2_bar);
    let (k0t, k2t) = (p.k0_tilde, p.k2_tilde);
    let w2 = w * w;
    let w3 = w2 * w;
    let w4 = w2 * w2;
    let alpha = w / 6.0 * (k0b * k2b / (m1 * m2 * w3) - k0b / (m1 * w) - (k0b + k2b) / (m2 * w) + 4.0 * w);
    let beta = w / 6.0
        * (4.0 * k0t / k0b + k0b * k2t / (m1 * m2 * w4) - k0t / (m1 * w2) - (k0t + k2t) / (m2 * w2));
    let gamma = w / 6.0
        * (4.0 * k0b / (m1 * w) + 4.0 * k0b / (m2 * w) + 4.0 * k2b / (m2 * w)
            - k0b * k2b / (m1 * m2 * w3)
            - 4.0 * w);
    let sigma = w / 6.0
        * (2.0 * k0t / (m1 * w2) + 2.0 * k0t / (m2 * w2) + 2.0 * k2t / (m2 * w2)
            - 2.0 * k0t / k0b
            - k0b * k2t / (2.0 * m1 * m2 * w4));
    let mu = (1.0 / (6.0 * m1 * w3)) * (1.0 / m1 + 1.0 / m2) * p.r - 2.0 / (3.0 * k0b * m1 * w) * p.r;
    AveragedCoeffs { alpha, beta, gamma, sigma, mu }
}

/// The averaged affine field at zero stop stiffness.
pub fn h0_closed(a: &Amplitudes, c: &AveragedCoeffs) -> Vector4<f64> {
    Vector4::new(
        -c.alpha * a.a1c - c.beta * a.a1s + c.mu,
        c.beta * a.a1c - c.alpha * a.a1s,
        -c.gamma * a.a2c - c.sigma * a.a2s,
        c.sigma * a.a2c - c.gamma * a.a2s,
    )
}

/// Exact Jacobian of [`h0_closed`]: two rotation-plus-decay blocks.
pub fn h0_jacobian(c: &AveragedCoeffs) -> Matrix4<f64> {
    Matrix4::new(
        -c.alpha, -c.beta, 0.0, 0.0, //
        c.beta, -c.alpha, 0.0, 0.0, //
        0.0, 0.0, -c.gamma, -c.sigma, //
        0.0, 0.0, c.sigma, -c.gamma,
    )
}

/// The unique zero of the affine averaged field.
pub fn analytic_zero(c: &AveragedCoeffs) -> Result<Amplitudes> {
    let denom = c.alpha * c.alpha + c.beta * c.beta;
    if denom == 0.0 {
        return Err(Error::DegenerateCoefficients);
    }
    Ok(Amplitudes::new(c.mu * c.alpha / denom, c.mu * c.beta / denom, 0.0, 0.0))
}

/// Standard-form right-hand side f with A' = eps * f(t, A, eps):
/// f = Omega(t)^-1 g evaluated on the generating state Omega(t) A.
pub fn standard_rhs(
    t: f64,
    a: &Amplitudes,
    eps: f64,
    p: &ScreenParams,
    b: &GeneratingBasis,
) -> Result<Vector4<f64>> {
    let omega = generating::omega_of_t(t, b);
    let v = omega * a.to_vector();
    let g = generating::perturbed_g(t, &v, eps, p, b);
    omega
        .lu()
        .solve(&g)
        .ok_or(Error::SingularBasis { t, residual: f64::INFINITY })
}

/// Relative displacement x1 - x2 of the generating solution with amplitudes
/// `a`, and its time derivative.
pub fn switching_function(t: f64, a: &Amplitudes, b: &GeneratingBasis) -> (f64, f64) {
    let c1 = b.stiffness.a12 - b.mode_shape(b.omega1);
    let c2 = b.stiffness.a12 - b.mode_shape(b.omega2);
    let (s1, co1) = (b.omega1 * t).sin_cos();
    let (s2, co2) = (b.omega2 * t).sin_cos();
    let value = c1 * (a.a1c * s1 + a.a1s * co1) + c2 * (a.a2c * s2 + a.a2s * co2);
    let deriv = c1 * b.omega1 * (a.a1c * co1 - a.a1s * s1) + c2 * b.omega2 * (a.a2c * co2 - a.a2s * s2);
    (value, deriv)
}

/// Time interval of one period during which the stop is engaged; the
/// switching function is positive on (t1, t2) and crosses zero
/// transversally at both ends. `t2` may exceed the period when the active
/// interval wraps around the period boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwitchingInterval {
    pub t1: f64,
    pub t2: f64,
}

const SWITCH_SCAN_SAMPLES: usize = 4096;
const SWITCH_TIME_TOL: f64 = 1e-12;

/// All simple zeros of the switching function on [0, T), sorted.
pub fn switching_zeros(a: &Amplitudes, b: &GeneratingBasis) -> Result<Vec<f64>> {
    let amp_norm = a.norm();
    if amp_norm == 0.0 {
        return Err(Error::ZeroAmplitude);
    }
    let period = b.period;
    let n = SWITCH_SCAN_SAMPLES;
    let dt = period / n as f64;
    let samples: Vec<f64> = (0..=n)
        .map(|i| switching_function(i as f64 * dt, a, b).0)
        .collect();
    let amp = samples.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
    if amp == 0.0 {
        // identically zero on the grid: grazing contact everywhere
        return Err(Error::TangentialCrossing(0.0));
    }
    let near_zero = 1e-12 * amp;

    let mut zeros: Vec<f64> = Vec::new();
    for i in 0..n {
        let (fa, fb) = (samples[i], samples[i + 1]);
        if fa.abs() <= near_zero {
            // grid point sits on a zero: polish with Newton
            let mut t = i as f64 * dt;
            for _ in 0..5 {
                let (v, d) = switching_function(t, a, b);
                if d == 0.0 {
                    break;
                }
                t -= v / d;
            }
            zeros.push(t.rem_euclid(period));
            continue;
        }
        if fb.abs() <= near_zero {
            continue; // handled as the left endpoint of the next cell
        }
        if fa.signum() != fb.signum() {
            let (mut lo, mut hi) = (i as f64 * dt, (i + 1) as f64 * dt);
            let mut flo = fa;
            while hi - lo > SWITCH_TIME_TOL {
                let mid = 0.5 * (lo + hi);
                let fm = switching_function(mid, a, b).0;
                if fm == 0.0 {
                    lo = mid;
                    hi = mid;
                    break;
                }
                if flo.signum() == fm.signum() {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            zeros.push((0.5 * (lo + hi)).rem_euclid(period));
        }
    }

    zeros.sort_by(|x, y| x.partial_cmp(y).unwrap());
    zeros.dedup_by(|x, y| (*x - *y).abs() < 1e-9 || (period - (*x - *y).abs()) < 1e-9);

    for &z in &zeros {
        let (_, deriv) = switching_function(z, a, b);
        if deriv.abs() <= 1e-9 * amp_norm {
            return Err(Error::TangentialCrossing(z));
        }
    }
    Ok(zeros)
}

/// Engagement intervals of the stop over one period. Empty when the
/// switching function never changes sign.
pub fn switching_times(a: &Amplitudes, p: &ScreenParams, b: &GeneratingBasis) -> Result<Vec<SwitchingInterval>> {
    let _ = p;
    let zeros = switching_zeros(a, b)?;
    if zeros.is_empty() {
        return Ok(Vec::new());
    }
    let mut intervals = Vec::new();
    for &z in &zeros {
        let (_, deriv) = switching_function(z, a, b);
        if deriv > 0.0 {
            // entering crossing; find the matching exit
            let exit = zeros
                .iter()
                .copied()
                .filter(|&w| w > z)
                .find(|&w| switching_function(w, a, b).1 < 0.0)
                .unwrap_or_else(|| {
                    // wraps past the period boundary
                    zeros
                        .iter()
                        .copied()
                        .find(|&w| switching_function(w, a, b).1 < 0.0)
                        .map(|w| w + b.period)
                        .unwrap_or(z + b.period)
                });
            intervals.push(SwitchingInterval { t1: z, t2: exit });
        }
    }
    Ok(intervals)
}

fn quad_rule() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(16))
}

/// Minimum number of quadrature panels covering a full period.
const PANELS_PER_PERIOD: f64 = 32.0;

/// Period mean of the standard-form field at eps = 0, split at the switching
/// times so that each quadrature panel sees an analytic integrand.
pub fn average_numeric(a: &Amplitudes, p: &ScreenParams, b: &GeneratingBasis) -> Result<Vector4<f64>> {
    let period = b.period;
    let mut breaks = vec![0.0, period];
    if p.k1_hat != 0.0 && a.norm() > 0.0 {
        breaks.extend(switching_zeros(a, b)?);
        breaks.sort_by(|x, y| x.partial_cmp(y).unwrap());
        breaks.dedup_by(|x, y| (*x - *y).abs() < 1e-12);
    }

    let rule = quad_rule();
    let mut total = Vector4::zeros();
    for pair in breaks.windows(2) {
        let (lo, hi) = (pair[0], pair[1]);
        if hi - lo < 1e-12 {
            continue;
        }
        let panels = ((hi - lo) / (period / PANELS_PER_PERIOD)).ceil().max(1.0) as usize;
        total += rule.integrate_panels::<Vector4<f64>, _>(lo, hi, panels, |t| {
            standard_rhs(t, a, 0.0, p, b).unwrap_or_else(|_| Vector4::repeat(f64::NAN))
        });
    }
    if total.iter().any(|v| !v.is_finite()) {
        return Err(Error::SingularBasis { t: f64::NAN, residual: f64::INFINITY });
    }
    Ok(total / period)
}

/// Central finite-difference Jacobian of an averaged field.
pub fn fd_jacobian(field: &dyn AveragedField, a: &Amplitudes) -> Result<Matrix4<f64>> {
    let step = 1e-6 * (1.0 + a.norm());
    let mut jac = Matrix4::zeros();
    let base = a.to_vector();
    for col in 0..4 {
        let mut hi = base;
        let mut lo = base;
        hi[col] += step;
        lo[col] -= step;
        let fhi = field.eval(&Amplitudes::from_vector(&hi))?;
        let flo = field.eval(&Amplitudes::from_vector(&lo))?;
        jac.set_column(col, &((fhi - flo) / (2.0 * step)));
    }
    Ok(jac)
}

const NEWTON_TOL: f64 = 1e-10;
const NEWTON_MAX_ITERS: usize = 50;

/// Newton zero of an averaged field with finite-difference Jacobian.
pub fn newton_zero(field: &dyn AveragedField, a_init: &Amplitudes) -> Result<Amplitudes> {
    let mut a = *a_init;
    for _ in 0..NEWTON_MAX_ITERS {
        let f = field.eval(&a)?;
        if f.norm() <= NEWTON_TOL {
            return Ok(a);
        }
        let jac = fd_jacobian(field, &a)?;
        let step = jac.lu().solve(&(-f)).ok_or(Error::SingularJacobian)?;
        if !step.iter().all(|v| v.is_finite()) {
            return Err(Error::SingularJacobian);
        }
        a = Amplitudes::from_vector(&(a.to_vector() + step));
    }
    Err(Error::NoConvergence(format!(
        "Newton did not reach residual {NEWTON_TOL:.0e} in {NEWTON_MAX_ITERS} iterations"
    )))
}

/// Zero of the averaged field together with its linearization spectrum.
#[derive(Debug, Clone)]
pub struct StabilityCertificate {
    pub zero: Amplitudes,
    pub jacobian: Matrix4<f64>,
    pub eigenvalues: [Complex<f64>; 4],
    /// All eigenvalue real parts negative.
    pub stable: bool,
    pub residual: f64,
}

impl StabilityCertificate {
    pub fn max_real_part(&self) -> f64 {
        self.eigenvalues.iter().fold(f64::NEG_INFINITY, |m, e| m.max(e.re))
    }
}

/// Certify a zero of the averaged field: negative real parts of the
/// linearization spectrum imply an asymptotically stable periodic orbit.
pub fn stability_certificate(field: &dyn AveragedField, a_star: &Amplitudes) -> Result<StabilityCertificate> {
    let residual = field.eval(a_star)?.norm();
    let jacobian = fd_jacobian(field, a_star)?;
    let eig = jacobian.complex_eigenvalues();
    let eigenvalues = [eig[0], eig[1], eig[2], eig[3]];
    let stable = eigenvalues.iter().all(|e| e.re < 0.0);
    Ok(StabilityCertificate { zero: *a_star, jacobian, eigenvalues, stable, residual })
}

/// One point of the continuation of the averaged zero in the stop stiffness.
#[derive(Debug, Clone)]
pub struct ContinuationPoint {
    pub k1_hat: f64,
    pub zero: Amplitudes,
    pub certificate: StabilityCertificate,
}

/// Continuation path with an optional truncation marker (the first stop
/// stiffness at which Newton failed).
#[derive(Debug, Clone)]
pub struct Continuation {
    pub points: Vec<ContinuationPoint>,
    pub failed_at: Option<f64>,
}

/// Continue the averaged zero from zero stop stiffness up to `k1_max`,
/// seeding each Newton solve from the previous zero.
pub fn continue_zero(p: &ScreenParams, b: &GeneratingBasis, k1_max: f64, steps: usize) -> Result<Continuation> {
    let grid: Vec<f64> = if k1_max <= 0.0 || steps == 0 {
        vec![0.0]
    } else {
        (0..=steps).map(|i| k1_max * i as f64 / steps as f64).collect()
    };

    let mut seed = analytic_zero(&coefficients(p, b))?;
    let mut points = Vec::with_capacity(grid.len());
    let mut failed_at = None;
    for &k1 in &grid {
        let mut pk = *p;
        pk.k1_hat = k1;
        let field = QuadratureField::new(pk, *b);
        match newton_zero(&field, &seed) {
            Ok(zero) => {
                let certificate = stability_certificate(&field, &zero)?;
                seed = zero;
                points.push(ContinuationPoint { k1_hat: k1, zero, certificate });
            }
            Err(Error::NoConvergence(_)) | Err(Error::SingularJacobian) => {
                failed_at = Some(k1);
                break;
            }
            Err(e) => return Err(e),
        }
    }
    Ok(Continuation { points, failed_at })
}

/// One evaluated applicability condition.
#[derive(Debug, Clone)]
pub struct Condition {
    pub name: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// Report of every applicability condition of the averaging analysis.
#[derive(Debug, Clone)]
pub struct ConditionReport {
    pub conditions: Vec<Condition>,
}

impl ConditionReport {
    pub fn all_hold(&self) -> bool {
        self.conditions.iter().all(|c| c.holds)
    }
}

/// Evaluate the nondegeneracy conditions: generating periodicity, internal
/// resonance, drive periodicity, averaged damping, and the stop-coupling
/// nondegeneracy.
pub fn check_nondegeneracy(p: &ScreenParams, b: &GeneratingBasis) -> ConditionReport {
    let m = &b.stiffness;
    let c = coefficients(p, b);
    let w = b.omega1;
    let couple_lhs = p.m1 * p.m2 * w * w;
    let couple_rhs = p.k0_bar * (p.m1 + p.m2);
    let drive_gap = (crate::model::drive(0.37 + b.period, p) - crate::model::drive(0.37, p)).abs();
    let conditions = vec![
        Condition {
            name: "generating_periodicity",
            lhs: m.a21 * m.a12,
            rhs: m.a11 * m.a22,
            holds: generating::check_periodicity(m),
        },
        Condition {
            name: "internal_resonance",
            lhs: b.omega2,
            rhs: p.l as f64 * b.omega1,
            holds: b.resonance_check(p.l),
        },
        Condition {
            name: "drive_periodicity",
            lhs: drive_gap,
            rhs: 1e-9 * (1.0 + p.r),
            holds: drive_gap <= 1e-9 * (1.0 + p.r),
        },
        Condition { name: "alpha_positive", lhs: c.alpha, rhs: 0.0, holds: c.alpha > 0.0 },
        Condition { name: "gamma_positive", lhs: c.gamma, rhs: 0.0, holds: c.gamma > 0.0 },
        Condition {
            name: "stop_coupling_nondegenerate",
            lhs: couple_lhs,
            rhs: couple_rhs,
            holds: (couple_lhs - couple_rhs).abs() > 1e-9 * couple_lhs.abs().max(couple_rhs.abs()),
        },
    ];
    ConditionReport { conditions }
}
