//! Direct time integration of the full equations of motion, Poincare-map
//! fixed points, Floquet multipliers and harmonic analysis. This is the
//! independent check on the averaged predictions.

use nalgebra::{Complex, Matrix4, Vector4};

use crate::error::{Error, Result};
use crate::generating::{self, Amplitudes, GeneratingBasis};
use crate::model::{full_rhs_with_omega, PhysState, ScreenParams};

/// Uniformly sampled solution of the full equations of motion.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<PhysState>,
    pub step: f64,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn max_abs_x1(&self) -> f64 {
        self.states.iter().fold(0.0f64, |m, s| m.max(s.x1.abs()))
    }

    pub fn max_abs_x2(&self) -> f64 {
        self.states.iter().fold(0.0f64, |m, s| m.max(s.x2.abs()))
    }
}

/// T-periodic orbit located by Poincare-map shooting.
#[derive(Debug, Clone)]
pub struct PeriodicOrbit {
    /// State at drive phase zero.
    pub initial: PhysState,
    pub period: f64,
    /// Fixed-point residual of the Poincare map.
    pub residual: f64,
    /// Floquet multipliers (eigenvalues of the monodromy approximation).
    pub floquet: [Complex<f64>; 4],
    /// Fourier coefficients c_0..c_kmax of x1 over one period.
    pub harmonics_x1: Vec<Complex<f64>>,
    /// Fourier coefficients c_0..c_kmax of x2 over one period.
    pub harmonics_x2: Vec<Complex<f64>>,
}

impl PeriodicOrbit {
    pub fn max_floquet_modulus(&self) -> f64 {
        self.floquet.iter().fold(0.0f64, |m, f| m.max(f.norm()))
    }

    pub fn asymptotically_stable(&self) -> bool {
        self.floquet.iter().all(|f| f.norm() < 1.0)
    }
}

fn rk4_step(t: f64, s: &PhysState, h: f64, p: &ScreenParams, omega: f64) -> PhysState {
    let add = |a: &PhysState, b: &PhysState, c: f64| {
        PhysState::new(a.x1 + c * b.x1, a.x2 + c * b.x2, a.v1 + c * b.v1, a.v2 + c * b.v2)
    };
    let k1 = full_rhs_with_omega(t, s, p, omega);
    let k2 = full_rhs_with_omega(t + 0.5 * h, &add(s, &k1, 0.5 * h), p, omega);
    let k3 = full_rhs_with_omega(t + 0.5 * h, &add(s, &k2, 0.5 * h), p, omega);
    let k4 = full_rhs_with_omega(t + h, &add(s, &k3, h), p, omega);
    PhysState::new(
        s.x1 + h / 6.0 * (k1.x1 + 2.0 * k2.x1 + 2.0 * k3.x1 + k4.x1),
        s.x2 + h / 6.0 * (k1.x2 + 2.0 * k2.x2 + 2.0 * k3.x2 + k4.x2),
        s.v1 + h / 6.0 * (k1.v1 + 2.0 * k2.v1 + 2.0 * k3.v1 + k4.v1),
        s.v2 + h / 6.0 * (k1.v2 + 2.0 * k2.v2 + 2.0 * k3.v2 + k4.v2),
    )
}

/// Advance one grid step, optionally splitting it at crossings of x1 = x2 so
/// that the integrator never steps across the stop kink.
fn grid_step(t: f64, s: &PhysState, h: f64, p: &ScreenParams, omega: f64, locate: bool) -> PhysState {
    if !locate {
        return rk4_step(t, s, h, p, omega);
    }
    let mut t_local = t;
    let mut state = *s;
    let mut remaining = h;
    let tol = h * 1e-6;
    // at most a handful of crossings fit inside one step
    for _ in 0..8 {
        if remaining <= 0.0 {
            break;
        }
        let trial = rk4_step(t_local, &state, remaining, p, omega);
        let before = state.x1 - state.x2;
        let after = trial.x1 - trial.x2;
        if before == 0.0 || after == 0.0 || before.signum() == after.signum() {
            state = trial;
            t_local += remaining;
            remaining = 0.0;
            break;
        }
        // bisect the substep length to land on the crossing
        let (mut lo, mut hi) = (0.0f64, remaining);
        while hi - lo > tol {
            let mid = 0.5 * (lo + hi);
            let probe = rk4_step(t_local, &state, mid, p, omega);
            let delta = probe.x1 - probe.x2;
            if delta == 0.0 || delta.signum() == before.signum() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let cut = hi;
        state = rk4_step(t_local, &state, cut, p, omega);
        t_local += cut;
        remaining -= cut;
    }
    if remaining > 0.0 {
        state = rk4_step(t_local, &state, remaining, p, omega);
    }
    state
}

fn check_step(p: &ScreenParams, h: f64) -> Result<(GeneratingBasis, f64)> {
    let b = GeneratingBasis::new(p)?;
    let max = b.period / 1024.0;
    if h.is_nan() || h <= 0.0 || h > max {
        return Err(Error::StepTooLarge { h, max });
    }
    Ok((b, b.omega1))
}

/// Classical fixed-step RK4 integration of the full equations of motion,
/// recording every grid point. The final partial step is shortened to land
/// exactly on `t1`.
pub fn integrate(p: &ScreenParams, s0: &PhysState, t0: f64, t1: f64, h: f64) -> Result<Trajectory> {
    integrate_opts(p, s0, t0, t1, h, false)
}

/// As [`integrate`], with optional switch localization: bisect crossings of
/// x1 = x2 inside each step to recover clean fourth order through the kink.
pub fn integrate_opts(
    p: &ScreenParams,
    s0: &PhysState,
    t0: f64,
    t1: f64,
    h: f64,
    locate_switches: bool,
) -> Result<Trajectory> {
    let (_, omega) = check_step(p, h)?;
    let span = t1 - t0;
    if span.is_nan() || span <= 0.0 {
        return Err(Error::InvalidParams("t1 must exceed t0".to_string()));
    }
    let full_steps = (span / h).floor() as usize;
    let mut times = Vec::with_capacity(full_steps + 2);
    let mut states = Vec::with_capacity(full_steps + 2);
    let mut s = *s0;
    times.push(t0);
    states.push(s);
    for i in 0..full_steps {
        let t = t0 + i as f64 * h;
        s = grid_step(t, &s, h, p, omega, locate_switches);
        times.push(t0 + (i + 1) as f64 * h);
        states.push(s);
    }
    let t_last = t0 + full_steps as f64 * h;
    if t1 - t_last > 1e-12 * span {
        s = grid_step(t_last, &s, t1 - t_last, p, omega, locate_switches);
        times.push(t1);
        states.push(s);
    }
    Ok(Trajectory { times, states, step: h })
}

/// Final state only, without storing the trajectory.
fn flow(p: &ScreenParams, s0: &PhysState, t0: f64, t1: f64, h: f64, omega: f64) -> PhysState {
    let span = t1 - t0;
    let full_steps = (span / h).floor() as usize;
    let mut s = *s0;
    for i in 0..full_steps {
        s = rk4_step(t0 + i as f64 * h, &s, h, p, omega);
    }
    let t_last = t0 + full_steps as f64 * h;
    if t1 - t_last > 1e-12 * span {
        s = rk4_step(t_last, &s, t1 - t_last, p, omega);
    }
    s
}

/// Stroboscopic map over exactly one drive period, anchored at phase zero.
pub fn poincare(p: &ScreenParams, s: &PhysState, h: f64) -> Result<PhysState> {
    let (b, omega) = check_step(p, h)?;
    Ok(flow(p, s, 0.0, b.period, h, omega))
}

const FIXED_POINT_TOL: f64 = 1e-8;
const FIXED_POINT_MAX_ITERS: usize = 30;

/// Newton shooting for a fixed point of the Poincare map, with Floquet
/// multipliers from the finite-difference monodromy and the harmonic table
/// of the converged orbit.
pub fn find_fixed_point(p: &ScreenParams, guess: &PhysState, h: f64) -> Result<PeriodicOrbit> {
    let (b, omega) = check_step(p, h)?;
    if p.eps == 0.0 {
        // every point of the generating flow is fixed; the shooting
        // Jacobian is singular
        return Err(Error::NoConvergence(
            "the unperturbed Poincare map is the identity; no isolated fixed point".to_string(),
        ));
    }
    let period = b.period;
    let mut s = Vector4::from_column_slice(&guess.to_array());

    let map = |v: &Vector4<f64>| -> Vector4<f64> {
        let out = flow(p, &PhysState::from_array([v[0], v[1], v[2], v[3]]), 0.0, period, h, omega);
        Vector4::from_column_slice(&out.to_array())
    };

    let mut monodromy = Matrix4::zeros();
    let mut residual = f64::INFINITY;
    let mut converged = false;
    for _ in 0..FIXED_POINT_MAX_ITERS {
        let ps = map(&s);
        let f = ps - s;
        residual = f.norm();
        // forward-difference monodromy, reusing the base evaluation
        let step = 1e-6 * (1.0 + s.norm());
        for col in 0..4 {
            let mut sp = s;
            sp[col] += step;
            monodromy.set_column(col, &((map(&sp) - ps) / step));
        }
        if residual <= FIXED_POINT_TOL {
            converged = true;
            break;
        }
        let jac = monodromy - Matrix4::identity();
        let delta = jac.lu().solve(&(-f)).ok_or(Error::SingularJacobian)?;
        if !delta.iter().all(|v| v.is_finite()) {
            return Err(Error::SingularJacobian);
        }
        s += delta;
    }
    if !converged {
        return Err(Error::NoConvergence(format!(
            "Poincare shooting residual {residual:.3e} after {FIXED_POINT_MAX_ITERS} iterations"
        )));
    }

    let initial = PhysState::from_array([s[0], s[1], s[2], s[3]]);
    let eig = monodromy.complex_eigenvalues();
    let orbit_traj = integrate(p, &initial, 0.0, period, h)?;
    let harmonics = fourier_harmonics(&orbit_traj, b.omega1, 4)?;
    Ok(PeriodicOrbit {
        initial,
        period,
        residual,
        floquet: [eig[0], eig[1], eig[2], eig[3]],
        harmonics_x1: harmonics.x1,
        harmonics_x2: harmonics.x2,
    })
}

/// Fourier coefficient table of both displacement signals over one period.
#[derive(Debug, Clone)]
pub struct HarmonicTable {
    /// c_0..c_kmax of x1.
    pub x1: Vec<Complex<f64>>,
    /// c_0..c_kmax of x2.
    pub x2: Vec<Complex<f64>>,
}

/// Discrete Fourier coefficients c_k = (2/N) sum x(t_j) exp(-i k w t_j)
/// (c_0 is the plain mean) of a trajectory spanning exactly one period.
pub fn fourier_harmonics(traj: &Trajectory, omega: f64, kmax: usize) -> Result<HarmonicTable> {
    let n_total = traj.times.len();
    if n_total < 2 {
        return Err(Error::BadSampling("trajectory too short".to_string()));
    }
    let span = traj.times[n_total - 1] - traj.times[0];
    let period = 2.0 * std::f64::consts::PI / omega;
    if (span / period - 1.0).abs() > 1e-6 {
        return Err(Error::BadSampling(format!(
            "trajectory spans {span:.6} but one period is {period:.6}"
        )));
    }
    // drop the duplicated endpoint sample
    let n = n_total - 1;
    if n < 1024 {
        return Err(Error::BadSampling(format!("need at least 1024 samples, got {n}")));
    }
    let dt = span / n as f64;
    for (i, w) in traj.times.windows(2).enumerate() {
        if ((w[1] - w[0]) - dt).abs() > 1e-9 * period {
            return Err(Error::BadSampling(format!("nonuniform step at sample {i}")));
        }
    }

    let mut x1 = Vec::with_capacity(kmax + 1);
    let mut x2 = Vec::with_capacity(kmax + 1);
    for k in 0..=kmax {
        let mut c1 = Complex::new(0.0, 0.0);
        let mut c2 = Complex::new(0.0, 0.0);
        for j in 0..n {
            let phase = -(k as f64) * omega * traj.times[j];
            let e = Complex::new(phase.cos(), phase.sin());
            c1 += traj.states[j].x1 * e;
            c2 += traj.states[j].x2 * e;
        }
        let scale = if k == 0 { 1.0 / n as f64 } else { 2.0 / n as f64 };
        x1.push(c1 * scale);
        x2.push(c2 * scale);
    }
    Ok(HarmonicTable { x1, x2 })
}

/// Closed-form displacement evaluator of the averaged prediction:
/// t -> (x1, x2) rows of the fundamental matrix applied to fixed amplitudes.
pub fn averaged_prediction(a: &Amplitudes, b: &GeneratingBasis) -> impl Fn(f64) -> (f64, f64) {
    let a = *a;
    let b = *b;
    move |t: f64| {
        let v = generating::from_amplitudes(t, &a, &b);
        (v[0], v[1])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use crate::generating::{momenta_to_state, omega_of_t};

    fn p0() -> ScreenParams {
        ScreenParams::p0()
    }

    #[test]
    fn step_too_large_rejected() {
        let p = p0();
        let b = GeneratingBasis::new(&p).unwrap();
        let err = integrate(&p, &PhysState::ZERO, 0.0, 1.0, b.period / 100.0);
        assert!(matches!(err, Err(Error::StepTooLarge { .. })));
    }

    #[test]
    fn linear_solution_matches_closed_form() {
        let mut p = p0();
        p.eps = 0.0;
        let b = GeneratingBasis::new(&p).unwrap();
        let a = Amplitudes::new(1.0, 0.0, 0.0, 0.0);
        let v0 = omega_of_t(0.0, &b) * a.to_vector();
        let s0 = momenta_to_state(&v0, &p);
        let h = b.period / 4096.0;
        let traj = integrate(&p, &s0, 0.0, 2.0 * b.period, h).unwrap();
        for (i, &t) in traj.times.iter().enumerate().step_by(512) {
            let v = omega_of_t(t, &b) * a.to_vector();
            let exact = momenta_to_state(&v, &p);
            let got = traj.states[i];
            let gap = (got.x1 - exact.x1).abs().max((got.x2 - exact.x2).abs());
            assert!(gap <= 1e-8, "gap {gap:e} at t = {t}");
        }
    }

    #[test]
    fn energy_conserved_when_unperturbed() {
        let mut p = p0();
        p.eps = 0.0;
        let b = GeneratingBasis::new(&p).unwrap();
        let energy = |s: &PhysState| {
            let m = &b.stiffness;
            0.5 * (p.m1 * s.v1 * s.v1 + p.m2 * s.v2 * s.v2)
                + 0.5 * (m.a11 * s.x1 * s.x1 + (m.a12 + m.a21) * s.x1 * s.x2 + m.a22 * s.x2 * s.x2)
        };
        let s0 = PhysState::new(0.3, -0.1, 0.2, 0.05);
        let e0 = energy(&s0);
        let traj = integrate(&p, &s0, 0.0, 10.0 * b.period, b.period / 4096.0).unwrap();
        for s in traj.states.iter().step_by(997) {
            assert_relative_eq!(energy(s), e0, max_relative = 1e-8);
        }
    }

    #[test]
    fn damped_free_system_decays() {
        let mut p = p0();
        p.r = 0.0;
        let b = GeneratingBasis::new(&p).unwrap();
        let s0 = PhysState::new(0.01, -0.005, 0.0, 0.002);
        let h = b.period / 2048.0;
        let mut s = s0;
        let mut prev = s0.norm();
        for _ in 0..5 {
            s = poincare(&p, &s, h).unwrap();
            let now = s.norm();
            assert!(now < prev, "norm grew: {now} >= {prev}");
            prev = now;
        }
    }

    #[test]
    fn rk4_order_smooth_regime() {
        let p = p0();
        let b = GeneratingBasis::new(&p).unwrap();
        let s0 = PhysState::new(0.1, 0.05, -0.02, 0.01);
        let t_end = b.period;
        let reference = flow(&p, &s0, 0.0, t_end, b.period / 65536.0, b.omega1);
        let coarse = flow(&p, &s0, 0.0, t_end, b.period / 4096.0, b.omega1);
        let fine = flow(&p, &s0, 0.0, t_end, b.period / 8192.0, b.omega1);
        let err = |s: &PhysState| {
            PhysState::new(
                s.x1 - reference.x1,
                s.x2 - reference.x2,
                s.v1 - reference.v1,
                s.v2 - reference.v2,
            )
            .norm()
        };
        let ratio = err(&coarse) / err(&fine);
        assert!(ratio > 10.0 && ratio < 24.0, "order ratio {ratio}");
    }

    #[test]
    fn rk4_order_with_stop_active() {
        let mut p = p0();
        p.k1_hat = 25.0;
        p.eps = 1e-2; // exaggerate the kink
        let b = GeneratingBasis::new(&p).unwrap();
        let s0 = PhysState::new(0.4, -0.3, 0.0, 0.1);
        let t_end = b.period;
        let reference = flow(&p, &s0, 0.0, t_end, b.period / 131072.0, b.omega1);
        let gap = |s: &PhysState| {
            ((s.x1 - reference.x1).powi(2)
                + (s.x2 - reference.x2).powi(2)
                + (s.v1 - reference.v1).powi(2)
                + (s.v2 - reference.v2).powi(2))
            .sqrt()
        };
        // the kink caps the local order at crossing steps and makes the
        // decay irregular between adjacent resolutions, so compare across a
        // 16x refinement with crossing localization enabled
        let run = |n: f64| {
            let t = integrate_opts(&p, &s0, 0.0, t_end, b.period / n, true).unwrap();
            gap(t.states.last().unwrap())
        };
        let coarse = run(1024.0);
        let fine = run(16384.0);
        assert!(coarse / fine >= 4.0, "nonsmooth refinement ratio {}", coarse / fine);
        assert!(fine <= 1e-7, "fine error {fine}");
    }

    #[test]
    fn switch_localization_agrees_with_plain_integration() {
        let mut p = p0();
        p.k1_hat = 25.0;
        let b = GeneratingBasis::new(&p).unwrap();
        let s0 = PhysState::new(0.4, -0.3, 0.0, 0.1);
        let h = b.period / 4096.0;
        let plain = integrate(&p, &s0, 0.0, b.period, h).unwrap();
        let located = integrate_opts(&p, &s0, 0.0, b.period, h, true).unwrap();
        assert_eq!(plain.len(), located.len());
        let last_p = plain.states.last().unwrap();
        let last_l = located.states.last().unwrap();
        assert!((last_p.x1 - last_l.x1).abs() <= 1e-8);
    }

    #[test]
    fn poincare_identity_and_linearity_at_eps_zero() {
        let mut p = p0();
        p.eps = 0.0;
        let b = GeneratingBasis::new(&p).unwrap();
        let h = b.period / 4096.0;
        let s = PhysState::new(0.2, -0.1, 0.05, 0.3);
        let ps = poincare(&p, &s, h).unwrap();
        let gap = PhysState::new(ps.x1 - s.x1, ps.x2 - s.x2, ps.v1 - s.v1, ps.v2 - s.v2).norm();
        assert!(gap <= 1e-8, "identity gap {gap:e}");

        let scaled = PhysState::new(3.0 * s.x1, 3.0 * s.x2, 3.0 * s.v1, 3.0 * s.v2);
        let p_scaled = poincare(&p, &scaled, h).unwrap();
        let lin_gap = PhysState::new(
            p_scaled.x1 - 3.0 * ps.x1,
            p_scaled.x2 - 3.0 * ps.x2,
            p_scaled.v1 - 3.0 * ps.v1,
            p_scaled.v2 - 3.0 * ps.v2,
        )
        .norm();
        assert!(lin_gap <= 1e-8, "linearity gap {lin_gap:e}");
    }

    #[test]
    fn fixed_point_rejects_unperturbed_system() {
        let mut p = p0();
        p.eps = 0.0;
        let b = GeneratingBasis::new(&p).unwrap();
        let res = find_fixed_point(&p, &PhysState::new(0.1, 0.0, 0.0, 0.0), b.period / 2048.0);
        assert!(matches!(res, Err(Error::NoConvergence(_))));
    }

    #[test]
    fn fourier_pure_sine() {
        let p = p0();
        let b = GeneratingBasis::new(&p).unwrap();
        let n = 2048usize;
        let dt = b.period / n as f64;
        let times: Vec<f64> = (0..=n).map(|i| i as f64 * dt).collect();
        let states: Vec<PhysState> = times
            .iter()
            .map(|&t| PhysState::new((b.omega1 * t).sin(), 0.0, 0.0, 0.0))
            .collect();
        let traj = Trajectory { times, states, step: dt };
        let table = fourier_harmonics(&traj, b.omega1, 4).unwrap();
        assert_relative_eq!(table.x1[1].norm(), 1.0, max_relative = 1e-10);
        assert!(table.x1[2].norm() <= 1e-10);
        assert!(table.x1[0].norm() <= 1e-12);
    }

    #[test]
    fn fourier_rejects_bad_sampling() {
        let p = p0();
        let b = GeneratingBasis::new(&p).unwrap();
        let n = 512usize;
        let dt = b.period / n as f64;
        let times: Vec<f64> = (0..=n).map(|i| i as f64 * dt).collect();
        let states = vec![PhysState::ZERO; times.len()];
        let traj = Trajectory { times, states, step: dt };
        assert!(matches!(
            fourier_harmonics(&traj, b.omega1, 4),
            Err(Error::BadSampling(_))
        ));
    }

    #[test]
    fn averaged_prediction_rows() {
        let p = p0();
        let b = GeneratingBasis::new(&p).unwrap();
        let zero_fn = averaged_prediction(&Amplitudes::ZERO, &b);
        assert_eq!(zero_fn(1.7), (0.0, 0.0));

        let a1c = -0.0394237;
        let f = averaged_prediction(&Amplitudes::new(a1c, 0.0, 0.0, 0.0), &b);
        for &t in &[0.0, 0.9, 4.2] {
            let (x1, x2) = f(t);
            let s = (5f64.sqrt() / 4.0 * t).sin();
            assert_relative_eq!(x1, -11.0 * a1c * s, epsilon = 1e-12, max_relative = 1e-12);
            assert_relative_eq!(x2, -121.0 / 16.0 * a1c * s, epsilon = 1e-12, max_relative = 1e-12);
        }

        // second-block coefficient on x2 is -a11 + m1*omega2^2 = 11/4
        let g = averaged_prediction(&Amplitudes::new(0.0, 0.0, 1.0, 0.0), &b);
        let t = 0.6;
        let (_, x2) = g(t);
        assert_relative_eq!(x2, 11.0 / 4.0 * (5f64.sqrt() / 2.0 * t).sin(), max_relative = 1e-12);
    }
    /// The Floquet verdict from shooting must agree with the averaged
    /// stability certificate across stop stiffnesses.
    #[test]
    fn stability_consistency_across_stop_stiffness() {
        use crate::averaging::{self, AveragedField, QuadratureField};
        for k1 in [0.0, 5.0, 25.0] {
            let mut p = p0();
            p.k1_hat = k1;
            let b = GeneratingBasis::new(&p).unwrap();
            let field = QuadratureField::new(p, b);
            let coeffs = averaging::coefficients(&p, &b);
            let seed = averaging::analytic_zero(&coeffs).unwrap();
            let zero = averaging::newton_zero(&field, &seed).unwrap();
            assert!(field.eval(&zero).unwrap().amax() <= 1e-9);
            let cert = averaging::stability_certificate(&field, &zero).unwrap();
            let s0 = generating::momenta_to_state(&generating::from_amplitudes(0.0, &zero, &b), &p);
            let orbit = find_fixed_point(&p, &s0, b.period / 8192.0).unwrap();
            assert_eq!(
                orbit.max_floquet_modulus() < 1.0,
                cert.stable,
                "verdicts disagree at k1_hat = {k1}"
            );
        }
    }

    /// Iterating the stroboscopic map from a perturbed start contracts
    /// geometrically with ratio close to the largest Floquet modulus.
    #[test]
    fn transient_contracts_at_floquet_rate() {
        let mut p = p0();
        p.eps = 1e-2; // faster contraction keeps the test short
        let b = GeneratingBasis::new(&p).unwrap();
        let h = b.period / 8192.0;
        let s_star = {
            use crate::averaging::{self, QuadratureField};
            let field = QuadratureField::new(p, b);
            let coeffs = averaging::coefficients(&p, &b);
            let zero = averaging::newton_zero(&field, &averaging::analytic_zero(&coeffs).unwrap()).unwrap();
            let seed = generating::momenta_to_state(&generating::from_amplitudes(0.0, &zero, &b), &p);
            find_fixed_point(&p, &seed, h).unwrap()
        };
        let rho = s_star.max_floquet_modulus();
        let mut s = s_star.initial;
        s.x1 += 1e-2;
        let err = |s: &PhysState| {
            ((s.x1 - s_star.initial.x1).powi(2)
                + (s.x2 - s_star.initial.x2).powi(2)
                + (s.v1 - s_star.initial.v1).powi(2)
                + (s.v2 - s_star.initial.v2).powi(2))
            .sqrt()
        };
        // burn in so the error aligns with the slowest-decaying direction
        for _ in 0..20 {
            s = poincare(&p, &s, h).unwrap();
        }
        let e0 = err(&s);
        let mut ratios = Vec::new();
        for _ in 0..10 {
            s = poincare(&p, &s, h).unwrap();
            ratios.push(err(&s));
        }
        let mean_ratio = (ratios.last().unwrap() / e0).powf(1.0 / ratios.len() as f64);
        assert!(
            (mean_ratio / rho - 1.0).abs() <= 0.05,
            "contraction {mean_ratio} vs Floquet {rho}"
        );
    }
}
