use thiserror::Error;

/// Errors raised by the analysis and simulation pipelines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("generating frequencies coincide; the two-frequency basis is degenerate")]
    ResonanceDegenerate,
    #[error("generating system is not oscillatory (lambda^2 = {0} is not strictly negative)")]
    NotOscillatory(f64),
    #[error("no real stiffness satisfies the resonance condition (radicand {0} < 0)")]
    NoRealSolution(f64),
    #[error("fundamental matrix numerically singular at t = {t} (residual {residual:.3e})")]
    SingularBasis { t: f64, residual: f64 },
    #[error("switching function crosses zero tangentially near t = {0}; averaging hypotheses violated")]
    TangentialCrossing(f64),
    #[error("amplitude vector is zero; switching times are undefined")]
    ZeroAmplitude,
    #[error("averaged coefficients degenerate (alpha = beta = 0); no isolated zero")]
    DegenerateCoefficients,
    #[error("iteration did not converge: {0}")]
    NoConvergence(String),
    #[error("singular Jacobian in Newton iteration")]
    SingularJacobian,
    #[error("integration step {h} too large (must not exceed {max})")]
    StepTooLarge { h: f64, max: f64 },
    #[error("bad sampling for harmonic analysis: {0}")]
    BadSampling(String),
    #[error("unknown averaged-field strategy `{0}`")]
    UnknownField(String),
}

pub type Result<T> = std::result::Result<T, Error>;
