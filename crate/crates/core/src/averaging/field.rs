//! Interchangeable averaged-field strategies: the closed-form affine field
//! (valid at zero stop stiffness) and the piecewise quadrature field, both
//! behind one trait and selectable by name.

use nalgebra::Vector4;

use crate::error::{Error, Result};
use crate::generating::{Amplitudes, GeneratingBasis};
use crate::model::ScreenParams;

use super::{average_numeric, coefficients, h0_closed, AveragedCoeffs};

/// A realization of the averaged vector field h-bar.
pub trait AveragedField {
    fn name(&self) -> &'static str;
    fn eval(&self, a: &Amplitudes) -> Result<Vector4<f64>>;
}

/// Names accepted by [`make_field`].
pub const FIELD_NAMES: [&str; 2] = ["closed", "quadrature"];

/// Look up a field strategy by name.
///
/// `closed` evaluates the affine closed form (the stop stiffness is
/// ignored); `quadrature` averages the standard-form field numerically and
/// honors the stop.
pub fn make_field(name: &str, p: &ScreenParams, b: &GeneratingBasis) -> Result<Box<dyn AveragedField>> {
    match name {
        "closed" => Ok(Box::new(ClosedFormField::new(coefficients(p, b)))),
        "quadrature" => Ok(Box::new(QuadratureField::new(*p, *b))),
        other => Err(Error::UnknownField(other.to_string())),
    }
}

/// The affine averaged field evaluated from closed-form coefficients.
#[derive(Debug, Clone)]
pub struct ClosedFormField {
    coeffs: AveragedCoeffs,
}

impl ClosedFormField {
    pub fn new(coeffs: AveragedCoeffs) -> Self {
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &AveragedCoeffs {
        &self.coeffs
    }
}

impl AveragedField for ClosedFormField {
    fn name(&self) -> &'static str {
        "closed"
    }

    fn eval(&self, a: &Amplitudes) -> Result<Vector4<f64>> {
        Ok(h0_closed(a, &self.coeffs))
    }
}

/// The averaged field computed by piecewise Gauss-Legendre quadrature.
#[derive(Debug, Clone)]
pub struct QuadratureField {
    params: ScreenParams,
    basis: GeneratingBasis,
}

impl QuadratureField {
    pub fn new(params: ScreenParams, basis: GeneratingBasis) -> Self {
        Self { params, basis }
    }
}

impl AveragedField for QuadratureField {
    fn name(&self) -> &'static str {
        "quadrature"
    }

    fn eval(&self, a: &Amplitudes) -> Result<Vector4<f64>> {
        average_numeric(a, &self.params, &self.basis)
    }
}

/// Adapter turning a plain closure into a field, for tests and synthetic
/// examples.
pub struct FnField<F: Fn(&Amplitudes) -> Vector4<f64>> {
    f: F,
}

impl<F: Fn(&Amplitudes) -> Vector4<f64>> FnField<F> {
    pub fn new(f: F) -> Self {
        Self { f }
    }
}

impl<F: Fn(&Amplitudes) -> Vector4<f64>> AveragedField for FnField<F> {
    fn name(&self) -> &'static str {
        "fn"
    }

    fn eval(&self, a: &Amplitudes) -> Result<Vector4<f64>> {
        Ok((self.f)(a))
    }
}
