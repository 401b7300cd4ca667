//! Analysis and simulation of a two-mass resonant screen with a one-sided
//! elastic stop.
//!
//! The weakly nonlinear system is reduced to the averaging standard form;
//! the averaged vector field is evaluated in closed form and by quadrature,
//! its zeros are located and certified stable, and everything is
//! cross-validated against direct time integration (Poincare map, Floquet
//! multipliers, Fourier harmonics).

pub mod averaging;
pub mod config;
pub mod error;
pub mod generating;
pub mod model;
pub mod quadrature;
pub mod simulator;

pub use error::{Error, Result};
pub use generating::{Amplitudes, GeneratingBasis, StiffnessMatrix};
pub use model::{PhysState, ScreenParams};
