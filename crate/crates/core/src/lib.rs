//! Worldsheet geometry, Euler-class integration and topological energy
//! spectra for closed bosonic strings on a Minkowski background.
//!
//! The crate is organized around a small pipeline:
//!
//! * [`config`] — string configurations (zero modes plus a finite list of
//!   oscillation modes), the transverse embedding `X^I(τ,σ)` in light-cone
//!   gauge, its exact derivatives and the light-cone constraint checks.
//! * [`geometry`] — the conformal factor `g_σσ` of the induced metric with
//!   closed-form derivatives, the Euler-class density, the spin connection
//!   of the orthonormal coframe and the null-patch charts.
//! * [`integrate`] — three mutually checking integrators for the Euler form
//!   (principal-value area quadrature, Stokes boundary integration of the
//!   spin connection, and the null-patch decomposition) plus rounding to a
//!   characteristic number.
//! * [`spectra`] — the closed-form topological spectra and their inversion.
//! * [`energy`] — the worldsheet Hamiltonian and its discretized spectrum.
//!
//! All numerical kernels are generic over the scalar type through the
//! [`Real`] trait; `f64` is what the integrators are tuned for.

pub mod config;
pub mod energy;
mod error;
pub mod geometry;
pub mod integrate;
mod quad;
pub mod spectra;
mod waveform;

pub use error::{Error, Result};

use num_traits::{Float, FloatConst, FromPrimitive};

/// Scalar type the whole crate is generic over: `f32` or `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + core::fmt::Debug + core::fmt::Display + Send + Sync + 'static
{
    /// Shorthand for lossy conversion from `f64` constants.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 constant representable")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Concrete aliases for the common double-precision instantiation.
pub type Config64 = config::StringConfiguration<f64>;
pub type Mode64 = config::ModeSpec<f64>;
pub type Field64 = geometry::ConformalFactorField<f64>;
pub type Quadrature64 = integrate::QuadratureResult<f64>;
pub type Spectrum64 = energy::EnergySpectrum<f64>;

/// Single-precision aliases, mainly useful for embedding evaluation; the
/// singular integrators need the headroom of `f64`.
pub type Config32 = config::StringConfiguration<f32>;
pub type Mode32 = config::ModeSpec<f32>;
