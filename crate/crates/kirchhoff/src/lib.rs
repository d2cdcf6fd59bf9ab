//! Finite-mode Kirchhoff dynamics and the resonant cascade that drives
//! chaotic-like energy transfer between Fourier modes.
//!
//! The crate is organised bottom up:
//!
//! * [`config`], [`field`]: frequency configuration, Fourier fields, observables.
//! * [`spectral`]: the exact finite-mode ODE and the resonant vector fields.
//! * [`cascade`]: the truncated effective system and its chain of charts.
//! * [`pendulum`]: coupled pendulums, Melnikov integral, periodic orbit,
//!   manifolds, Poincaré map and itinerary targeting.
//! * [`synthesis`]: constants and initial data from a targeted orbit.
//! * [`harness`]: exact-versus-effective comparison and oscillation detection.
//!
//! Numerical kernels are generic over [`Real`]; the aliases below fix `f64`.

pub mod cascade;
pub mod config;
pub mod dd;
pub mod error;
pub mod field;
pub mod harness;
pub mod ode;
pub mod pendulum;
pub mod scalar;
pub mod spectral;
pub mod synthesis;
pub mod trajectory;

pub use dd::DoubleDouble;
pub use error::{Error, Result};
pub use scalar::Real;
pub use config::{Measure, Rational, TripletConfig};
pub use field::{Flavor, Observables, Polar, SpectralField};
