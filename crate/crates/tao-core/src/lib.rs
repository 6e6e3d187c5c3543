//! Thermal-, power-, and battery-aware edge offloading for XR wearables.
//!
//! The crate has four layers:
//!
//! * [`model`] — devices, requests, decision vectors, power/battery traces and
//!   the deterministic feasibility check, plus an exhaustive oracle optimizer;
//! * [`thermal`] — LTI impulse-response thermal models and the discrete
//!   convolution that turns a power trace into a temperature trace;
//! * [`chance`] — Poisson kernels and the chance-constrained evaluators that
//!   solve for the largest safe local-serve probability `alpha`;
//! * [`sim`] — a seeded event simulator with pluggable offloading strategies
//!   and Monte Carlo ensembles.
//!
//! All numeric code is generic over the scalar type via [`Scalar`] (`f32` or
//! `f64`); concrete `f64` aliases for the entry types live at the crate root.

// Validation guards are written `!(x > 0.0)` on purpose: unlike `x <= 0.0`
// they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod chance;
pub mod error;
pub mod model;
pub mod scalar;
pub mod scenario;
pub mod series;
pub mod sim;
pub mod thermal;

pub(crate) mod rng;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// `f64` aliases for the common entry types.
pub type TimeSeries64 = series::TimeSeries<f64>;
pub type DeviceSpec64 = model::DeviceSpec<f64>;
pub type Request64 = model::Request<f64>;
pub type Scenario64 = model::Scenario<f64>;
pub type FeasibilityReport64 = model::FeasibilityReport<f64>;
pub type ImpulseResponse64 = thermal::ImpulseResponse<f64>;
pub type ConfidencePolicy64 = chance::ConfidencePolicy<f64>;
pub type PoissonLoad64 = chance::PoissonLoad<f64>;
pub type AlphaSolution64 = chance::AlphaSolution<f64>;
pub type Strategy64 = sim::Strategy<f64>;
pub type RunResult64 = sim::RunResult<f64>;
