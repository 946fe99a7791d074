// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! Downlink ergodic rates of multi-cell correlated MIMO under pilot
//! contamination, as a function of angular spread and array size.
//!
//! Two independent engines compute the same power terms:
//!
//! * [`analytic`] evaluates the closed-form first and second moments of the
//!   effective channel for eigen-beamforming (EBF) from the channel
//!   statistics built in [`covariance`];
//! * [`montecarlo`] draws multipath channels, simulates uplink training
//!   and precoding (EBF or regularized zero-forcing) and estimates the same
//!   moments empirically.
//!
//! [`runner`] wraps both in seeded, deterministic sweeps over angular
//! spread and array size and writes CSV datasets.
//!
//! The numeric core is generic over the real scalar (see [`Real`]); the
//! aliases below fix it to `f64`, which is what every engine runs with.

pub mod analytic;
pub mod covariance;
pub mod geometry;
pub mod hardening;
pub mod montecarlo;
pub mod numerics;
pub mod runner;

#[cfg(test)]
mod oracles;

pub use num_complex::Complex;
pub use numerics::{NumericsError, Real};

pub type C64 = Complex<f64>;
pub type ComplexMatrix = numerics::CMatrix<f64>;
pub type QuadratureSpec = numerics::QuadratureSpec<f64>;
pub type AngularSpread = covariance::AngularSpread<f64>;
pub type ArraySpec = covariance::ArraySpec<f64>;
pub type CovarianceSet = covariance::CovarianceSet<f64>;
pub type ScenarioCovariances = covariance::ScenarioCovariances<f64>;
pub type ShiftTable = covariance::ShiftTable<f64>;
pub type PowerBreakdown = analytic::PowerBreakdown<f64>;
pub type MomentPair = analytic::MomentPair<f64>;
pub type HardeningPoint = hardening::HardeningPoint<f64>;
