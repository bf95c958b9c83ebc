//! Quantile-based effectiveness persistence.
//!
//! The persistence function `P(u) = V(u) / Q(u)` measures the average
//! multiplicative uplift among the top `1-u` fraction of a positive outcome
//! distribution relative to its entry threshold `Q(u)`. This crate provides:
//!
//! * closed-form and quadrature evaluation of `P(u)` and its companion
//!   functionals (vitality, mean residual quantile, hazard-quantile, Lorenz
//!   curve, TTT transform) for the standard lifetime families ([`dist`],
//!   [`persistence`]);
//! * stationary-point analysis and the shift-placement solver
//!   ([`stationarity`]);
//! * a non-parametric estimator with bootstrap intervals ([`empirical`]);
//! * a bootstrap-calibrated two-sample supremum test of equal persistence
//!   curves on a trimmed upper-tail interval ([`eqtest`]);
//! * Monte Carlo harnesses for estimator bias/MSE and test power/size
//!   studies ([`simulate`]).
//!
//! Everything stochastic takes an explicit 64-bit seed and is bit-for-bit
//! reproducible; parallel execution never changes results.

pub mod dist;
pub mod empirical;
pub mod eqtest;
mod error;
pub mod persistence;
pub mod quad;
pub mod rng;
pub mod simulate;
pub mod specfun;
pub mod stationarity;

pub use dist::{Family, QuantileModel};
pub use empirical::SampleArm;
pub use error::{Error, Result};
pub use persistence::PersistenceCurve;
pub use quad::{QuadRule, Quadrature};
