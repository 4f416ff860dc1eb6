//! Self-gated activation functions built around the arctangent (Cauchy CDF)
//! gate, together with the numerical machinery needed to verify them:
//!
//! - [`gates`] — scalar gate functions `g` in `f(x) = x * g(x)` and their
//!   derivatives, including the arctangent gate, its two-ReLU rational
//!   approximation, and the Gaussian CDF gate.
//! - [`activations`] — the activation zoo with elementwise forward,
//!   input-gradient, and parameter-gradient kernels.
//! - [`mixture`] — adaptive-quadrature and Monte Carlo oracles checking that
//!   the half-normal scale mixture of Gaussian gates equals the closed-form
//!   arctangent gate.
//! - [`gradcheck`] — central finite-difference verification of every
//!   analytic derivative.
//! - [`longtail`] — exponentially subsampled synthetic classification data
//!   and inverse-frequency class weights.
//! - [`trainer`] — a small fully-connected classifier with manual backprop,
//!   weighted cross-entropy, and dead-unit telemetry.
//!
//! The crate is `no_std`-compatible (requires `alloc`); all transcendental
//! functions go through [`libm`] so results do not depend on the platform
//! libm or on the `std` feature.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod activations;
pub mod gates;
pub mod gradcheck;
pub mod longtail;
mod math;
pub mod mixture;
pub mod rng;
pub mod trainer;

pub use activations::{Activation, ActivationError};
pub use gates::{GateError, Sharpness};
pub use gradcheck::GradCheckReport;
pub use longtail::{Dataset, LongTailConfig, Split};
pub use mixture::QuadratureResult;
pub use trainer::{Mlp, MlpConfig, TrainConfig, TrainReport};
