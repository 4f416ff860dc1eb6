//! Scalar gate functions for self-gated activations `f(x) = x * g(x)`.
//!
//! The gates here map inputs to `[0, 1]`: the hard step (ReLU), the Gaussian
//! CDF (GELU), the logistic function (SiLU), and the arctangent gate
//! `Z(x; sigma) = 1/2 + arctan(sigma x)/pi` — which is exactly the CDF of a
//! Cauchy distribution with scale `1/sigma`. Its density decays only
//! polynomially, so the gate (and hence the activation's input gradient)
//! stays strictly positive for every finite input, unlike the
//! super-exponentially vanishing Gaussian gate.
//!
//! A rational approximation of the arctangent gate expressible purely in
//! ReLU operations is provided as [`iglu_gate_approx`]; its absolute error
//! never exceeds ~0.0227 and vanishes at `x = 0`, at `|sigma x| = 1`, and as
//! `x -> +-inf`.

use crate::math;
use core::f64::consts::{FRAC_PI_2, PI};
use core::fmt;

/// Sharpness parameter `sigma >= 0` of the arctangent gate.
///
/// `sigma` interpolates the activation between a scaled identity
/// (`sigma = 0`, gate constant 1/2) and ReLU (`sigma -> inf`). In learnable
/// mode the value is reparameterized as `softplus(raw)` so it stays strictly
/// positive with a well-defined gradient; training updates `raw`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Sharpness {
    /// Fixed non-negative value. `sigma = 0` is allowed and degenerates the
    /// gate to the constant 1/2.
    Fixed(f64),
    /// Learnable value `softplus(raw)`, strictly positive.
    Learnable { raw: f64 },
}

impl Sharpness {
    /// Fixed sharpness. Panics if `value` is negative or non-finite;
    /// validate user input before constructing.
    pub fn fixed(value: f64) -> Self {
        assert!(
            value.is_finite() && value >= 0.0,
            "sharpness must be finite and >= 0, got {value}"
        );
        Sharpness::Fixed(value)
    }

    /// Learnable sharpness initialized so that `value() == initial`.
    /// Panics if `initial` is not finite and strictly positive.
    pub fn learnable(initial: f64) -> Self {
        assert!(
            initial.is_finite() && initial > 0.0,
            "learnable sharpness must be finite and > 0, got {initial}"
        );
        Sharpness::Learnable { raw: math::softplus_inv(initial) }
    }

    /// Learnable sharpness from an unconstrained raw parameter.
    pub const fn from_raw(raw: f64) -> Self {
        Sharpness::Learnable { raw }
    }

    /// The effective sigma value (`>= 0`, and `> 0` in learnable mode).
    pub fn value(self) -> f64 {
        match self {
            Sharpness::Fixed(v) => v,
            Sharpness::Learnable { raw } => math::softplus(raw),
        }
    }

    /// Unconstrained parameter, if learnable.
    pub fn raw(self) -> Option<f64> {
        match self {
            Sharpness::Fixed(_) => None,
            Sharpness::Learnable { raw } => Some(raw),
        }
    }

    pub fn is_learnable(self) -> bool {
        matches!(self, Sharpness::Learnable { .. })
    }

    /// `d value / d raw` of the reparameterization: `sigmoid(raw)` in
    /// learnable mode, 1 for a fixed value (identity parameterization).
    pub fn reparam_grad(self) -> f64 {
        match self {
            Sharpness::Fixed(_) => 1.0,
            Sharpness::Learnable { raw } => math::sigmoid(raw),
        }
    }
}

impl fmt::Display for Sharpness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sharpness::Fixed(v) => write!(f, "{v}"),
            Sharpness::Learnable { .. } => write!(f, "learnable:{}", self.value()),
        }
    }
}

/// Domain errors for the checked gate entry points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GateError {
    /// Input was NaN or infinite.
    NonFinite(f64),
    /// Cauchy scale parameter must be strictly positive.
    InvalidScale(f64),
}

impl fmt::Display for GateError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GateError::NonFinite(v) => write!(f, "input must be finite, got {v}"),
            GateError::InvalidScale(s) => write!(f, "scale must be > 0, got {s}"),
        }
    }
}

impl core::error::Error for GateError {}

/// Hard gate of ReLU: 0 for `x < 0`, 1 otherwise.
///
/// `step(0) = 1` by convention, so `x * step(x) = max(0, x)` holds pointwise
/// (at `x = 0` both sides are 0 either way; the convention also fixes the
/// ReLU derivative reported at the kink).
pub fn step(x: f64) -> Result<f64, GateError> {
    if !x.is_finite() {
        return Err(GateError::NonFinite(x));
    }
    Ok(if x < 0.0 { 0.0 } else { 1.0 })
}

/// Standard normal CDF `Phi(x) = (1 + erf(x / sqrt(2))) / 2`, evaluated via
/// `erfc` so the negative tail keeps full relative accuracy.
pub fn gaussian_cdf(x: f64) -> Result<f64, GateError> {
    if !x.is_finite() {
        return Err(GateError::NonFinite(x));
    }
    Ok(math::normal_cdf(x))
}

/// Logistic gate of SiLU: `1 / (1 + e^-x)`.
pub fn logistic(x: f64) -> f64 {
    math::sigmoid(x)
}

/// Cauchy CDF with argument already scaled: `1/2 + arctan(u)/pi`.
///
/// For `u < 0` this is evaluated as `arctan(-1/u)/pi` (exact identity),
/// which avoids the cancellation in `1/2 + arctan(u)/pi` and keeps the gate
/// strictly positive down to the smallest representable values — the
/// property the heavy-tailed gate is chosen for.
pub(crate) fn cauchy_cdf_scaled(u: f64) -> f64 {
    if u < 0.0 {
        math::atan(-1.0 / u) / PI
    } else {
        0.5 + math::atan(u) / PI
    }
}

/// The arctangent gate `Z(x; sigma) = 1/2 + arctan(sigma x)/pi`.
///
/// Monotone non-decreasing in `x`; identically 1/2 when `sigma = 0`;
/// strictly inside `(0, 1)` for every finite `x` when `sigma > 0`.
pub fn iglu_gate(x: f64, sigma: Sharpness) -> f64 {
    cauchy_cdf_scaled(sigma.value() * x)
}

/// `dZ/dx = sigma / (pi (1 + sigma^2 x^2))`, strictly positive for
/// `sigma > 0` and identically zero for `sigma = 0`.
pub fn iglu_gate_dx(x: f64, sigma: Sharpness) -> f64 {
    let s = sigma.value();
    let u = s * x;
    s / (PI * (1.0 + u * u))
}

/// `dZ/dsigma = x / (pi (1 + sigma^2 x^2))`.
///
/// This is the plain partial derivative in sigma; when sigma is learnable,
/// the chain rule through the softplus reparameterization is the caller's
/// job (the batched kernels in `activations` apply it).
pub fn iglu_gate_dsigma(x: f64, sigma: Sharpness) -> f64 {
    let s = sigma.value();
    let u = s * x;
    x / (PI * (1.0 + u * u))
}

/// Rational approximation of the arctangent gate, in its two-ReLU form:
///
/// `Z_approx(x; sigma) = (1/2) (1 + 2 relu(sigma x)) / (1 + relu(sigma x) + relu(-sigma x))`
///
/// Computed literally that way (not via `|sigma x|`), so what is tested is
/// the ReLU-only formulation. Bounded in `[0, 1]`: the numerator is
/// non-negative and never more than twice the denominator.
pub fn iglu_gate_approx(x: f64, sigma: Sharpness) -> f64 {
    let u = sigma.value() * x;
    let pos = math::relu(u);
    let neg = math::relu(-u);
    0.5 * (1.0 + 2.0 * pos) / (1.0 + pos + neg)
}

/// Odd rational approximation of the arctangent:
/// `(pi/2) u / (1 + |u|)`, exact at `u = 0` and `|u| = 1`, saturating to
/// `+-pi/2`.
pub fn arctan_rational(u: f64) -> f64 {
    FRAC_PI_2 * u / (1.0 + math::fabs(u))
}

/// Cauchy CDF `1/2 + arctan(x / scale)/pi` with scale `> 0`.
///
/// For `scale = 1/sigma` this equals [`iglu_gate`]`(x, sigma)` up to
/// rounding of the reciprocal.
pub fn cauchy_cdf(x: f64, scale: f64) -> Result<f64, GateError> {
    if !(scale.is_finite() && scale > 0.0) {
        return Err(GateError::InvalidScale(scale));
    }
    Ok(cauchy_cdf_scaled(x / scale))
}

/// `Z(x; sigma) + x dZ/dx`, the input derivative of `x * Z(x; sigma)`.
///
/// For `sigma x <= -8` the direct sum cancels (both terms are ~`1/(pi |u|)`
/// with a difference of order `|u|^-3`), so it is evaluated by the series
///
/// `(arctan(t) - t/(1+t^2))/pi = ( (2/3) t^3 - (4/5) t^5 + ... )/pi`,
///
/// `t = 1/|u|`, which keeps the result strictly positive and fully accurate
/// arbitrarily deep in the negative tail.
pub(crate) fn iglu_value_deriv_scaled(x: f64, s: f64) -> f64 {
    let u = s * x;
    if u <= -8.0 {
        negative_tail_series(-1.0 / u) / PI
    } else {
        cauchy_cdf_scaled(u) + u / (PI * (1.0 + u * u))
    }
}

/// `arctan(t) - t / (1 + t^2)` for `0 < t <= 1/8`, by its alternating
/// series `sum_{k>=1} (-1)^(k+1) (2k/(2k+1)) t^(2k+1)`.
fn negative_tail_series(t: f64) -> f64 {
    let t2 = t * t;
    let mut power = t * t2;
    let mut sum = 0.0;
    let mut sign = 1.0;
    let mut k = 1.0;
    loop {
        let term = sign * (2.0 * k) / (2.0 * k + 1.0) * power;
        sum += term;
        if math::fabs(term) <= f64::EPSILON * math::fabs(sum) || k >= 24.0 {
            break;
        }
        power *= t2;
        sign = -sign;
        k += 1.0;
    }
    sum
}
