//! The activation zoo and its elementwise kernels.
//!
//! Every gated member has the form `f(x) = x * g(x)`; [`Activation::gate`]
//! exposes the gate so the decomposition is testable. Kernels compute in
//! `f64` internally even through the `f32` entry points — the gradient
//! verification tolerances need the headroom.
//!
//! Derivative conventions at non-smooth points:
//! - ReLU at 0: derivative 1 (follows `step(0) = 1`)
//! - Hardswish at -3 / +3: derivative 0 / 1 (the outer pieces)
//!
//! Standard definitions used for the non-arctangent members:
//! - `SiLU(x) = x * logistic(x)`
//! - `Mish(x) = x * tanh(softplus(x))`
//! - `Hardswish(x) = 0` for `x <= -3`, `x` for `x >= 3`, else `x (x + 3)/6`
//! - tanh-form GELU: `x/2 (1 + tanh(sqrt(2/pi)(x + 0.044715 x^3)))`

use crate::gates::{self, Sharpness};
use crate::math;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;

const SQRT_2_OVER_PI: f64 = 0.797_884_560_802_865_4;
const GELU_TANH_CUBIC: f64 = 0.044_715;

/// One member of the activation zoo, with its parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Activation {
    Identity,
    Relu,
    /// erf-based GELU, `x * Phi(x)`.
    GeluExact,
    /// tanh-form GELU approximation (the form production models time).
    GeluTanh,
    /// Gate-scaled GELU `x * Phi(a x)`, `a >= 0`. Reverts to GELU at `a = 1`.
    GeluA { a: f64 },
    /// Arctangent-gated unit `x * (1/2 + arctan(sigma x)/pi)`.
    Iglu { sigma: Sharpness },
    /// Rational two-ReLU approximation of `Iglu`.
    IgluApprox { sigma: Sharpness },
    Silu,
    Mish,
    Hardswish,
}

/// Errors from the elementwise kernels.
#[derive(Debug, Clone, PartialEq)]
pub enum ActivationError {
    /// An input element was NaN or infinite.
    NonFinite { index: usize, value: f64 },
    /// Batches must be non-empty.
    EmptyBatch,
    /// `GeluA` requires a finite `a >= 0`.
    InvalidParam { what: &'static str, value: f64 },
    /// `backward_param` called on a kind without a trainable parameter.
    NoParameter { kind: String },
    /// Output buffer length does not match the input length.
    LengthMismatch { input: usize, output: usize },
}

impl fmt::Display for ActivationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ActivationError::NonFinite { index, value } => {
                write!(f, "non-finite input {value} at index {index}")
            }
            ActivationError::EmptyBatch => write!(f, "batch must contain at least one element"),
            ActivationError::InvalidParam { what, value } => {
                write!(f, "invalid parameter {what} = {value}")
            }
            ActivationError::NoParameter { kind } => {
                write!(f, "{kind} has no trainable parameter")
            }
            ActivationError::LengthMismatch { input, output } => {
                write!(f, "output length {output} does not match input length {input}")
            }
        }
    }
}

impl core::error::Error for ActivationError {}

impl Activation {
    /// Check the parameter invariants (`GeluA` needs finite `a >= 0`;
    /// sharpness values are valid by construction).
    pub fn validate(&self) -> Result<(), ActivationError> {
        if let Activation::GeluA { a } = *self {
            if !(a.is_finite() && a >= 0.0) {
                return Err(ActivationError::InvalidParam { what: "a", value: a });
            }
        }
        Ok(())
    }

    /// True for the kinds whose parameter `backward_param` can differentiate:
    /// `GeluA`, and `Iglu`/`IgluApprox` with learnable sigma.
    pub fn has_trainable_param(&self) -> bool {
        match self {
            Activation::GeluA { .. } => true,
            Activation::Iglu { sigma } | Activation::IgluApprox { sigma } => sigma.is_learnable(),
            _ => false,
        }
    }

    /// Scalar forward value.
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            Activation::Identity => x,
            Activation::Relu => math::relu(x),
            Activation::GeluExact => x * math::normal_cdf(x),
            Activation::GeluTanh => gelu_tanh(x),
            Activation::GeluA { a } => x * math::normal_cdf(a * x),
            Activation::Iglu { sigma } => x * gates::cauchy_cdf_scaled(sigma.value() * x),
            Activation::IgluApprox { sigma } => x * gates::iglu_gate_approx(x, sigma),
            Activation::Silu => x * math::sigmoid(x),
            Activation::Mish => x * math::tanh(math::softplus(x)),
            Activation::Hardswish => hardswish(x),
        }
    }

    /// Scalar derivative `df/dx` (see the module docs for kink conventions).
    pub fn deriv(&self, x: f64) -> f64 {
        match *self {
            Activation::Identity => 1.0,
            Activation::Relu => {
                if x < 0.0 {
                    0.0
                } else {
                    1.0
                }
            }
            Activation::GeluExact => math::normal_cdf(x) + x * math::normal_pdf(x),
            Activation::GeluTanh => gelu_tanh_deriv(x),
            Activation::GeluA { a } => math::normal_cdf(a * x) + a * x * math::normal_pdf(a * x),
            Activation::Iglu { sigma } => gates::iglu_value_deriv_scaled(x, sigma.value()),
            Activation::IgluApprox { sigma } => iglu_approx_deriv(x, sigma.value()),
            Activation::Silu => {
                let s = math::sigmoid(x);
                s + x * s * (1.0 - s)
            }
            Activation::Mish => {
                let t = math::tanh(math::softplus(x));
                t + x * (1.0 - t * t) * math::sigmoid(x)
            }
            Activation::Hardswish => {
                if x <= -3.0 {
                    0.0
                } else if x >= 3.0 {
                    1.0
                } else {
                    (2.0 * x + 3.0) / 6.0
                }
            }
        }
    }

    /// The multiplicative gate `g` with `f(x) = x * g(x)`.
    ///
    /// Dispatches to the `gates` module for the self-gated kinds (step,
    /// Gaussian CDF, logistic, arctangent, two-ReLU rational); `Identity`
    /// gates with the constant 1.
    pub fn gate(&self, x: f64) -> f64 {
        match *self {
            Activation::Identity => 1.0,
            Activation::Relu => {
                if x < 0.0 {
                    0.0
                } else {
                    1.0
                }
            }
            Activation::GeluExact => math::normal_cdf(x),
            Activation::GeluTanh => gelu_tanh_gate(x),
            Activation::GeluA { a } => math::normal_cdf(a * x),
            Activation::Iglu { sigma } => gates::cauchy_cdf_scaled(sigma.value() * x),
            Activation::IgluApprox { sigma } => gates::iglu_gate_approx(x, sigma),
            Activation::Silu => gates::logistic(x),
            Activation::Mish => math::tanh(math::softplus(x)),
            Activation::Hardswish => (x + 3.0).clamp(0.0, 6.0) / 6.0,
        }
    }

    /// Scalar parameter derivative, already chained through the softplus
    /// reparameterization for learnable sigma (i.e. `df/draw`); plain
    /// `df/da` for `GeluA`.
    pub fn param_deriv(&self, x: f64) -> Result<f64, ActivationError> {
        match *self {
            Activation::GeluA { a } => Ok(x * x * math::normal_pdf(a * x)),
            Activation::Iglu { sigma } if sigma.is_learnable() => {
                let s = sigma.value();
                let u = s * x;
                Ok(x * x / (PI * (1.0 + u * u)) * sigma.reparam_grad())
            }
            Activation::IgluApprox { sigma } if sigma.is_learnable() => {
                let u = sigma.value() * x;
                let d = 1.0 + math::fabs(u);
                Ok(x * x / (2.0 * d * d) * sigma.reparam_grad())
            }
            _ => Err(ActivationError::NoParameter { kind: format!("{self}") }),
        }
    }

    /// Elementwise forward pass into a caller-provided buffer.
    pub fn forward_into(&self, xs: &[f64], out: &mut [f64]) -> Result<(), ActivationError> {
        self.batch_into(xs, out, |a, x| a.eval(x))
    }

    /// Elementwise forward pass.
    pub fn forward(&self, xs: &[f64]) -> Result<Vec<f64>, ActivationError> {
        let mut out = vec![0.0; xs.len()];
        self.forward_into(xs, &mut out)?;
        Ok(out)
    }

    /// Elementwise input derivative into a caller-provided buffer.
    pub fn backward_x_into(&self, xs: &[f64], out: &mut [f64]) -> Result<(), ActivationError> {
        self.batch_into(xs, out, |a, x| a.deriv(x))
    }

    /// Elementwise input derivative `df/dx`.
    pub fn backward_x(&self, xs: &[f64]) -> Result<Vec<f64>, ActivationError> {
        let mut out = vec![0.0; xs.len()];
        self.backward_x_into(xs, &mut out)?;
        Ok(out)
    }

    /// Elementwise parameter derivative (`df/draw` for learnable sigma,
    /// `df/da` for `GeluA`). Errors on parameter-free kinds.
    pub fn backward_param(&self, xs: &[f64]) -> Result<Vec<f64>, ActivationError> {
        if !self.has_trainable_param() {
            return Err(ActivationError::NoParameter { kind: format!("{self}") });
        }
        self.validate()?;
        check_batch(xs)?;
        xs.iter().map(|&x| self.param_deriv(x)).collect()
    }

    /// Single-precision forward pass (computed in `f64` internally).
    pub fn forward_f32(&self, xs: &[f32]) -> Result<Vec<f32>, ActivationError> {
        let mut out = vec![0.0; xs.len()];
        self.forward_into_f32(xs, &mut out)?;
        Ok(out)
    }

    pub fn forward_into_f32(&self, xs: &[f32], out: &mut [f32]) -> Result<(), ActivationError> {
        self.batch_into_f32(xs, out, |a, x| a.eval(x))
    }

    /// Single-precision input derivative (computed in `f64` internally).
    pub fn backward_x_f32(&self, xs: &[f32]) -> Result<Vec<f32>, ActivationError> {
        let mut out = vec![0.0; xs.len()];
        self.backward_x_into_f32(xs, &mut out)?;
        Ok(out)
    }

    pub fn backward_x_into_f32(&self, xs: &[f32], out: &mut [f32]) -> Result<(), ActivationError> {
        self.batch_into_f32(xs, out, |a, x| a.deriv(x))
    }

    fn batch_into(
        &self,
        xs: &[f64],
        out: &mut [f64],
        f: impl Fn(&Activation, f64) -> f64,
    ) -> Result<(), ActivationError> {
        self.validate()?;
        check_batch(xs)?;
        if out.len() != xs.len() {
            return Err(ActivationError::LengthMismatch { input: xs.len(), output: out.len() });
        }
        for (o, &x) in out.iter_mut().zip(xs) {
            *o = f(self, x);
        }
        Ok(())
    }

    fn batch_into_f32(
        &self,
        xs: &[f32],
        out: &mut [f32],
        f: impl Fn(&Activation, f64) -> f64,
    ) -> Result<(), ActivationError> {
        self.validate()?;
        if xs.is_empty() {
            return Err(ActivationError::EmptyBatch);
        }
        if out.len() != xs.len() {
            return Err(ActivationError::LengthMismatch { input: xs.len(), output: out.len() });
        }
        for (i, (&x, o)) in xs.iter().zip(out.iter_mut()).enumerate() {
            if !x.is_finite() {
                return Err(ActivationError::NonFinite { index: i, value: x as f64 });
            }
            *o = f(self, x as f64) as f32;
        }
        Ok(())
    }
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Activation::Identity => write!(f, "Identity"),
            Activation::Relu => write!(f, "ReLU"),
            Activation::GeluExact => write!(f, "GELU"),
            Activation::GeluTanh => write!(f, "GELU-tanh"),
            Activation::GeluA { a } => write!(f, "GELU_a(a={a})"),
            Activation::Iglu { sigma } => write!(f, "IGLU(sigma={sigma})"),
            Activation::IgluApprox { sigma } => write!(f, "IGLU-Approx(sigma={sigma})"),
            Activation::Silu => write!(f, "SiLU"),
            Activation::Mish => write!(f, "Mish"),
            Activation::Hardswish => write!(f, "Hardswish"),
        }
    }
}

fn check_batch(xs: &[f64]) -> Result<(), ActivationError> {
    if xs.is_empty() {
        return Err(ActivationError::EmptyBatch);
    }
    for (i, &x) in xs.iter().enumerate() {
        if !x.is_finite() {
            return Err(ActivationError::NonFinite { index: i, value: x });
        }
    }
    Ok(())
}

// The tanh-form gate 0.5 (1 + tanh(u)) is evaluated as logistic(2u), an
// exact identity: the verbatim sum loses all relative precision for u << 0
// (1 + tanh cancels), while the logistic form stays accurate down to
// underflow, keeping the gradient verifiable across the whole grid.
fn gelu_tanh_gate(x: f64) -> f64 {
    math::sigmoid(2.0 * SQRT_2_OVER_PI * (x + GELU_TANH_CUBIC * x * x * x))
}

fn gelu_tanh(x: f64) -> f64 {
    x * gelu_tanh_gate(x)
}

fn gelu_tanh_deriv(x: f64) -> f64 {
    let u2 = 2.0 * SQRT_2_OVER_PI * (x + GELU_TANH_CUBIC * x * x * x);
    let p = math::sigmoid(u2);
    let q = math::sigmoid(-u2); // 1 - p, at full relative precision
    let inner_dx = SQRT_2_OVER_PI * (1.0 + 3.0 * GELU_TANH_CUBIC * x * x);
    p + 2.0 * x * p * q * inner_dx
}

fn hardswish(x: f64) -> f64 {
    if x <= -3.0 {
        0.0
    } else if x >= 3.0 {
        x
    } else {
        x * (x + 3.0) / 6.0
    }
}

/// Exact piecewise-rational derivative of `x * Z_approx(x; sigma)`:
/// `(1 + 4u + 2u^2) / (2 (1 + u)^2)` for `u = sigma x > 0`,
/// `1 / (2 (1 - u)^2)` for `u < 0`; both one-sided limits at 0 are 1/2.
fn iglu_approx_deriv(x: f64, s: f64) -> f64 {
    let u = s * x;
    if u > 0.0 {
        let d = 1.0 + u;
        (1.0 + 4.0 * u + 2.0 * u * u) / (2.0 * d * d)
    } else {
        let d = 1.0 - u;
        1.0 / (2.0 * d * d)
    }
}
