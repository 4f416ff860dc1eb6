//! Internal `f64` math helpers. Everything transcendental is routed through
//! `libm` so the crate works without `std` and produces the same bits under
//! every feature combination.

pub(crate) use libm::{atan, cos, erfc, exp, fabs, log, log1p, pow, sqrt, tanh};

use core::f64::consts::FRAC_1_SQRT_2;

/// 1 / sqrt(2*pi)
pub(crate) const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Standard normal CDF via `erfc`, which keeps full relative accuracy in the
/// negative tail (the erf form loses everything below ~1e-16 there).
pub(crate) fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x * FRAC_1_SQRT_2)
}

/// Standard normal density.
pub(crate) fn normal_pdf(x: f64) -> f64 {
    exp(-0.5 * x * x) * FRAC_1_SQRT_2PI
}

/// Numerically stable logistic function.
pub(crate) fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + exp(-x))
    } else {
        let e = exp(x);
        e / (1.0 + e)
    }
}

/// Numerically stable `ln(1 + e^x)`.
pub(crate) fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + log1p(exp(-x))
    } else {
        log1p(exp(x))
    }
}

/// Inverse of [`softplus`]: `ln(e^v - 1)` for `v > 0`, evaluated as
/// `v + ln(1 - e^-v)` to stay stable for large `v`.
pub(crate) fn softplus_inv(v: f64) -> f64 {
    v + log1p(-exp(-v))
}

/// Round half away from zero (inputs here are always non-negative).
pub(crate) fn round_half_up(x: f64) -> f64 {
    libm::floor(x + 0.5)
}

pub(crate) fn relu(x: f64) -> f64 {
    x.max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normal_cdf_center_and_tails() {
        assert_eq!(normal_cdf(0.0), 0.5);
        // frozen against a 40-digit erf oracle
        assert!((normal_cdf(1.0) - 0.841_344_746_068_542_9).abs() < 1e-15);
        assert!((normal_cdf(2.5) - 0.993_790_334_674_223_9).abs() < 1e-15);
        // the erfc form keeps relative accuracy deep in the tail
        let tail = normal_cdf(-10.0);
        assert!(tail > 0.0 && (tail - 7.619_853_024_160_526e-24).abs() < 1e-36);
    }

    #[test]
    fn softplus_roundtrip() {
        for &v in &[0.1, 0.5, 1.0, 3.0, 20.0] {
            assert!((softplus(softplus_inv(v)) - v).abs() <= 1e-14 * v);
        }
    }

    #[test]
    fn sigmoid_is_softplus_derivative() {
        let h = 1e-6;
        for &x in &[-5.0, -0.3, 0.0, 0.7, 4.0] {
            let fd = (softplus(x + h) - softplus(x - h)) / (2.0 * h);
            assert!((sigmoid(x) - fd).abs() < 1e-9);
        }
    }
}
