//! Central finite-difference derivative checking.
//!
//! This is the independent oracle every analytic gradient in the crate is
//! verified against: `df(x) ~ (f(x+h) - f(x-h)) / 2h` with an input-scaled
//! step `h = 1e-6 * max(1, |x|)`, which balances truncation against roundoff
//! in double precision.

use alloc::vec::Vec;
use core::fmt;

/// Step scale for the central difference.
const STEP: f64 = 1e-6;
/// Floor for the relative-error denominator, so near-zero derivatives stay
/// checkable without dividing by ~0.
const DENOM_FLOOR: f64 = 1e-12;

/// Outcome of a derivative check over a set of points.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GradCheckReport {
    /// Points actually compared (exclusions removed).
    pub points_checked: usize,
    /// Largest relative error seen.
    pub max_rel_error: f64,
    /// Point where the largest error occurred.
    pub argmax_point: f64,
    /// Tolerance the report was judged against.
    pub tolerance: f64,
    /// `max_rel_error <= tolerance`.
    pub passed: bool,
    /// Points skipped because they fell inside an exclusion neighborhood
    /// (kinks); recorded, never silently dropped.
    pub excluded_points: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum GradCheckError {
    /// No points left after exclusions (or none supplied).
    NoEffectivePoints,
    /// A point was NaN or infinite.
    NonFinitePoint(f64),
    /// Tolerance must be positive.
    InvalidTolerance(f64),
}

impl fmt::Display for GradCheckError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GradCheckError::NoEffectivePoints => {
                write!(f, "no points remain after applying exclusions")
            }
            GradCheckError::NonFinitePoint(x) => write!(f, "non-finite check point {x}"),
            GradCheckError::InvalidTolerance(t) => write!(f, "tolerance must be > 0, got {t}"),
        }
    }
}

impl core::error::Error for GradCheckError {}

/// Compare an analytic derivative `df` against central finite differences of
/// `f` at each point, excluding points within `radius` of any
/// `(center, radius)` exclusion (kink neighborhoods).
///
/// The relative error at `x` is
/// `|df(x) - fd(x)| / max(|df(x)|, 1e-12)`.
pub fn check_derivative<F, D>(
    f: F,
    df: D,
    points: &[f64],
    tol: f64,
    exclusions: &[(f64, f64)],
) -> Result<GradCheckReport, GradCheckError>
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    if !(tol > 0.0) {
        return Err(GradCheckError::InvalidTolerance(tol));
    }
    let mut excluded = Vec::new();
    let mut checked = 0usize;
    let mut max_rel = 0.0f64;
    let mut argmax = f64::NAN;

    for &x in points {
        if !x.is_finite() {
            return Err(GradCheckError::NonFinitePoint(x));
        }
        if exclusions.iter().any(|&(c, r)| libm::fabs(x - c) <= r) {
            excluded.push(x);
            continue;
        }
        let h = STEP * libm::fabs(x).max(1.0);
        let fd = (f(x + h) - f(x - h)) / (2.0 * h);
        let analytic = df(x);
        let rel = libm::fabs(analytic - fd) / libm::fabs(analytic).max(DENOM_FLOOR);
        checked += 1;
        if rel > max_rel {
            max_rel = rel;
            argmax = x;
        }
    }

    if checked == 0 {
        return Err(GradCheckError::NoEffectivePoints);
    }
    Ok(GradCheckReport {
        points_checked: checked,
        max_rel_error: max_rel,
        argmax_point: argmax,
        tolerance: tol,
        passed: max_rel <= tol,
        excluded_points: excluded,
    })
}

/// Evenly spaced grid of `n >= 2` points covering `[lo, hi]` inclusive.
pub fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2 && lo < hi, "need n >= 2 and lo < hi");
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}
