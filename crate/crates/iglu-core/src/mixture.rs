//! Numerical verification that the half-normal scale mixture of Gaussian
//! gates equals the closed-form arctangent gate:
//!
//! `Z(x; sigma) = int_0^inf Phi(a x) * halfnormal(a; sigma) da
//!             = 1/2 + arctan(sigma x)/pi`
//!
//! Two independent routes are provided — adaptive Simpson quadrature and a
//! seeded Monte Carlo estimate — plus a grid driver comparing the quadrature
//! against the closed form.
//!
//! The improper integral is truncated at `a = 12 sigma`; the half-normal
//! mass beyond that point is `erfc(12/sqrt(2)) < 4e-33`, far below every
//! tolerance used here.

use crate::gates::{self, Sharpness};
use crate::math;
use crate::rng;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;

/// Truncation point of the mixing integral, in units of sigma.
const TAIL_CUTOFF: f64 = 12.0;
/// Upfront uniform panels handed to the adaptive subdivision.
const SEED_PANELS: usize = 8;
/// Evaluation budget for one integral.
const MAX_EVALS: usize = 4_000_000;
/// Maximum bisection depth per panel.
const MAX_DEPTH: u32 = 60;

/// Result of one adaptive quadrature run.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct QuadratureResult {
    pub value: f64,
    /// Accumulated local error estimates (Richardson `|S2 - S1| / 15`).
    pub abs_error_estimate: f64,
    /// Integrand evaluations spent.
    pub evaluations: usize,
}

/// Grid comparison of quadrature vs the closed form.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MixtureReport {
    pub max_abs_dev: f64,
    pub argmax_x: f64,
    pub argmax_sigma: f64,
    pub pairs_checked: usize,
    pub tol: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum MixtureError {
    /// The adaptive scheme could not reach the requested tolerance within
    /// its evaluation budget; carries the best estimate.
    BudgetExceeded { best: QuadratureResult, tol: f64 },
    /// A grid pair deviated beyond the tolerance.
    ClosedFormMismatch { report: MixtureReport },
    /// sigma must be finite and > 0, tolerance > 0, x finite.
    InvalidInput { what: &'static str, value: f64 },
    /// Empty verification grid.
    EmptyGrid,
}

impl fmt::Display for MixtureError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MixtureError::BudgetExceeded { best, tol } => write!(
                f,
                "quadrature budget exhausted: best {} with error estimate {} (tol {tol})",
                best.value, best.abs_error_estimate
            ),
            MixtureError::ClosedFormMismatch { report } => write!(
                f,
                "closed form violated: |dev| = {} at (x = {}, sigma = {}), tol {}",
                report.max_abs_dev, report.argmax_x, report.argmax_sigma, report.tol
            ),
            MixtureError::InvalidInput { what, value } => {
                write!(f, "invalid {what}: {value}")
            }
            MixtureError::EmptyGrid => write!(f, "verification grid must be non-empty"),
        }
    }
}

impl core::error::Error for MixtureError {}

/// Half-normal density `2 / (sigma sqrt(2 pi)) * exp(-a^2 / (2 sigma^2))`
/// on `a >= 0` (zero for `a < 0`). Integrates to 1.
pub fn half_normal_pdf(a: f64, sigma: f64) -> f64 {
    if a < 0.0 {
        return 0.0;
    }
    let t = a / sigma;
    2.0 / (sigma * math::sqrt(2.0 * PI)) * math::exp(-0.5 * t * t)
}

/// Adaptive Simpson quadrature of `f` over `[lo, hi]` to absolute tolerance
/// `tol`, with the default evaluation budget. The interval is pre-split into
/// uniform panels so narrow features away from the midpoint cannot fool the
/// first coin toss of the recursion.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    tol: f64,
) -> Result<QuadratureResult, MixtureError> {
    integrate_budgeted(f, lo, hi, tol, MAX_EVALS)
}

/// [`integrate`] with an explicit evaluation budget. When the budget (or the
/// bisection depth cap) forces a panel to be accepted early, its error
/// estimate is still accumulated, so an unconverged run surfaces as
/// [`MixtureError::BudgetExceeded`] carrying the best estimate.
pub fn integrate_budgeted<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    tol: f64,
    max_evals: usize,
) -> Result<QuadratureResult, MixtureError> {
    if !(tol > 0.0) {
        return Err(MixtureError::InvalidInput { what: "tolerance", value: tol });
    }
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(MixtureError::InvalidInput { what: "interval bound", value: hi });
    }

    let mut evals = 0usize;
    let mut value = 0.0;
    let mut err_est = 0.0;
    let panel_tol = tol / SEED_PANELS as f64;
    let width = (hi - lo) / SEED_PANELS as f64;
    for p in 0..SEED_PANELS {
        let a = lo + p as f64 * width;
        let b = a + width;
        let m = 0.5 * (a + b);
        let (fa, fm, fb) = (f(a), f(m), f(b));
        evals += 3;
        let whole = simpson(a, b, fa, fm, fb);
        let mut ctx = SubdivideCtx { evals, max_evals, value, err_est };
        subdivide(&f, a, m, b, fa, fm, fb, whole, panel_tol, 0, &mut ctx);
        evals = ctx.evals;
        value = ctx.value;
        err_est = ctx.err_est;
    }

    let result = QuadratureResult { value, abs_error_estimate: err_est, evaluations: evals };
    if err_est > tol {
        return Err(MixtureError::BudgetExceeded { best: result, tol });
    }
    Ok(result)
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

struct SubdivideCtx {
    evals: usize,
    max_evals: usize,
    value: f64,
    err_est: f64,
}

#[allow(clippy::too_many_arguments)]
fn subdivide<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    m: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
    ctx: &mut SubdivideCtx,
) {
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let (flm, frm) = (f(lm), f(rm));
    ctx.evals += 2;
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if math::fabs(delta) <= 15.0 * tol || depth >= MAX_DEPTH || ctx.evals >= ctx.max_evals {
        // Richardson extrapolation; the local error estimate is |delta|/15
        ctx.value += left + right + delta / 15.0;
        ctx.err_est += math::fabs(delta) / 15.0;
        return;
    }
    subdivide(f, a, lm, m, fa, flm, fm, left, tol / 2.0, depth + 1, ctx);
    subdivide(f, m, rm, b, fm, frm, fb, right, tol / 2.0, depth + 1, ctx);
}

/// Quadrature of the mixing integral `int_0^inf Phi(a x) halfnormal(a) da`,
/// truncated at `12 sigma` (truncation error < 4e-33).
pub fn z_by_quadrature(x: f64, sigma: f64, tol: f64) -> Result<QuadratureResult, MixtureError> {
    if !x.is_finite() {
        return Err(MixtureError::InvalidInput { what: "x", value: x });
    }
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(MixtureError::InvalidInput { what: "sigma", value: sigma });
    }
    integrate(|a| math::normal_cdf(a * x) * half_normal_pdf(a, sigma), 0.0, TAIL_CUTOFF * sigma, tol)
}

/// Monte Carlo estimate `(1/n) sum Phi(a_i x)` with `a_i = sigma |g_i|`,
/// `g_i` standard normal from the seeded ChaCha8 stream (see [`crate::rng`]).
/// Deterministic given the seed.
pub fn z_by_monte_carlo(x: f64, sigma: f64, n: usize, seed: u64) -> f64 {
    let mut rng = rng::seeded(seed);
    let mut sum = 0.0;
    for _ in 0..n {
        let a = sigma * math::fabs(rng::standard_normal(&mut rng));
        sum += math::normal_cdf(a * x);
    }
    sum / n as f64
}

/// Compare quadrature against the closed-form gate on a grid.
///
/// With `fail_fast` the first violating pair aborts the sweep; otherwise the
/// whole grid is scanned and the report carries the worst deviation. A
/// deviation above `tol` is an error either way.
pub fn verify_closed_form(
    grid_x: &[f64],
    grid_sigma: &[f64],
    tol: f64,
    fail_fast: bool,
) -> Result<MixtureReport, MixtureError> {
    if grid_x.is_empty() || grid_sigma.is_empty() {
        return Err(MixtureError::EmptyGrid);
    }
    if !(tol >= 0.0) {
        return Err(MixtureError::InvalidInput { what: "tolerance", value: tol });
    }
    // keep the quadrature error well below the comparison tolerance
    let quad_tol = (tol / 10.0).clamp(1e-13, 1e-11);

    let mut report = MixtureReport {
        max_abs_dev: 0.0,
        argmax_x: f64::NAN,
        argmax_sigma: f64::NAN,
        pairs_checked: 0,
        tol,
        passed: false,
    };
    for &sigma in grid_sigma {
        let sharp = Sharpness::fixed(sigma);
        for &x in grid_x {
            let quad = z_by_quadrature(x, sigma, quad_tol)?;
            let closed = gates::iglu_gate(x, sharp);
            let dev = math::fabs(quad.value - closed);
            report.pairs_checked += 1;
            if dev > report.max_abs_dev {
                report.max_abs_dev = dev;
                report.argmax_x = x;
                report.argmax_sigma = sigma;
            }
            if fail_fast && dev > tol {
                return Err(MixtureError::ClosedFormMismatch { report });
            }
        }
    }
    report.passed = report.max_abs_dev <= tol;
    if !report.passed {
        return Err(MixtureError::ClosedFormMismatch { report });
    }
    Ok(report)
}

/// The grid used by the acceptance run and the `verify mixture` command:
/// 201 equally spaced x in `[-50, 50]`, sigma in {0.1, 0.5, 1, 5, 10}.
pub fn default_grid() -> (Vec<f64>, Vec<f64>) {
    let xs = (0..201).map(|i| -50.0 + i as f64 * 0.5).collect();
    let sigmas = alloc::vec![0.1, 0.5, 1.0, 5.0, 10.0];
    (xs, sigmas)
}
