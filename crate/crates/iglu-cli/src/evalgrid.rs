//! Function evaluator: x / f(x) / f'(x) / gate(x) on an inclusive grid,
//! emitted as CSV with a one-line header for external plotting.

use anyhow::{bail, Result};
use iglu_core::Activation;
use std::fmt::Write as _;

/// Evenly spaced grid inclusive of both endpoints; `steps >= 2`.
pub fn eval_csv(act: &Activation, lo: f64, hi: f64, steps: usize) -> Result<String> {
    if steps < 2 {
        bail!("steps must be >= 2, got {steps}");
    }
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        bail!("need finite lo < hi, got [{lo}, {hi}]");
    }
    act.validate()?;
    let mut out = String::from("x,f,df,gate\n");
    for i in 0..steps {
        let x = lo + (hi - lo) * i as f64 / (steps - 1) as f64;
        let _ = writeln!(out, "{x},{},{},{}", act.eval(x), act.deriv(x), act.gate(x));
    }
    Ok(out)
}
