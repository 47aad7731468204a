//! Parameter grids, ordered parallel evaluation, and number formatting
//! shared by the scans.

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Inclusive range `start, start + step, …` up to `stop`, where `stop` is
/// included if it is hit within a small relative slack. Values are computed
/// as `start + i·step` so no rounding accumulates.
pub fn inclusive_range(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(start.is_finite() && stop.is_finite() && step.is_finite()) {
        return Err(Error::InvalidParameter(
            "range bounds must be finite".into(),
        ));
    }
    if step <= 0.0 {
        return Err(Error::InvalidParameter("range step must be > 0".into()));
    }
    if stop < start {
        return Err(Error::InvalidParameter(
            "range stop must be >= start".into(),
        ));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| start + step * i as f64).collect())
}

/// `n` evenly spaced values from `start` to `stop` inclusive.
pub fn linspace(start: f64, stop: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![start],
        _ => {
            let h = (stop - start) / (n - 1) as f64;
            (0..n)
                .map(|i| {
                    if i == n - 1 {
                        stop
                    } else {
                        start + h * i as f64
                    }
                })
                .collect()
        }
    }
}

/// Checks that a grid is non-empty and strictly increasing.
pub fn check_grid(name: &str, values: &[f64]) -> Result<()> {
    if values.is_empty() {
        return Err(Error::InvalidParameter(format!(
            "{name} grid must not be empty"
        )));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "{name} grid must be finite"
        )));
    }
    if values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter(format!(
            "{name} grid must be strictly increasing"
        )));
    }
    Ok(())
}

/// Evaluates `f(i, j)` on a `rows × cols` grid in parallel and returns the
/// results in row-major order, independent of scheduling.
pub fn par_grid<T, F>(rows: usize, cols: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize, usize) -> T + Sync + Send,
{
    (0..rows * cols)
        .into_par_iter()
        .map(|idx| f(idx / cols, idx % cols))
        .collect()
}

/// Formats `x` with 9 significant digits, like C's `%.9g`.
pub fn fmt_sig(x: f64) -> String {
    const DIGITS: i32 = 9;
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    // Rounding may bump the exponent (e.g. 9.999999999 -> 10.0000000).
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, x);
    let exp = sci
        .rsplit_once('e')
        .and_then(|(_, e)| e.parse::<i32>().ok())
        .unwrap_or(exp);
    if (-5..DIGITS).contains(&exp) {
        let decimals = (DIGITS - 1 - exp).max(0) as usize;
        let s = format!("{x:.decimals$}");
        trim_zeros(&s)
    } else {
        let (mantissa, e) = sci.split_once('e').unwrap();
        format!("{}e{}", trim_zeros(mantissa), e)
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}
