//! Bracketed scalar root finding.

use crate::error::{Error, Result};

/// Outcome of a bisection run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bisection {
    pub root: f64,
    pub iterations: usize,
}

/// Bisection for `f` with `f(lo) <= 0 < f(hi)`.
///
/// Stops once `hi - lo <= rel_tol * |hi|`, or when the bracket can no longer
/// be split in floating point.
pub fn bisect<F>(
    solver: &'static str,
    mut f: F,
    mut lo: f64,
    mut hi: f64,
    rel_tol: f64,
    max_iter: usize,
) -> Result<Bisection>
where
    F: FnMut(f64) -> f64,
{
    let (f_lo, f_hi) = (f(lo), f(hi));
    if !(f_lo <= 0.0 && f_hi > 0.0) {
        return Err(Error::convergence(
            solver,
            format!("invalid bracket [{lo}, {hi}] with f = [{f_lo}, {f_hi}]"),
        ));
    }
    for iterations in 1..=max_iter {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return Ok(Bisection { root: mid, iterations });
        }
        let f_mid = f(mid);
        if f_mid.is_nan() {
            return Err(Error::convergence(solver, format!("NaN at p = {mid}")));
        }
        if f_mid <= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= rel_tol * hi.abs() {
            return Ok(Bisection {
                root: 0.5 * (lo + hi),
                iterations,
            });
        }
    }
    Err(Error::convergence(
        solver,
        format!("no convergence after {max_iter} iterations, bracket [{lo}, {hi}]"),
    ))
}

/// Doubles `start` until `f` becomes positive, returning the first such point.
pub fn expand_upward<F>(solver: &'static str, mut f: F, start: f64, max_doublings: usize) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    let mut hi = start;
    for _ in 0..max_doublings {
        if f(hi) > 0.0 {
            return Ok(hi);
        }
        hi *= 2.0;
    }
    Err(Error::convergence(
        solver,
        format!("no sign change found up to p = {hi}"),
    ))
}
