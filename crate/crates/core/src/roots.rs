//! Bracketing root search and 1-D minimization on uniform grids.

use crate::error::{QpmError, Result};

const MAX_BISECTIONS: usize = 200;
const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// `n` evenly spaced points spanning `[lo, hi]` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|i| {
                if i == n - 1 {
                    hi
                } else {
                    lo + (hi - lo) * i as f64 / (n - 1) as f64
                }
            })
            .collect(),
    }
}

/// Brackets `[a, b]` on `grid` where `values` changes sign. An exact zero
/// at a grid point yields a zero-width bracket at that point, reported once.
pub fn sign_change_brackets(grid: &[f64], values: &[f64]) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for i in 0..grid.len() {
        if values[i] == 0.0 {
            out.push((grid[i], grid[i]));
            continue;
        }
        if i + 1 < grid.len() && values[i + 1] != 0.0 && values[i].signum() != values[i + 1].signum() {
            out.push((grid[i], grid[i + 1]));
        }
    }
    out
}

/// Bisection on a sign-changing bracket. Iterates until `|f| <= f_tol` and
/// then keeps halving until the bracket can no longer shrink, so the
/// result is reproducible to the last bit for a given bracket.
pub fn bisect<F>(mut f: F, a: f64, b: f64, f_tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    if a == b {
        return Ok(a);
    }
    let (mut lo, mut hi) = if a < b { (a, b) } else { (b, a) };
    let mut f_lo = f(lo)?;
    let f_hi = f(hi)?;
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(QpmError::NoSolutionInWindow(format!(
            "no sign change on [{lo}, {hi}]"
        )));
    }
    let mut best = (f64::INFINITY, lo);
    for _ in 0..MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid)?;
        if f_mid.abs() < best.0 {
            best = (f_mid.abs(), mid);
        }
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    if best.0 <= f_tol {
        Ok(best.1)
    } else {
        Err(QpmError::NoConvergence(format!(
            "bisection stalled with |f| = {:e} > {f_tol:e}",
            best.0
        )))
    }
}

/// Golden-section minimization of a unimodal function on `[a, b]`,
/// stopping when the bracket is narrower than `x_tol`.
pub fn golden_section<F>(mut f: F, a: f64, b: f64, x_tol: f64) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let (mut lo, mut hi) = if a < b { (a, b) } else { (b, a) };
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    while hi - lo > x_tol {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2)?;
        }
        if !(x1 > lo && x2 < hi) {
            break;
        }
    }
    Ok(if f1 <= f2 { (x1, f1) } else { (x2, f2) })
}
