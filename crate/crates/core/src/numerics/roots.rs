//! Inversion of increasing functions on a bracket.

use crate::error::{Error, Result};

const MAX_ITER: usize = 200;

/// Solves `g(x) = target` for increasing `g` on `[lo, hi]`.
///
/// Regula falsi with the Illinois modification; a bisection step is forced
/// whenever the bracket fails to halve, so convergence is never slower than
/// plain bisection.
pub fn invert_monotone<G>(g: G, target: f64, bracket: (f64, f64), tol: f64) -> Result<f64>
where
    G: Fn(f64) -> f64,
{
    let (mut lo, mut hi) = bracket;
    if lo > hi {
        std::mem::swap(&mut lo, &mut hi);
    }
    let mut f_lo = g(lo) - target;
    let mut f_hi = g(hi) - target;
    if !(f_lo <= 0.0 && f_hi >= 0.0) {
        return Err(Error::BracketInvalid {
            target,
            g_lo: f_lo + target,
            g_hi: f_hi + target,
        });
    }
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    let tol = tol.max(0.0);
    let mut side = 0i8;
    let mut width = f64::INFINITY;
    for _ in 0..MAX_ITER {
        if hi - lo <= tol {
            break;
        }
        let mut x = (lo * f_hi - hi * f_lo) / (f_hi - f_lo);
        if !(x > lo && x < hi) || hi - lo > 0.5 * width {
            // forced bisection when the false-position step stalls
            x = 0.5 * (lo + hi);
        }
        width = hi - lo;
        if x <= lo || x >= hi {
            break;
        }
        let fx = g(x) - target;
        if fx == 0.0 {
            return Ok(x);
        }
        if fx < 0.0 {
            lo = x;
            f_lo = fx;
            if side == -1 {
                f_hi *= 0.5;
            }
            side = -1;
        } else {
            hi = x;
            f_hi = fx;
            if side == 1 {
                f_lo *= 0.5;
            }
            side = 1;
        }
    }
    Ok(if f_hi.abs() < f_lo.abs() { hi } else { lo })
}

/// Newton iteration safeguarded by a bracket, for increasing `g` with known
/// derivative `dg > 0`.
///
/// Stops when `|g(x) - target| <= f_tol` or the bracket is narrower than
/// `x_tol`, whichever comes first.
pub fn invert_monotone_newton<G, D>(
    g: G,
    dg: D,
    target: f64,
    bracket: (f64, f64),
    guess: Option<f64>,
    x_tol: f64,
    f_tol: f64,
) -> Result<f64>
where
    G: Fn(f64) -> Result<f64>,
    D: Fn(f64) -> f64,
{
    let (mut lo, mut hi) = bracket;
    if lo > hi {
        std::mem::swap(&mut lo, &mut hi);
    }
    let g_lo = g(lo)?;
    let g_hi = g(hi)?;
    if !(g_lo <= target && target <= g_hi) {
        return Err(Error::BracketInvalid {
            target,
            g_lo,
            g_hi,
        });
    }
    if (g_lo - target).abs() <= f_tol {
        return Ok(lo);
    }
    if (g_hi - target).abs() <= f_tol {
        return Ok(hi);
    }
    let mut x = guess
        .filter(|x| *x > lo && *x < hi)
        .unwrap_or_else(|| lo + (target - g_lo) / (g_hi - g_lo) * (hi - lo));
    if !(x > lo && x < hi) {
        x = 0.5 * (lo + hi);
    }
    for _ in 0..MAX_ITER {
        let r = g(x)? - target;
        if r.abs() <= f_tol {
            return Ok(x);
        }
        if r < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        if hi - lo <= x_tol {
            return Ok(x);
        }
        let slope = dg(x);
        let mut next = x - r / slope;
        if !(slope > 0.0) || !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if next == x {
            return Ok(x);
        }
        x = next;
    }
    Ok(x)
}
