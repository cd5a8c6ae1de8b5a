//! Scalar root finding: bracket expansion plus a safeguarded bisection/secant
//! hybrid.
//!
//! Every solver here requires (or first establishes) a sign change and keeps
//! the bracket valid on every step, so a monotone continuous function cannot
//! escape. The secant step is attempted first; whenever it leaves the bracket
//! or fails to shrink it fast enough, the step falls back to bisection.

use crate::error::{Error, Result};

/// Hard cap on iterations for any single solve.
pub const MAX_ITER: usize = 200;

/// Solve `f(x) = 0` for `x` in `[lo, hi]`, given `f(lo)` and `f(hi)` with
/// opposite signs. Converges when the bracket width drops below
/// `xtol * (1 + |x|)` or an exact zero is hit.
pub fn solve_bracketed<F>(mut f: F, lo: f64, hi: f64, xtol: f64) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (f(a), f(b));
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.is_nan() || fb.is_nan() || fa.signum() == fb.signum() {
        return Err(Error::BracketFailure {
            lo: a,
            hi: b,
            flo: fa,
            fhi: fb,
        });
    }

    for iter in 0..MAX_ITER {
        let mid = 0.5 * (a + b);
        if (b - a).abs() <= xtol * (1.0 + mid.abs()) {
            return Ok(mid);
        }

        // Even iterations: secant proposal from the bracket endpoints, clamped
        // away from the endpoints so one side cannot pin the iteration. Odd
        // iterations: forced bisection, which guarantees the bracket at least
        // halves every second step regardless of how badly scaled f is.
        let x = if iter % 2 == 0 && fb != fa {
            let margin = 0.125 * (b - a).abs();
            let s = b - fb * (b - a) / (fb - fa);
            if s.is_finite() {
                s.clamp(a.min(b) + margin, a.max(b) - margin)
            } else {
                mid
            }
        } else {
            mid
        };

        let fx = f(x);
        if fx == 0.0 {
            return Ok(x);
        }
        if fx.is_nan() {
            return Err(Error::NonFiniteIntegrand { at: x });
        }
        if fx.signum() == fa.signum() {
            a = x;
            fa = fx;
        } else {
            b = x;
            fb = fx;
        }
    }
    Err(Error::NoConvergence {
        what: "bracketed root solve",
        iterations: MAX_ITER,
    })
}

/// Expand a bracket geometrically from `x0` until `f` changes sign, clipping
/// to `[dom_lo, dom_hi]`, then hand off to [`solve_bracketed`].
///
/// `step` sets the initial half-width of the probe interval and should be on
/// the natural scale of the problem.
pub fn solve_expanding<F>(
    mut f: F,
    x0: f64,
    step: f64,
    dom_lo: f64,
    dom_hi: f64,
    xtol: f64,
) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    debug_assert!(step > 0.0);
    let mut a = (x0 - step).max(dom_lo);
    let mut b = (x0 + step).min(dom_hi);
    let mut fa = f(a);
    let mut fb = f(b);
    let mut width = step;

    for _ in 0..MAX_ITER {
        if fa == 0.0 {
            return Ok(a);
        }
        if fb == 0.0 {
            return Ok(b);
        }
        if fa.is_finite() && fb.is_finite() && fa.signum() != fb.signum() {
            return solve_bracketed(f, a, b, xtol);
        }
        if a <= dom_lo && b >= dom_hi {
            return Err(Error::BracketFailure {
                lo: a,
                hi: b,
                flo: fa,
                fhi: fb,
            });
        }
        width *= 2.0;
        let new_a = (x0 - width).max(dom_lo);
        let new_b = (x0 + width).min(dom_hi);
        if new_a < a {
            a = new_a;
            fa = f(a);
        }
        if new_b > b {
            b = new_b;
            fb = f(b);
        }
    }
    Err(Error::NoConvergence {
        what: "bracket expansion",
        iterations: MAX_ITER,
    })
}
