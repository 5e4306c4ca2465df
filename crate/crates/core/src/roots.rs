//! Bracketed scalar root finding for monotone functions.

/// Finds `x` in `[lo, hi]` with `f(x) = 0` for a function that is
/// non-decreasing on the bracket with `f(lo) <= 0 <= f(hi)`.
///
/// Plain bisection; stops when the bracket is narrower than
/// `rel_tol * max(|hi|, tiny)` or after `max_iter` halvings. Returns the final
/// bracket so callers can pick the side they need (for example the feasible
/// one).
pub fn bisect_increasing<F>(mut f: F, mut lo: f64, mut hi: f64, rel_tol: f64, max_iter: usize) -> (f64, f64)
where
    F: FnMut(f64) -> f64,
{
    for _ in 0..max_iter {
        if hi - lo <= rel_tol * hi.abs().max(f64::MIN_POSITIVE) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo, hi)
}

/// Safeguarded Newton iteration on an increasing function.
///
/// `f` returns `(value, derivative)`. Steps that leave the bracket (or a
/// non-positive derivative) fall back to bisection, so the bracket invariant
/// `f(lo) <= 0 <= f(hi)` is kept throughout. Returns the final bracket.
pub fn newton_bracketed<F>(mut f: F, mut lo: f64, mut hi: f64, rel_tol: f64, max_iter: usize) -> (f64, f64)
where
    F: FnMut(f64) -> (f64, f64),
{
    let mut x = 0.5 * (lo + hi);
    for _ in 0..max_iter {
        let (v, d) = f(x);
        if v < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        if v == 0.0 || hi - lo <= rel_tol * hi.abs().max(f64::MIN_POSITIVE) {
            break;
        }
        let step = if d > 0.0 && d.is_finite() { x - v / d } else { f64::NAN };
        x = if step > lo && step < hi {
            step
        } else {
            0.5 * (lo + hi)
        };
        if x <= lo || x >= hi {
            break;
        }
    }
    if f(lo).0 == 0.0 {
        return (lo, lo);
    }
    (lo, hi)
}

/// Illinois-modified regula falsi on an increasing function with
/// `f(lo) <= 0 <= f(hi)`.
///
/// Converges superlinearly on smooth functions. Non-finite samples (for
/// example an infeasible side reported as `-inf`) and stalled secant steps
/// fall back to bisection, so the bracket invariant always holds. Returns the
/// final bracket.
pub fn illinois_increasing<F>(mut f: F, mut lo: f64, mut hi: f64, rel_tol: f64, max_iter: usize) -> (f64, f64)
where
    F: FnMut(f64) -> f64,
{
    let mut f_lo = f(lo);
    let mut f_hi = f(hi);
    if f_lo >= 0.0 {
        return (lo, lo);
    }
    if f_hi <= 0.0 {
        return (hi, hi);
    }
    // Which end was kept on the previous step: -1 low, +1 high.
    let mut side = 0i8;
    for _ in 0..max_iter {
        let tol = rel_tol * hi.abs().max(lo.abs()).max(f64::MIN_POSITIVE);
        if hi - lo <= tol {
            break;
        }
        let x = if f_lo.is_finite() && f_hi.is_finite() {
            (lo * f_hi - hi * f_lo) / (f_hi - f_lo)
        } else {
            f64::NAN
        };
        // Keep the sample at least half a tolerance inside the bracket so a
        // converged end still moves.
        let x = if x.is_nan() {
            0.5 * (lo + hi)
        } else {
            x.clamp(lo + 0.5 * tol, hi - 0.5 * tol)
        };
        if x <= lo || x >= hi {
            break;
        }
        let v = f(x);
        if v == 0.0 {
            return (x, x);
        }
        if v < 0.0 {
            lo = x;
            f_lo = v;
            if side == -1 && f_hi.is_finite() {
                f_hi *= 0.5;
            }
            side = -1;
        } else {
            hi = x;
            f_hi = v;
            if side == 1 && f_lo.is_finite() {
                f_lo *= 0.5;
            }
            side = 1;
        }
    }
    (lo, hi)
}
