//! Bracketed root finding shared by the power and slope inversions.

/// Root of an increasing function on `[lo, hi]`, where `f` returns the
/// value and the derivative.
///
/// Keeps a sign bracket like bisection. A Newton step from the latest
/// point is taken when it lands inside the bracket and is at most half the
/// step before last; otherwise the midpoint is used. The search ends once
/// a step is shorter than `tol / 2`, which for a bisection step means the
/// bracket is narrower than `tol`.
pub fn newton_bisect(
    mut f: impl FnMut(f64) -> (f64, f64),
    mut lo: f64,
    mut hi: f64,
    start: f64,
    tol: f64,
) -> f64 {
    let mut x = if start >= lo && start <= hi {
        start
    } else {
        0.5 * (lo + hi)
    };
    let mut dx_old = hi - lo;
    let mut dx = dx_old;
    for _ in 0..400 {
        let (v, d) = f(x);
        if v == 0.0 {
            return x;
        }
        if v < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let newton = x - v / d;
        let use_newton =
            d > 0.0 && newton > lo && newton < hi && (2.0 * v).abs() <= (dx_old * d).abs();
        dx_old = dx;
        if use_newton {
            dx = newton - x;
            x = newton;
        } else {
            dx = 0.5 * (hi - lo);
            x = lo + dx;
            if x <= lo || x >= hi {
                return x;
            }
        }
        if dx.abs() <= 0.5 * tol {
            return x;
        }
    }
    x
}
