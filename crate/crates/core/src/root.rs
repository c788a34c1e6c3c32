//! One-dimensional root finding and minimization.

use crate::error::{Error, Result};

/// Solves `f(x) = 0` on a bracket `[a, b]` with `f(a)·f(b) ≤ 0` by bisection
/// interleaved with secant steps. Stops once the bracket is narrower than
/// `xtol` or `|f| ≤ ftol`, returning the evaluated point with the smallest
/// residual.
pub fn bisect_secant<F>(mut f: F, mut a: f64, mut b: f64, xtol: f64, ftol: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut fa = f(a)?;
    let mut fb = f(b)?;
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::domain("bisect_secant", "bracket has no sign change"));
    }
    let (mut best, mut fbest) = if fa.abs() < fb.abs() { (a, fa) } else { (b, fb) };
    let mut use_secant = true;
    for _ in 0..400 {
        let width = (b - a).abs();
        if width <= xtol || fbest.abs() <= ftol {
            break;
        }
        let mid = 0.5 * (a + b);
        let mut x = mid;
        if use_secant {
            let s = b - fb * (b - a) / (fb - fa);
            // stay clear of the endpoints so the bracket keeps shrinking
            let margin = 1e-3 * width;
            if s.is_finite() && s > a.min(b) + margin && s < a.max(b) - margin {
                x = s;
            }
        }
        let fx = f(x)?;
        if fx.abs() < fbest.abs() {
            best = x;
            fbest = fx;
        }
        if fx == 0.0 {
            break;
        }
        let before = width;
        if fx.signum() == fa.signum() {
            a = x;
            fa = fx;
        } else {
            b = x;
            fb = fx;
        }
        // fall back to a bisection when the secant step did not halve the bracket
        use_secant = (b - a).abs() <= 0.5 * before;
    }
    Ok(best)
}

/// Golden-section minimization of a unimodal `f` on `[a, b]` until the
/// bracket is below `rtol` relative to its midpoint. Returns `(x, f(x))`.
pub fn golden_section<F>(mut f: F, mut a: f64, mut b: f64, rtol: f64) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    for _ in 0..500 {
        if (b - a).abs() <= rtol * (0.5 * (a + b)).abs() {
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d)?;
        }
    }
    Ok(if fc <= fd { (c, fc) } else { (d, fd) })
}
