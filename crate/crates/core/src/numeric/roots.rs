//! Bracketed root finding: a sign scan to locate a bracket, then bisection
//! accelerated by secant steps.

use crate::error::{Error, Result};

/// An interval whose endpoints have function values of opposite sign.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
    pub f_lo: f64,
    pub f_hi: f64,
}

/// Walks from `start` towards `end` in steps of `step` and returns the first
/// interval across which `f` changes sign. A zero at a grid point is returned
/// as a degenerate bracket.
pub fn scan_bracket<F: FnMut(f64) -> f64>(mut f: F, start: f64, end: f64, step: f64) -> Option<Bracket> {
    assert!(step > 0.0, "scan step must be positive");
    let dir = if end >= start { 1.0 } else { -1.0 };
    let span = (end - start).abs();
    let n = (span / step).ceil().max(1.0) as usize;
    let mut x0 = start;
    let mut f0 = f(x0);
    if f0 == 0.0 {
        return Some(Bracket {
            lo: x0,
            hi: x0,
            f_lo: 0.0,
            f_hi: 0.0,
        });
    }
    for i in 1..=n {
        let x1 = if i == n { end } else { start + dir * step * i as f64 };
        let f1 = f(x1);
        if f1 == 0.0 || f1.signum() != f0.signum() {
            return Some(Bracket {
                lo: x0,
                hi: x1,
                f_lo: f0,
                f_hi: f1,
            });
        }
        x0 = x1;
        f0 = f1;
    }
    None
}

/// Refines a bracket to absolute width `xtol`.
pub fn find_root<F: FnMut(f64) -> f64>(mut f: F, bracket: Bracket, xtol: f64) -> Result<f64> {
    let Bracket {
        mut lo,
        mut hi,
        mut f_lo,
        mut f_hi,
    } = bracket;
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() || !f_lo.is_finite() || !f_hi.is_finite() {
        return Err(Error::Numerical(format!(
            "invalid bracket [{lo}, {hi}] with values {f_lo}, {f_hi}"
        )));
    }

    let mut use_secant = true;
    for _ in 0..200 {
        if (hi - lo).abs() <= xtol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let mut x = mid;
        if use_secant {
            let s = hi - f_hi * (hi - lo) / (f_hi - f_lo);
            let (a, b) = if lo < hi { (lo, hi) } else { (hi, lo) };
            if s.is_finite() && s > a && s < b {
                x = s;
            }
        }
        let fx = f(x);
        if fx == 0.0 {
            return Ok(x);
        }
        let width_before = (hi - lo).abs();
        if fx.signum() == f_lo.signum() {
            lo = x;
            f_lo = fx;
        } else {
            hi = x;
            f_hi = fx;
        }
        // A secant step that failed to halve the bracket is followed by a
        // plain bisection step.
        use_secant = (hi - lo).abs() <= 0.5 * width_before;
    }
    if (hi - lo).abs() > xtol {
        return Err(Error::Numerical(format!(
            "root finder did not reach tolerance {xtol}: bracket [{lo}, {hi}]"
        )));
    }
    // Return the endpoint with the smaller residual.
    Ok(if f_lo.abs() <= f_hi.abs() { lo } else { hi })
}

/// Finds the switch point of a monotone predicate: `pred(inside)` holds and
/// `pred(outside)` does not. Returns the last point known to satisfy `pred`.
pub fn bisect_predicate<P: FnMut(f64) -> bool>(mut pred: P, mut inside: f64, mut outside: f64, xtol: f64) -> f64 {
    while (outside - inside).abs() > xtol {
        let mid = 0.5 * (inside + outside);
        if pred(mid) {
            inside = mid;
        } else {
            outside = mid;
        }
    }
    inside
}
