//! Scalar root finding and minimization.
//!
//! [`brent`] is the classic bracketed Brent solver (inverse quadratic
//! interpolation guarded by bisection); the quantile and strike equations
//! here are smooth and monotone, so it converges in a handful of iterations,
//! but every caller supplies a residual tolerance as well so that
//! convergence is judged on the equation being solved rather than on the
//! bracket width alone.  [`golden_min`] is a derivative-free golden-section
//! minimizer used by the volatility calibration.

use crate::error::{Error, Result};

/// Convergence policy for [`brent`].
#[derive(Debug, Clone, Copy)]
pub struct BrentCfg {
    /// Absolute tolerance on the abscissa.
    pub x_tol: f64,
    /// Absolute tolerance on the residual; iteration stops early once
    /// `|f(x)| ≤ f_tol`.
    pub f_tol: f64,
    /// Iteration cap.
    pub max_iter: usize,
}

impl Default for BrentCfg {
    fn default() -> Self {
        BrentCfg {
            x_tol: 1e-13,
            f_tol: 1e-12,
            max_iter: 200,
        }
    }
}

/// Finds a root of `f` in `[a, b]`, which must bracket a sign change.
pub fn brent<F: FnMut(f64) -> Result<f64>>(
    mut f: F,
    a: f64,
    b: f64,
    cfg: &BrentCfg,
) -> Result<f64> {
    let mut xa = a;
    let mut xb = b;
    let mut fa = f(xa)?;
    let mut fb = f(xb)?;
    if fa == 0.0 {
        return Ok(xa);
    }
    if fb == 0.0 {
        return Ok(xb);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::BracketFailure(format!(
            "no sign change on [{a}, {b}]: f(a) = {fa:e}, f(b) = {fb:e}"
        )));
    }
    let mut xc = xa;
    let mut fc = fa;
    let mut d = xb - xa;
    let mut e = d;
    for _ in 0..cfg.max_iter {
        if fb.signum() == fc.signum() {
            xc = xa;
            fc = fa;
            d = xb - xa;
            e = d;
        }
        if fc.abs() < fb.abs() {
            xa = xb;
            xb = xc;
            xc = xa;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * xb.abs() + 0.5 * cfg.x_tol;
        let xm = 0.5 * (xc - xb);
        if fb.abs() <= cfg.f_tol || xm.abs() <= tol1 {
            return Ok(xb);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            // Attempt inverse quadratic interpolation (secant if degenerate).
            let s = fb / fa;
            let (mut p, mut q) = if xa == xc {
                (2.0 * xm * s, 1.0 - s)
            } else {
                let q = fa / fc;
                let r = fb / fc;
                (
                    s * (2.0 * xm * q * (q - r) - (xb - xa) * (r - 1.0)),
                    (q - 1.0) * (r - 1.0) * (s - 1.0),
                )
            };
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        xa = xb;
        fa = fb;
        if d.abs() > tol1 {
            xb += d;
        } else {
            xb += tol1.copysign(xm);
        }
        fb = f(xb)?;
        if fb == 0.0 {
            return Ok(xb);
        }
    }
    Err(Error::RootNoConvergence(format!(
        "residual {fb:e} after {} iterations near x = {xb}",
        cfg.max_iter
    )))
}

/// Golden-section minimization of a unimodal `f` on `[a, b]`.
///
/// Returns the abscissa of the minimum to within `x_tol`.
pub fn golden_min<F: FnMut(f64) -> Result<f64>>(
    mut f: F,
    a: f64,
    b: f64,
    x_tol: f64,
) -> Result<f64> {
    const INV_PHI: f64 = 0.618033988749894848;
    let mut lo = a;
    let mut hi = b;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    // Interval shrinks by φ⁻¹ each step; bound the count accordingly.
    let steps = (((b - a) / x_tol).max(2.0).ln() / (1.0 / INV_PHI).ln()).ceil() as usize + 2;
    for _ in 0..steps {
        if hi - lo <= x_tol {
            break;
        }
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
    }
    Ok(0.5 * (lo + hi))
}
